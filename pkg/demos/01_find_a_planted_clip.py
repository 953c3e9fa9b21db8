"""
Finding one terminology clip inside an utterance
================================================

Builds a synthetic utterance with a known clip planted at frame 120,
then asks the sliding similarity search where the clip is.
"""

import numpy as np

from termscope import EmbeddingSequence, sliding_sim

rng = np.random.default_rng(0)

# a 2-second "clip": 40 frames of strongly positive features. The last
# frame gets a large spike in one dimension — max pooling only notices
# where a window *ends*, so without a distinctive final frame any window
# that merely covers most of the clip would tie at cosine 1 and the
# earliest such window would win.
clip = rng.uniform(0.1, 1.0, size=(40, 32)).astype(np.float32)
clip[-1, 7] = 40.0

# a 10-second "utterance": negative background, clip copied in at frame 120
utterance = rng.uniform(-1.0, -0.1, size=(500, 32)).astype(np.float32)
utterance[120:160] = clip

u = EmbeddingSequence(utterance, frame_duration=0.02)
c = EmbeddingSequence(clip, frame_duration=0.02)

result = sliding_sim(u, c)

print(f"planted at frame 120, found at frame {result.best_window_start}")
print(f"window length {result.window_len} frames, cosine {result.score:.6f}")
print(
    f"that is {result.best_window_start * u.frame_duration:.2f}s to "
    f"{(result.best_window_start + result.window_len) * u.frame_duration:.2f}s"
)
