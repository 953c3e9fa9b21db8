"""
Ranking a terminology knowledge pool against an utterance
=========================================================

Fifty distractor clips and one gold clip, all searched in a single
retrieve_topk call. The gold clip is planted into the utterance, so it
should come back at rank 1 with the exact planted frame.
"""

import numpy as np

from termscope import (
    EmbeddingSequence,
    KnowledgePool,
    KnowledgeTriplet,
    PoolingMode,
    retrieve_topk,
)

rng = np.random.default_rng(1)
DIM = 32

def make_clip(frames, spike_dim):
    # positive rows plus one spiked dimension in the last frame, so every
    # clip has a distinctive pooled signature
    clip = rng.uniform(0.1, 1.0, size=(frames, DIM)).astype(np.float32)
    clip[-1, spike_dim] = rng.uniform(30.0, 60.0)
    return clip

triplets = [
    KnowledgeTriplet(
        id=f"kb-{i:03d}",
        term=f"term {i}",
        translation=f"translation {i}",
        clip_emb=EmbeddingSequence(make_clip(int(rng.integers(20, 60)), i % DIM)),
    )
    for i in range(50)
]
pool = KnowledgePool(triplets)

# plant triplet 17's clip at frame 300 of a negative-background utterance
gold = triplets[17].clip_emb
utterance = rng.uniform(-1.0, -0.1, size=(800, DIM)).astype(np.float32)
utterance[300 : 300 + gold.frames] = gold.data
u = EmbeddingSequence(utterance)

print("sliding-window search:")
for hit in retrieve_topk(u, pool, 5):
    r = hit.result
    print(
        f"  rank {hit.rank}: {hit.triplet_id}  score {r.score:.4f}  "
        f"frames [{r.best_window_start}, {r.best_window_start + r.window_len})"
    )

# the whole-utterance average baseline has no notion of "where", and the
# background drags every score down
print("whole-average baseline:")
for hit in retrieve_topk(u, pool, 3, PoolingMode.WHOLE_AVG):
    print(f"  rank {hit.rank}: {hit.triplet_id}  score {hit.result.score:.4f}")
