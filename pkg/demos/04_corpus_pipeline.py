"""
A full corpus run, from manifests to prompt bundles
===================================================

Writes a miniature corpus to a temp directory (embedding files, WAVs,
manifests, config), runs the pipeline over it, and shows what lands on
disk. The same thing is available from the shell as `termscope run`.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from termscope import (
    EmbeddingSequence,
    load_config,
    run_corpus,
    write_embeddings,
)
from termscope.locate import write_wav

root = Path(tempfile.mkdtemp(prefix="termscope-demo-"))
kb_dir = root / "kb"
utt_dir = root / "utts"
kb_dir.mkdir()
utt_dir.mkdir()
rng = np.random.default_rng(2)

DIM, FRAMES, RATE, FRAME_SEC = 16, 150, 16000, 0.02

# --- knowledge pool: 8 clips with a terms table --------------------------

clips = []
with open(kb_dir / "terms.jsonl", "w", encoding="utf-8") as fh:
    for i in range(8):
        clip = rng.uniform(0.1, 1.0, size=(int(rng.integers(15, 40)), DIM))
        clip = clip.astype(np.float32)
        clip[-1, i % DIM] = 45.0
        clips.append(clip)
        write_embeddings(EmbeddingSequence(clip), kb_dir / f"kb-{i}.semb")
        row = {
            "id": f"kb-{i}",
            "term": f"term {i}",
            "translation": f"译词{i}",
            "clip_emb": f"kb-{i}.semb",
        }
        fh.write(json.dumps(row, ensure_ascii=False) + "\n")

# --- three utterances, each with one clip planted -------------------------

with open(utt_dir / "manifest.jsonl", "w", encoding="utf-8") as fh:
    for i, gold in enumerate((3, 5, 0)):
        u = rng.uniform(-1.0, -0.1, size=(FRAMES, DIM)).astype(np.float32)
        start = 30 * (i + 1)
        u[start : start + len(clips[gold])] = clips[gold]
        write_embeddings(EmbeddingSequence(u), utt_dir / f"utt-{i}.semb")
        samples = rng.integers(-3000, 3000, size=int(FRAMES * FRAME_SEC * RATE))
        write_wav(utt_dir / f"utt-{i}.wav", samples.astype(np.int16), RATE)
        fh.write(
            json.dumps(
                {
                    "id": f"utt-{i}",
                    "kind": "utterance",
                    "emb_path": f"utt-{i}.semb",
                    "audio_path": f"utt-{i}.wav",
                }
            )
            + "\n"
        )

(root / "run.toml").write_text(
    f"""\
pool_manifest = {json.dumps(str(kb_dir / "terms.jsonl"))}
utterance_manifest = {json.dumps(str(utt_dir / "manifest.jsonl"))}
out_dir = {json.dumps(str(root / "out"))}
k = 3
""",
    encoding="utf-8",
)

# --- run and inspect ------------------------------------------------------

report = run_corpus(load_config(root / "run.toml"))
print(f"processed {report['completed']}/{report['total']} utterances")

bundle = json.loads((root / "out" / "utt-0" / "bundle.json").read_text("utf-8"))
print("\ntop hits for utt-0:")
for hit in bundle["hits"]:
    print(
        f"  rank {hit['rank']}: {hit['triplet_id']}  "
        f"[{hit['start_sec']:.2f}s, {hit['end_sec']:.2f}s]  score {hit['score']:.4f}"
    )
print(f"\nprompt:\n{bundle['prompt'][:160]}...")
print(f"\nartifacts under {root / 'out'}:")
for path in sorted((root / "out").rglob("*")):
    if path.is_file():
        print(f"  {path.relative_to(root)}")
