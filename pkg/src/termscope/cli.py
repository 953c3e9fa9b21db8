"""Command-line front door for every pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error. Results go to
stdout (single JSON document with --json, JSONL or plain text without);
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bench import DEFAULT_MEASURED, DEFAULT_WARMUP, run_bench
from .embeddings import read_embeddings
from .errors import TermscopeError
from .knowledge import build_pool, load_terms
from .locate import frames_to_span, read_wav, slice_samples, write_wav
from .metrics import (
    LossCase,
    RetrievalEvalCase,
    TsrCase,
    asr_filter,
    contrastive_loss,
    hits_counts,
    levenshtein,
    tsr_counts,
)
from .pipeline import load_config, run_corpus
from .prompts import PromptSpec, PromptStyle, build_prompt, strip_tags, tag_reference
from .retrieval import PoolingMode, retrieve_topk


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit_json(doc) -> None:
    print(json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=2))


def _emit_jsonl(rows) -> None:
    for row in rows:
        print(json.dumps(row, ensure_ascii=False, sort_keys=True))


def _read_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    return rows


def _threads_from(args) -> int | None:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("TERMSCOPE_THREADS")
    if env:
        return int(env)
    return None


def _pool_from(args):
    root = Path(args.root) if args.root else Path(args.pool).parent
    return build_pool(load_terms(args.pool), root=root)


def _hit_rows(hits) -> list[dict]:
    return [
        {
            "triplet_id": h.triplet_id,
            "rank": h.rank,
            "score": h.result.score,
            "best_window_start": h.result.best_window_start,
            "window_len": h.result.window_len,
        }
        for h in hits
    ]


# --- subcommand handlers ----------------------------------------------------


def _cmd_build_kb(args) -> int:
    pool = _pool_from(args)
    doc = {"triplets": len(pool), "dim": pool.dim}
    if args.json:
        _emit_json(doc)
    else:
        print(f"pool: {len(pool)} triplets, dim {pool.dim}")
    return 0


def _cmd_retrieve(args) -> int:
    pool = _pool_from(args)
    utterance = read_embeddings(args.utterance)
    hits = retrieve_topk(
        utterance,
        pool,
        args.k,
        PoolingMode(args.pooling),
        threads=_threads_from(args),
    )
    rows = _hit_rows(hits)
    if args.json:
        _emit_json({"hits": rows})
    else:
        _emit_jsonl(rows)
    return 0


def _cmd_locate(args) -> int:
    pool = _pool_from(args)
    utterance = read_embeddings(args.utterance)
    utterance_id = args.utterance_id or Path(args.utterance).stem
    frame_duration = args.frame_duration or utterance.frame_duration
    hits = retrieve_topk(
        utterance,
        pool,
        args.k,
        PoolingMode(args.pooling),
        threads=_threads_from(args),
    )
    rows = []
    for hit in hits:
        span = frames_to_span(
            hit.result.best_window_start,
            hit.result.window_len,
            frame_duration,
            utterance_id=utterance_id,
        )
        rows.append(
            {
                "utterance_id": utterance_id,
                "triplet_id": hit.triplet_id,
                "start_sec": span.start_sec,
                "end_sec": span.end_sec,
                "score": hit.result.score,
            }
        )
    if args.json:
        _emit_json({"spans": rows})
    else:
        _emit_jsonl(rows)
    return 0


def _cmd_slice(args) -> int:
    samples, rate = read_wav(args.wav)
    cut = slice_samples(samples, rate, args.start, args.end)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_wav(args.out, cut, rate)
    doc = {"out": args.out, "samples": int(len(cut)), "sample_rate": rate}
    if args.json:
        _emit_json(doc)
    else:
        print(f"wrote {len(cut)} samples @ {rate} Hz to {args.out}")
    return 0


def _parse_triplet(value: str) -> tuple[str, str, str]:
    parts = value.split("|")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected 'term|audio|translation', got {value!r}"
        )
    return parts[0], parts[1], parts[2]


def _cmd_prompt(args) -> int:
    prompt = build_prompt(
        PromptSpec(
            style=PromptStyle(args.style),
            src_lang=args.src,
            tgt_lang=args.tgt,
            triplets=args.triplet,
            utterance_audio=args.utterance_audio,
        )
    )
    if args.json:
        _emit_json({"prompt": prompt})
    else:
        print(prompt)
    return 0


def _cmd_tag_refs(args) -> int:
    rows = _read_jsonl(args.refs)
    out = []
    for row in rows:
        translations = row["term_translations"]
        if not isinstance(translations, list) or not all(
            isinstance(t, str) for t in translations
        ):
            raise ValueError(
                f"{args.refs}: term_translations must be a list of strings"
            )
        tagged = tag_reference(row["reference"], translations)
        out.append(
            {"utterance_id": row["utterance_id"], "tagged_reference": tagged.text}
        )
    if args.json:
        _emit_json({"references": out})
    else:
        _emit_jsonl(out)
    return 0


def _cmd_strip_tags(args) -> int:
    if args.text is not None:
        lines = [args.text]
    else:
        lines = sys.stdin.read().splitlines()
    stripped = [strip_tags(line) for line in lines]
    if args.json:
        _emit_json({"lines": stripped})
    else:
        for line in stripped:
            print(line)
    return 0


def _cmd_filter_asr(args) -> int:
    if args.infile:
        rows = _read_jsonl(args.infile)
    elif args.term is not None and args.transcript is not None:
        rows = [{"term": args.term, "transcript": args.transcript}]
    else:
        raise ValueError("provide --term and --transcript, or --in")
    out = []
    for row in rows:
        decision = asr_filter(row["term"], row["transcript"])
        out.append(
            {
                "term": row["term"],
                "transcript": row["transcript"],
                "decision": decision.value,
                "distance": levenshtein(
                    " ".join(row["term"].lower().split()),
                    " ".join(row["transcript"].lower().split()),
                ),
            }
        )
    if args.json:
        _emit_json({"results": out})
    else:
        _emit_jsonl(out)
    return 0


def _cmd_eval_hits(args) -> int:
    cases = [
        RetrievalEvalCase(
            row["utterance_id"],
            frozenset(row["gold_triplet_ids"]),
            tuple(row["ranked_ids"]),
        )
        for row in _read_jsonl(args.cases)
    ]
    reports = []
    for n in args.n or (1, 5, 10):
        hits, total = hits_counts(cases, n)
        reports.append(
            {
                "metric": f"hits@{n}",
                "value": hits / total,
                "numerator": hits,
                "denominator": total,
            }
        )
    if args.json:
        _emit_json({"reports": reports})
    else:
        for report in reports:
            print(
                f"{report['metric']}: {report['value']:.6f} "
                f"({report['numerator']}/{report['denominator']})"
            )
    return 0


def _cmd_eval_tsr(args) -> int:
    cases = [
        TsrCase(row["utterance_id"], row["hypothesis"], tuple(row["term_targets"]))
        for row in _read_jsonl(args.cases)
    ]
    successes, total = tsr_counts(cases)
    report = {
        "metric": "tsr",
        "value": successes / total,
        "numerator": successes,
        "denominator": total,
    }
    if args.json:
        _emit_json(report)
    else:
        print(f"tsr: {report['value']:.6f} ({successes}/{total})")
    return 0


def _cmd_loss(args) -> int:
    value = contrastive_loss(LossCase(args.pos, tuple(args.neg)))
    if args.json:
        _emit_json({"loss": value})
    else:
        print(f"{value:.12g}")
    return 0


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.out_dir is not None:
        config.out_dir = args.out_dir
    threads = _threads_from(args)
    if threads is not None:
        config.threads = threads
    report = run_corpus(config)
    if args.json:
        _emit_json(report)
    else:
        print(f"processed {report['completed']}/{report['total']} utterances")
        for failure in report["failed"]:
            print(
                f"failed {failure['utterance_id']}: {failure['error']}",
                file=sys.stderr,
            )
        if "hits_at_n" in report:
            for n, value in report["hits_at_n"].items():
                print(f"hits@{n}: {value:.6f}")
    return 0


def _fmt_stats(stats: dict) -> str:
    return (
        f"median {stats['median_ms']:9.3f} ms  mean {stats['mean_ms']:9.3f} ms  "
        f"p99 {stats['p99_ms']:9.3f} ms  ({stats['iterations']} iters)"
    )


def _cmd_bench(args) -> int:
    report = run_bench(
        pool_size=args.pool_size,
        frames=args.frames,
        dim=args.dim,
        clip_frames=args.clip_frames,
        k=args.k,
        warmup=args.warmup,
        measured=args.measured,
        naive_query_iterations=args.naive_query_iterations,
        seed=args.seed,
        threads=_threads_from(args),
    )
    if args.json:
        _emit_json(report)
        return 0
    pooling = report["pooling"]
    print(
        f"pooling  frames={pooling['frames']} dim={pooling['dim']} "
        f"window={pooling['window_len']}"
    )
    print(f"  naive      {_fmt_stats(pooling['naive'])}")
    print(f"  deque      {_fmt_stats(pooling['deque'])}")
    print(f"  optimized  {_fmt_stats(pooling['optimized'])}")
    print(
        f"  speedup naive/optimized: "
        f"{pooling['speedup_naive_over_optimized']:.2f}x"
    )
    query = report["query"]
    print(f"query  pool={query['pool_size']} k={query['k']}")
    print(f"  optimized  {_fmt_stats(query['optimized'])}")
    if "naive" in query:
        print(f"  naive      {_fmt_stats(query['naive'])}")
    return 0


# --- parser -----------------------------------------------------------------


def _add_json(parser) -> None:
    parser.add_argument("--json", action="store_true", help="emit a single JSON document")


def _add_threads(parser) -> None:
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker cap (default: TERMSCOPE_THREADS or serial)",
    )


def _add_pool_args(parser) -> None:
    parser.add_argument("--pool", required=True, help="terminology table JSONL")
    parser.add_argument("--root", default=None, help="root for relative paths")


def build_parser() -> _Parser:
    parser = _Parser(prog="termscope", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-kb", help="build and validate a knowledge pool")
    _add_pool_args(p)
    _add_json(p)
    p.set_defaults(handler=_cmd_build_kb)

    p = sub.add_parser("retrieve", help="top-k triplets for an utterance")
    _add_pool_args(p)
    p.add_argument("--utterance", required=True, help=".semb embedding file")
    p.add_argument("--k", type=int, default=5)
    p.add_argument(
        "--pooling",
        choices=[m.value for m in PoolingMode],
        default=PoolingMode.SLIDING_MAX.value,
    )
    _add_threads(p)
    _add_json(p)
    p.set_defaults(handler=_cmd_retrieve)

    p = sub.add_parser("locate", help="retrieve and report time spans")
    _add_pool_args(p)
    p.add_argument("--utterance", required=True)
    p.add_argument("--utterance-id", default=None, help="default: file stem")
    p.add_argument("--k", type=int, default=5)
    p.add_argument(
        "--pooling",
        choices=[m.value for m in PoolingMode],
        default=PoolingMode.SLIDING_MAX.value,
    )
    p.add_argument(
        "--frame-duration",
        type=float,
        default=None,
        help="seconds per frame (default: embedding header)",
    )
    _add_threads(p)
    _add_json(p)
    p.set_defaults(handler=_cmd_locate)

    p = sub.add_parser("slice", help="cut a time span out of a WAV file")
    p.add_argument("--wav", required=True)
    p.add_argument("--start", type=float, required=True, help="seconds")
    p.add_argument("--end", type=float, required=True, help="seconds")
    p.add_argument("--out", required=True)
    _add_json(p)
    p.set_defaults(handler=_cmd_slice)

    p = sub.add_parser("prompt", help="render an instruction prompt")
    p.add_argument(
        "--style",
        choices=[s.value for s in PromptStyle],
        default=PromptStyle.LOCATE_FOCUS.value,
    )
    p.add_argument("--src", default="English")
    p.add_argument("--tgt", default="Chinese")
    p.add_argument(
        "--triplet",
        action="append",
        type=_parse_triplet,
        default=[],
        metavar="TERM|AUDIO|TRANSLATION",
        help="repeatable",
    )
    p.add_argument("--utterance-audio", required=True)
    _add_json(p)
    p.set_defaults(handler=_cmd_prompt)

    p = sub.add_parser("tag-refs", help="insert <Term> tags into references")
    p.add_argument(
        "--refs",
        required=True,
        help="JSONL {utterance_id, reference, term_translations}",
    )
    _add_json(p)
    p.set_defaults(handler=_cmd_tag_refs)

    p = sub.add_parser("strip-tags", help="remove <Term> tags")
    p.add_argument("--text", default=None, help="default: read stdin lines")
    _add_json(p)
    p.set_defaults(handler=_cmd_strip_tags)

    p = sub.add_parser("filter-asr", help="edit-distance retention filter")
    p.add_argument("--term", default=None)
    p.add_argument("--transcript", default=None)
    p.add_argument("--in", dest="infile", default=None, help="JSONL {term, transcript}")
    _add_json(p)
    p.set_defaults(handler=_cmd_filter_asr)

    p = sub.add_parser("eval-hits", help="Hits@N over ranked retrieval cases")
    p.add_argument(
        "--cases",
        required=True,
        help="JSONL {utterance_id, gold_triplet_ids, ranked_ids}",
    )
    p.add_argument("--n", type=int, action="append", default=None, help="repeatable")
    _add_json(p)
    p.set_defaults(handler=_cmd_eval_hits)

    p = sub.add_parser("eval-tsr", help="term success rate over hypotheses")
    p.add_argument(
        "--cases", required=True, help="JSONL {utterance_id, hypothesis, term_targets}"
    )
    _add_json(p)
    p.set_defaults(handler=_cmd_eval_tsr)

    p = sub.add_parser("loss", help="contrastive similarity loss")
    p.add_argument("--pos", type=float, required=True)
    p.add_argument("--neg", type=float, action="append", default=[])
    _add_json(p)
    p.set_defaults(handler=_cmd_loss)

    p = sub.add_parser("run", help="run the full pipeline over a corpus")
    p.add_argument("--config", required=True, help="TOML or JSON config file")
    p.add_argument("--out-dir", default=None, help="override config out_dir")
    _add_threads(p)
    _add_json(p)
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("bench", help="latency benchmarks on synthetic data")
    p.add_argument("--pool-size", type=int, default=1000)
    p.add_argument("--frames", type=int, default=1500)
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--clip-frames", type=int, default=100)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--warmup", type=int, default=DEFAULT_WARMUP)
    p.add_argument("--measured", type=int, default=DEFAULT_MEASURED)
    p.add_argument(
        "--naive-query-iterations",
        type=int,
        default=3,
        help="full naive queries are slow; 0 skips their timing section",
    )
    p.add_argument("--seed", type=int, default=0)
    _add_threads(p)
    _add_json(p)
    p.set_defaults(handler=_cmd_bench)

    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except KeyError as exc:
        print(f"termscope: error: missing field {exc}", file=sys.stderr)
        return 2
    except (TermscopeError, OSError, ValueError) as exc:
        print(f"termscope: error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
