"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data/setup error (unknown
encoder, missing input directory, or every file in a batch failing).
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import AdapterError
from .extract import extract_directory, verify_manifest


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> _Parser:
    parser = _Parser(prog="encoder-adapter", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("extract", help="encode a directory of WAV files")
    p.add_argument("--encoder", default="logmel", help='"logmel" or "whisper:<model>"')
    p.add_argument("--in", dest="in_dir", required=True, help="directory of *.wav")
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--kind", choices=("utterance", "clip"), default="utterance")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("verify", help="re-read and validate a manifest's files")
    p.add_argument("--manifest", required=True)
    p.add_argument("--json", action="store_true")

    return parser


def _cmd_extract(args) -> int:
    report = extract_directory(
        args.in_dir,
        args.out_dir,
        encoder=args.encoder,
        kind=args.kind,
        workers=args.workers,
    )
    if args.json:
        print(json.dumps(report, ensure_ascii=False, sort_keys=True))
    else:
        print(f"encoded {report['completed']}/{report['total']} files "
              f"(dim {report['dim']}) -> {report['manifest_path']}")
        for failure in report["failed"]:
            print(f"  failed {failure['file']}: {failure['error']}", file=sys.stderr)
    if report["total"] > 0 and report["completed"] == 0:
        print("error: all input files failed", file=sys.stderr)
        return 2
    return 0


def _cmd_verify(args) -> int:
    report = verify_manifest(args.manifest)
    if args.json:
        print(json.dumps(report, ensure_ascii=False, sort_keys=True))
    else:
        print(f"verified {report['passed']}/{report['total']} entries")
        for failure in report["failed"]:
            print(f"  {failure['id']}: {failure['error']}", file=sys.stderr)
    return 0 if not report["failed"] else 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a command is required")
    try:
        if args.command == "extract":
            return _cmd_extract(args)
        return _cmd_verify(args)
    except (AdapterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
