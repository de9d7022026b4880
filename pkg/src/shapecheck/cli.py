"""Command-line checker: a thin client over the library.

Exit codes: 0 all runs clean, 1 a shape error was diagnosed, 2 the input
could not be parsed.  Text-mode diagnostics go to stderr; ``--format json``
writes one machine-readable report object to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .checker import TraceEvent, check, report_to_json
from .ir import IRError, parse_ir
from .oracle import concrete_run


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _cmd_check(args: argparse.Namespace) -> int:
    try:
        ir = parse_ir(_read(args.file))
    except (IRError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    trace: list[TraceEvent] = []
    sink = trace.append if args.trace else None
    report = check(ir, max_iterations=args.max_iterations, sink=sink)

    if args.format == "json":
        print(json.dumps(report_to_json(report, trace), indent=2))
        return report.exit_code

    if args.trace:
        for e in trace:
            print(f"run {e.run_index} iteration {e.iteration}: {e.node_id} -> {e.shape}")
    for v in report.verdicts:
        if v.diagnostic is not None:
            print(f"shape error: {v.diagnostic.message}", file=sys.stderr)
    if report.ok:
        print("no error detected")
    return report.exit_code


def _cmd_corpus(args: argparse.Namespace) -> int:
    try:
        cases = corpus_mod.load_cases(args.dir)
        report = corpus_mod.run_corpus(cases)
    except (IRError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.format == "json":
        print(json.dumps(corpus_mod.report_to_json(report), indent=2))
        return 0 if report.ok else 1

    for r in report.results:
        bits = []
        if r.detected is None:
            bits.append("control")
        else:
            bits.append("detected" if r.detected else "MISSED")
        bits.append("clean" if not r.false_positive else "FALSE POSITIVE")
        if r.node_matches is False:
            bits.append("wrong node")
        if r.iteration_matches is False:
            bits.append("wrong iteration")
        print(f"{r.name:24s} {' / '.join(bits):32s} {r.seconds * 1000:8.2f} ms")
    print(f"recall {report.detected_total}/{report.buggy_total}"
          f"  false positives {report.false_positives}"
          f"  precision {report.precision:.2f}")
    return 0 if report.ok else 1


def _cmd_oracle(args: argparse.Namespace) -> int:
    try:
        ir = parse_ir(_read(args.file))
    except (IRError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    shapes: list[tuple[int, int, str, tuple[int, ...]]] = []
    report = concrete_run(ir, seed=args.seed,
                          sink=lambda r, i, n, s: shapes.append((r, i, n, s)))
    if args.trace:
        for r, i, n, s in shapes:
            print(f"run {r} iteration {i}: {n} -> {list(s)}")
    err = report.first_error
    if err is not None:
        print(f"concrete shape error: node {err.node_id!r} ({err.op}) at iteration "
              f"{err.iteration}: {err.message}", file=sys.stderr)
        return 1
    print("no error detected")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapecheck",
        description="Check tensor dataflow graph IR files for shape errors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="check one IR file")
    p_check.add_argument("file")
    p_check.add_argument("--format", choices=["text", "json"], default="text")
    p_check.add_argument("--trace", action="store_true",
                         help="print every node's computed shape in evaluation order")
    p_check.add_argument("--max-iterations", type=int, default=None, metavar="N")
    p_check.set_defaults(fn=_cmd_check)

    p_corpus = sub.add_parser("corpus", help="run a buggy/fixed corpus directory")
    p_corpus.add_argument("dir")
    p_corpus.add_argument("--format", choices=["text", "json"], default="text")
    p_corpus.set_defaults(fn=_cmd_corpus)

    p_oracle = sub.add_parser("oracle", help="run the concrete reference interpreter")
    p_oracle.add_argument("file")
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--trace", action="store_true")
    p_oracle.set_defaults(fn=_cmd_oracle)

    p_serve = sub.add_parser("serve", help="start the HTTP checking service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
