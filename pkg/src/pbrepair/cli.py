"""Command-line entry points.

    pbrepair <file> --region L1[..L2] [--width W] [--unroll K]
             [--max-iters N] [--report out.json] [--emit repaired.prog]
             [--trace]
    pbrepair bench <file> [--width W] [--unroll K] [--max-iters N]
             [--report out.json] [--trace]

Exit codes: 0 repaired, 2 unrealizable, 3 region not on the failing path,
4 unroll bound reached, 5 BDD resource limit, 1 usage or frontend errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import driver, lang


def _parse_region(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
    else:
        lo = hi = text
    try:
        start, end = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"region must be LINE or LINE..LINE, got {text!r}")
    return start, end


def _common_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--width", type=int, default=2,
                    help="global bit width of all variables (default 2)")
    ap.add_argument("--unroll", type=int, default=8, metavar="K",
                    help="loop unroll bound (default 8)")
    ap.add_argument("--max-iters", type=int, default=64, metavar="N",
                    help="internal safety cap on repair iterations (default 64)")
    ap.add_argument("--report", metavar="OUT.JSON",
                    help="write a JSON report to this path")
    ap.add_argument("--trace", action="store_true",
                    help="stream annotated counterexample listings")


def _load(path: str, width: int) -> lang.Program:
    with open(path, "r", encoding="utf-8") as fh:
        return lang.parse(fh.read(), width)


def _run_repair(args: argparse.Namespace) -> int:
    program = _load(args.file, args.width)
    start, end = args.region
    trace = (lambda s: print(s, end="")) if args.trace else None
    report = driver.pbrepair(program, start, end, args.unroll,
                             args.max_iters, trace)

    print(f"outcome: {report.outcome}")
    if report.iterations:
        print(f"iterations: {len(report.iterations)} "
              f"({report.paths_summary()})")
    if report.detail:
        print(report.detail)
    if report.outcome == driver.OUTCOME_REPAIRED:
        if args.emit:
            with open(args.emit, "w", encoding="utf-8") as fh:
                fh.write(report.program)
            print(f"repaired program written to {args.emit}")
        else:
            print(report.program, end="")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    return report.exit_code


def _run_bench(args: argparse.Namespace) -> int:
    program = _load(args.file, args.width)
    trace = (lambda s: print(s, end="")) if args.trace else None
    rows = driver.bench(program, args.unroll, args.max_iters, trace)
    print(driver.bench_table(rows), end="")
    if args.report:
        payload = [row.to_dict() for row in rows]
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    failed = [row for row in rows
              if row.report.outcome != driver.OUTCOME_REPAIRED]
    return 0 if not failed else failed[0].report.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)

    if argv and argv[0] == "bench":
        ap = argparse.ArgumentParser(prog="pbrepair bench",
                                     description="seed faults and repair each")
        ap.add_argument("file", help="program source file")
        _common_flags(ap)
        args = ap.parse_args(argv[1:])
        runner = _run_bench
    else:
        ap = argparse.ArgumentParser(
            prog="pbrepair",
            description="path-based repair of a designated fault region")
        ap.add_argument("file", help="program source file")
        ap.add_argument("--region", type=_parse_region, required=True,
                        metavar="L1[..L2]",
                        help="fault region as statement line(s)")
        ap.add_argument("--emit", metavar="OUT.PROG",
                        help="write the repaired program to this path")
        _common_flags(ap)
        args = ap.parse_args(argv)
        runner = _run_repair

    try:
        return runner(args)
    except (lang.LangError, driver.InputSpaceTooLargeError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
