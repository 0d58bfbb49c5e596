"""Command line entry point: ``llstar study`` and ``llstar verify``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import verify
from .study import StudyConfig, run_study


def _levels(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        return (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llstar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    st = sub.add_parser("study", help="run a uniform refinement study")
    st.add_argument("--case", choices=["i", "ii", "general"], required=True)
    st.add_argument("--p", type=int, required=True)
    st.add_argument("--levels", type=_levels, default=None, help="inclusive range LO..HI")
    st.add_argument("--out", type=Path, required=True, help="CSV path; JSON written alongside")
    st.add_argument("--quad-degree", type=int, default=None,
                    help="override the load / error quadrature degree")

    sub.add_parser("verify", help="run the invariant suite")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return verify.main()
        config = StudyConfig(
            case=args.case,
            p=args.p,
            levels=args.levels,
            quad_degree=args.quad_degree,
            output=args.out,
        )
        report = run_study(config)
    except Exception as exc:  # noqa: BLE001 - any failure maps to exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(report.to_csv())
    for name, check in report.band_checks().items():
        status = "PASS" if check["passed"] else "FAIL"
        print(f"[{status}] rate_{name} = {check['rate']} in {check['band']}")
    return 0 if report.passed else 2


if __name__ == "__main__":
    sys.exit(main())
