"""Run the end-to-end check at several precisions and tabulate the ratios.

    python3 scripts/precision_ladder.py [--k 1] 50 80 120
"""

from __future__ import annotations

import argparse
import time

import mpmath

from periodlab.pipeline import RunConfig, run_verification


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("precisions", nargs="*", type=int, default=[50, 80, 120])
    ap.add_argument("--k", type=int, default=1)
    args = ap.parse_args()

    print(f"{'prec':>5} {'secs':>6}  {'c+ ratio':<10} {'digits':>6}  {'c- ratio':<10} {'digits':>6}  literal c- ratio")
    for prec in args.precisions:
        start = time.perf_counter()
        report = run_verification(RunConfig(precision=prec, k=args.k, offline=True))
        secs = time.perf_counter() - start
        d = report.digits_agreement
        literal = report.provenance["ratio_minus_literal"]
        print(
            f"{prec:>5} {secs:6.1f}  {str(report.recognized_plus):<10} {d.get('ratio_plus', '-'):>6}  "
            f"{str(report.recognized_minus):<10} {d.get('ratio_minus', '-'):>6}  {mpmath.nstr(literal.real, 12)}"
        )


if __name__ == "__main__":
    main()
