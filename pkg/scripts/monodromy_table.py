"""Monodromy of AESZ34 around each finite singular point, in the integral basis.

The canonical-basis matrices are conjugated by S (k = 1) and rationalised.
With base -1/50 the loops multiply, in the order 0, 1/25, 1/9, 1, to the loop
around all four points; the script checks that as well.

    python3 scripts/monodromy_table.py [--precision 30] [--no-product]
"""

from __future__ import annotations

import argparse

import mpmath

from periodlab.continuation import monodromy, rationalize_matrix
from periodlab.mirror import MirrorData, build_S
from periodlab.numeric import GUARD_DIGITS, parse_point
from periodlab.pipeline import data_path
from periodlab.pf_core import load_operator

CENTERS = ("0", "1/25", "1/9", "1")


def show(name, rows):
    print(name)
    for r in rows:
        print("   " + " ".join(f"{str(x):>5}" for x in r))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--precision", type=int, default=30)
    ap.add_argument("--base", default="-1/50")
    ap.add_argument("--no-product", action="store_true", help="skip the slow loop around all points")
    args = ap.parse_args()

    op = load_operator(data_path("aesz34.op"))
    prec = args.precision
    with mpmath.workdps(prec + GUARD_DIGITS):
        base = parse_point(args.base)
        s = build_S(MirrorData.aesz34(1)).matrix()
        s_inv = mpmath.inverse(s)
        tol = mpmath.mpf(10) ** -(prec // 2)
        mats = {}
        for c in CENTERS:
            m = monodromy(op, base, parse_point(c), prec).matrix
            mats[c] = m
            integral, residual = rationalize_matrix(s * m * s_inv, tol)
            if integral is None:
                print(f"around {c}: not rational in the integral basis")
            else:
                show(f"around {c} (residual {mpmath.nstr(residual, 3)})", integral)

        if not args.no_product:
            ring = [2 * mpmath.expjpi(1 + mpmath.mpf(k) / 12) for k in range(1, 24)]
            big = [base, parse_point("-2"), *ring, parse_point("-2"), base]
            m_big = monodromy(op, base, parse_point("0"), prec, loop=big).matrix
            prod = mats["0"] * mats["1/25"] * mats["1/9"] * mats["1"]
            print("|M_0 M_1/25 M_1/9 M_1 - M_big| =", mpmath.nstr(mpmath.mnorm(prod - m_big, 1), 3))


if __name__ == "__main__":
    main()
