"""Conversions between exact rationals and mpmath numbers, cached constants."""

from __future__ import annotations

import functools
from fractions import Fraction

import mpmath
from mpmath import mp

GUARD_DIGITS = 15


def frac_to_mpf(q) -> mpmath.mpf:
    if isinstance(q, Fraction):
        return mpmath.mpf(q.numerator) / q.denominator
    return mpmath.mpf(q)


def to_mpc(x) -> mpmath.mpc:
    """Convert Fraction, int, str ('p/q', decimal, 'a+b*i'), complex or mp number."""
    if isinstance(x, mpmath.mpc):
        return +x
    if isinstance(x, (Fraction, int)):
        return mpmath.mpc(frac_to_mpf(Fraction(x)))
    if isinstance(x, str):
        return parse_point(x)
    if isinstance(x, tuple) and len(x) == 2:
        return mpmath.mpc(frac_to_mpf(x[0]), frac_to_mpf(x[1]))
    return mpmath.mpc(x)


def parse_real(text: str) -> mpmath.mpf:
    text = text.strip()
    if "/" in text:
        return frac_to_mpf(Fraction(text))
    return mpmath.mpf(text)


def parse_point(text: str) -> mpmath.mpc:
    """Parse '-1/7', '0.25', 'i/30', '1/100+1/30*i', '-0.5-2i' at current precision."""
    s = text.replace(" ", "").replace("I", "i").replace("j", "i")
    if not s:
        raise ValueError("empty point")
    if "i" not in s:
        return mpmath.mpc(parse_real(s))
    # split at the last sign that is not leading and not after an exponent marker
    cut = None
    for k in range(len(s) - 1, 0, -1):
        if s[k] in "+-" and s[k - 1] not in "eE":
            cut = k
            break
    real_part, imag_part = ("0", s) if cut is None else (s[:cut], s[cut:])
    if "i" in real_part:
        real_part, imag_part = imag_part, real_part
    imag_part = imag_part.replace("*i", "").replace("i*", "")
    if imag_part.startswith("i/"):
        imag_part = "1/" + imag_part[2:]
    elif imag_part.startswith(("+i/", "-i/")):
        imag_part = imag_part[0] + "1/" + imag_part[3:]
    imag_part = imag_part.replace("i", "")
    if imag_part in ("", "+", "-"):
        imag_part += "1"
    return mpmath.mpc(parse_real(real_part), parse_real(imag_part))


def two_pi_i() -> mpmath.mpc:
    return _two_pi_i(mp.prec)


@functools.lru_cache(maxsize=None)
def _two_pi_i(prec: int) -> mpmath.mpc:
    with mpmath.workprec(prec):
        return mpmath.mpc(0, 2 * mpmath.pi)


def cmax_abs(values) -> mpmath.mpf:
    return max((abs(v) for v in values), default=mpmath.mpf(0))


def tolerance(prec: int, guard: int = GUARD_DIGITS) -> mpmath.mpf:
    """10**-(prec - guard): the agreement target used across the pipeline."""
    return mpmath.mpf(10) ** (-(prec - guard))
