"""Rational recognition of high-precision floats via continued fractions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import mpmath
from mpmath import mp


@dataclass(frozen=True)
class RecognizedRational:
    num: int
    den: int
    residual: mpmath.mpf

    def __post_init__(self):
        if self.den <= 0 or gcd(self.num, self.den) != 1:
            raise ValueError(f"{self.num}/{self.den} is not in lowest terms")

    @property
    def height(self) -> int:
        return max(abs(self.num), self.den)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self):
        return f"{self.num}/{self.den}" if self.den != 1 else str(self.num)


def mpf_to_fraction(x) -> Fraction:
    """Exact binary value of an mpf (or anything mpmath can convert)."""
    x = mpmath.mpf(x)
    if not mpmath.isfinite(x):
        raise ValueError(f"cannot convert {x} to a fraction")
    # man_exp carries no sign
    man, exp = x.man_exp
    sign = -1 if x < 0 else 1
    if exp >= 0:
        return Fraction(sign * (int(man) << exp))
    return Fraction(sign * int(man), 1 << -exp)


def convergents(x: Fraction):
    """Yield the continued-fraction convergents p/q of an exact rational."""
    p0, q0, p1, q1 = 0, 1, 1, 0
    num, den = x.numerator, x.denominator
    while den:
        a, r = divmod(num, den)
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        yield p1, q1
        num, den = den, r


def default_tol(prec: int):
    return mpmath.mpf(10) ** (-(prec // 2))


def recognize_rational(x, max_height: int = 10**6, tol=None) -> RecognizedRational | None:
    """First convergent p/q of x with q <= max_height and |x - p/q| < tol.

    Returns None when no convergent qualifies. The denominator bound is what
    cuts the enumeration off; ``height`` on the result is max(|p|, q).
    """
    if tol is None:
        tol = default_tol(mp.dps)
    tol = mpmath.mpf(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = mpmath.mpf(x)
    exact = mpf_to_fraction(x)
    for p, q in convergents(exact):
        if q > max_height:
            return None
        residual = abs(x - mpmath.mpf(p) / q)
        if residual < tol:
            return RecognizedRational(p, q, residual)
    return None


def digits_agreement(a, b, cap: int | None = None) -> int:
    """Number of matching significant digits between a and b.

    floor(-log10(|a - b| / max(|b|, 1e-300))), capped at ``cap`` (working
    precision by default) when the difference vanishes.
    """
    if cap is None:
        cap = mp.dps
    a = mpmath.mpmathify(a)
    b = mpmath.mpmathify(b)
    diff = abs(a - b)
    if diff == 0:
        return cap
    scale = max(abs(b), mpmath.mpf("1e-300"))
    # slack absorbs binary rounding of decimal inputs such as 1.0000001
    return min(cap, int(mpmath.floor(-mpmath.log10(diff / scale) + mpmath.mpf("1e-6"))))
