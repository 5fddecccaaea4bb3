"""Prepotential data and the transition matrix S from canonical to integral periods."""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import mpmath
from mpmath import mp

from .errors import ParseError
from .numeric import frac_to_mpf, two_pi_i
from .pf_core import BranchedPoint, CanonicalBasis, eval_canonical


def zeta3(prec: int) -> mpmath.mpf:
    """zeta(3) from Apery's alternating series 5/2 sum (-1)^(n+1) / (n^3 C(2n, n))."""
    return +_zeta3_apery(prec)


@functools.lru_cache(maxsize=None)
def _zeta3_apery(prec: int) -> mpmath.mpf:
    with mpmath.workdps(prec + 10):
        eps = mpmath.mpf(10) ** (-(prec + 8))
        total = mpmath.mpf(0)
        n = 1
        while True:
            term = mpmath.mpf(1) / (n**3 * comb(2 * n, n))
            total += term if n % 2 else -term
            if term < eps:
                break
            n += 1
        return total * 5 / 2


def zeta3_partial_sums(n_terms: int) -> list[mpmath.mpf]:
    """Partial sums of the Apery series; consecutive sums bracket zeta(3)."""
    sums = []
    total = mpmath.mpf(0)
    for n in range(1, n_terms + 1):
        term = mpmath.mpf(5) / (2 * n**3 * comb(2 * n, n))
        total += term if n % 2 else -term
        sums.append(total)
    return sums


def zeta3_amdeberhan(prec: int) -> mpmath.mpf:
    """Independent series: 1/64 sum (-1)^n (n!)^10 (205n^2+250n+77) / ((2n+1)!)^5."""
    with mpmath.workdps(prec + 10):
        eps = mpmath.mpf(10) ** (-(prec + 8))
        total = mpmath.mpf(0)
        n = 0
        while True:
            term = mpmath.mpf(factorial(n) ** 10 * (205 * n * n + 250 * n + 77)) / factorial(2 * n + 1) ** 5
            total += term if n % 2 == 0 else -term
            if term < eps:
                break
            n += 1
        return total / 64


def y000_from_euler(chi: int, prec: int | None = None) -> mpmath.mpc:
    """-3 chi zeta(3) / (2 pi i)^3, with (2 pi i)^3 = -8 pi^3 i."""
    prec = prec or mp.dps
    return -3 * chi * zeta3(prec) / two_pi_i() ** 3


@dataclass(frozen=True)
class MirrorData:
    """Prepotential coefficients.

    Y000 is kept symbolically as ``y000_rational + y000_zeta * zeta(3)/(2 pi i)^3``.
    """

    Y111: int
    Y011: Fraction
    Y001: Fraction
    y000_rational: Fraction = Fraction(0)
    y000_zeta: Fraction = Fraction(0)
    lam: Fraction = Fraction(1)
    k: int | None = None
    euler: int | None = None

    def __post_init__(self):
        if int(self.Y111) != self.Y111 or self.Y111 <= 0:
            raise ValueError("Y111 must be a positive integer")
        if self.lam == 0:
            raise ValueError("lambda must be nonzero")
        for name in ("Y011", "Y001", "y000_rational", "y000_zeta", "lam"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.euler is not None and self.y000_zeta == 0 and self.y000_rational == 0:
            object.__setattr__(self, "y000_zeta", Fraction(-3 * self.euler))

    @classmethod
    def aesz34(cls, k: int, lam=1) -> "MirrorData":
        return cls(12 * k, Fraction(0), Fraction(-k), Fraction(0), Fraction(24 * k), Fraction(lam), k)

    def Y000(self, prec: int | None = None) -> mpmath.mpc:
        prec = prec or mp.dps
        return frac_to_mpf(self.y000_rational) + frac_to_mpf(self.y000_zeta) * zeta3(prec) / two_pi_i() ** 3

    def with_lambda(self, lam) -> "MirrorData":
        return MirrorData(self.Y111, self.Y011, self.Y001, self.y000_rational, self.y000_zeta, Fraction(lam), self.k, self.euler)


@dataclass(frozen=True)
class SMatrix:
    entries: tuple[tuple[mpmath.mpc, ...], ...]
    lambda_used: Fraction

    def matrix(self) -> mpmath.matrix:
        return mpmath.matrix([list(r) for r in self.entries])


def build_S(md: MirrorData, prec: int | None = None) -> SMatrix:
    prec = prec or mp.dps
    if md.lam == 0:
        raise ValueError("lambda must be nonzero")
    f = frac_to_mpf
    rows = [
        [-md.Y000(prec) / 3, -f(md.Y001) / 2, 0, f(Fraction(md.Y111, 6))],
        [-f(md.Y001) / 2, -f(md.Y011), -f(Fraction(md.Y111, 2)), 0],
        [1, 0, 0, 0],
        [0, 1, 0, 0],
    ]
    scale = f(md.lam) * two_pi_i() ** 3
    return SMatrix(tuple(tuple(scale * mpmath.mpc(x) for x in row) for row in rows), md.lam)


def mirror_map(basis: CanonicalBasis, at: BranchedPoint, prec: int | None = None) -> mpmath.mpc:
    """t_c = w1 / w0 on the branch carried by ``at``."""
    prec = prec or mp.dps
    w = eval_canonical(basis, at, prec)
    if w[0, 0] == 0:
        raise ZeroDivisionError("w0 vanishes at this point")
    return w[1, 0] / w[0, 0]


# ---------------------------------------------------------------------------
# Mirror-data files
# ---------------------------------------------------------------------------

_Y000_RE = re.compile(
    r"^(?:(?P<rat>[+-]?\d+(?:/\d+)?)|(?P<zc>[+-]?\d+(?:/\d+)?)\*zeta3/\(2\*pi\*i\)\^3)$"
)


def _parse_y000(text: str, lineno: int) -> tuple[Fraction, Fraction]:
    m = _Y000_RE.match(text.replace(" ", ""))
    if not m:
        raise ParseError(f"Y000 must be '<rational>' or '<rational>*zeta3/(2*pi*i)^3', got {text!r}", lineno)
    if m.group("rat") is not None:
        return Fraction(m.group("rat")), Fraction(0)
    return Fraction(0), Fraction(m.group("zc"))


def parse_mirror(text: str) -> MirrorData:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if not rest:
            raise ParseError(f"missing value for {key!r}", lineno)
        try:
            if key == "Y000":
                values["y000"] = _parse_y000(rest, lineno)
            elif key in ("Y111", "k", "euler"):
                values[key] = int(rest)
            elif key in ("Y011", "Y001", "lambda"):
                values[key] = Fraction(rest)
            else:
                raise ParseError(f"unknown key {key!r}", lineno)
        except ValueError:
            raise ParseError(f"bad value {rest!r} for {key}", lineno) from None
    for required in ("Y111", "Y011", "Y001"):
        if required not in values:
            raise ParseError(f"missing {required}")
    if "y000" not in values and "euler" not in values:
        raise ParseError("need Y000 or euler")
    y_rat, y_zeta = values.get("y000", (Fraction(0), Fraction(0)))
    return MirrorData(
        values["Y111"],
        values["Y011"],
        values["Y001"],
        y_rat,
        y_zeta,
        values.get("lambda", Fraction(1)),
        values.get("k"),
        values.get("euler"),
    )


def load_mirror(path) -> MirrorData:
    with open(path, encoding="utf-8") as fh:
        return parse_mirror(fh.read())


def serialize_mirror(md: MirrorData) -> str:
    lines = [f"Y111 {md.Y111}", f"Y011 {md.Y011}", f"Y001 {md.Y001}"]
    if md.y000_zeta:
        lines.append(f"Y000 {md.y000_zeta}*zeta3/(2*pi*i)^3")
    else:
        lines.append(f"Y000 {md.y000_rational}")
    lines.append(f"lambda {md.lam}")
    if md.k is not None:
        lines.append(f"k {md.k}")
    return "\n".join(lines) + "\n"
