"""Picard-Fuchs operators in theta-form and their Frobenius basis at a MUM point.

An operator is stored as an integer table ``C[i][j]``, the coefficient of
``phi**i * theta**j`` with ``theta = phi d/dphi``. At the MUM point phi=0 the
four canonical solutions are

    w0 = f0
    w1 = (f0 L + f1) / (2 pi i)
    w2 = (f0 L^2 + 2 f1 L + f2) / (2 pi i)^2
    w3 = (f0 L^3 + 3 f1 L^2 + 3 f2 L + f3) / (2 pi i)^3

with L = log(phi), f0(0) = 1 and f1(0) = f2(0) = f3(0) = 0. The power series
f_j are the j-th epsilon-derivatives at epsilon=0 of the formal solution
sum_n a_n(epsilon) phi^(n+epsilon) normalised by a_0 = 1.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import mpmath
from mpmath import mp

from .errors import NotMUMError, OutOfDiscError, ParseError, PrecisionError, UnsupportedOrderError
from .numeric import frac_to_mpf, to_mpc, two_pi_i

ORDER = 4
INFINITY = math.inf


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Operator:
    name: str
    variable: str
    coeffs: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(c) for c in row) for row in self.coeffs)
        if not rows:
            raise UnsupportedOrderError("operator has no coefficients")
        if any(len(row) != ORDER + 1 for row in rows):
            raise UnsupportedOrderError("every row must hold theta-powers 0..4")
        if all(row[ORDER] == 0 for row in rows):
            raise UnsupportedOrderError("theta-order is below 4")
        if rows[0][ORDER] == 0:
            raise NotMUMError("coefficient of theta^4 at phi^0 vanishes; phi=0 cannot be MUM")
        while len(rows) > 1 and not any(rows[-1]):
            rows = rows[:-1]
        object.__setattr__(self, "coeffs", rows)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def theta_poly(self, i: int) -> tuple[int, ...]:
        """P_i(x) = sum_j C[i][j] x^j (the phi^i slice), ascending coefficients."""
        return self.coeffs[i]

    def leading(self) -> tuple[int, ...]:
        """R_4(phi): coefficient of theta^4 as a polynomial in phi."""
        return tuple(row[ORDER] for row in self.coeffs)

    def apply_to_monomial(self, m: int) -> dict[int, int]:
        """theta-form action on phi^m, as {power: coefficient}."""
        out = {}
        for i, row in enumerate(self.coeffs):
            c = sum(cj * m**j for j, cj in enumerate(row))
            if c:
                out[m + i] = c
        return out


@dataclass(frozen=True)
class DOperator:
    """Same operator written as sum_j P_j(phi) (d/dphi)^j."""

    coeffs: tuple[tuple[int, ...], ...]

    def apply_to_monomial(self, m: int) -> dict[int, int]:
        out: dict[int, int] = {}
        for j, poly in enumerate(self.coeffs):
            falling = math.prod(range(m - j + 1, m + 1)) if j <= m else 0
            if not falling:
                continue
            for e, c in enumerate(poly):
                if c:
                    out[m - j + e] = out.get(m - j + e, 0) + c * falling
        return {k: v for k, v in out.items() if v}


def stirling2(n: int, k: int) -> int:
    return _stirling2(n, k)


@functools.lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


def theta_to_d(op: Operator) -> DOperator:
    """Rewrite theta^k = sum_j S(k, j) phi^j (d/dphi)^j."""
    deg = op.degree + ORDER
    polys = []
    for j in range(ORDER + 1):
        poly = [0] * (deg + 1)
        for i, row in enumerate(op.coeffs):
            for k, c in enumerate(row):
                if c:
                    poly[i + j] += c * stirling2(k, j)
        polys.append(tuple(poly))
    return DOperator(tuple(polys))


# ---------------------------------------------------------------------------
# Operator files
# ---------------------------------------------------------------------------


def parse_operator(text: str) -> Operator:
    name = variable = None
    entries: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        if key == "name":
            if len(parts) != 2:
                raise ParseError("expected 'name <label>'", lineno)
            name = parts[1]
        elif key == "variable":
            if len(parts) != 2:
                raise ParseError("expected 'variable <symbol>'", lineno)
            variable = parts[1]
        elif key == "c":
            if len(parts) != 4:
                raise ParseError("expected 'c <i> <j> <integer>'", lineno)
            try:
                i, j, value = (int(p) for p in parts[1:])
            except ValueError:
                raise ParseError(f"non-integer field in {line!r}", lineno) from None
            if i < 0 or j < 0:
                raise ParseError("negative index", lineno)
            if j > ORDER:
                raise UnsupportedOrderError(f"line {lineno}: theta-power {j} exceeds 4")
            if (i, j) in entries:
                raise ParseError(f"duplicate entry c {i} {j}", lineno)
            entries[(i, j)] = value
        else:
            raise ParseError(f"unknown directive {key!r}", lineno)
    if name is None or variable is None:
        raise ParseError("missing 'name' or 'variable' line")
    if not any(j == ORDER and v for (i, j), v in entries.items()):
        raise UnsupportedOrderError("theta-order is not 4")
    rows = max(i for i, _ in entries) + 1
    table = [[0] * (ORDER + 1) for _ in range(rows)]
    for (i, j), v in entries.items():
        table[i][j] = v
    return Operator(name, variable, tuple(tuple(r) for r in table))


def serialize_operator(op: Operator) -> str:
    lines = [f"name {op.name}", f"variable {op.variable}"]
    for i, row in enumerate(op.coeffs):
        for j, c in enumerate(row):
            if c:
                lines.append(f"c {i} {j} {c}")
    return "\n".join(lines) + "\n"


def load_operator(path) -> Operator:
    with open(path, encoding="utf-8") as fh:
        return parse_operator(fh.read())


# ---------------------------------------------------------------------------
# Singular points
# ---------------------------------------------------------------------------


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _poly_eval(poly, x):
    acc = 0
    for c in reversed(poly):
        acc = acc * x + c
    return acc


def _deflate(poly: list, root: Fraction) -> list:
    # synthetic division of ascending-coefficient poly by (x - root)
    desc = list(reversed(poly))
    out = [desc[0]]
    for c in desc[1:-1]:
        out.append(c + out[-1] * root)
    return list(reversed(out))


def _rational_roots(poly: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Split off all rational roots; returns (roots, deflated polynomial)."""
    roots = []
    while len(poly) > 1:
        scale = math.lcm(*(c.denominator for c in poly))
        ints = [int(c * scale) for c in poly]
        candidates = (
            sign * Fraction(p, q)
            for p in _divisors(ints[0])
            for q in _divisors(ints[-1])
            for sign in (1, -1)
        )
        root = next((c for c in candidates if _poly_eval(poly, c) == 0), None)
        if root is None:
            break
        roots.append(root)
        poly = _deflate(poly, root)
    return roots, poly


def singular_points(op: Operator) -> list:
    """0, the roots of R_4, and infinity.

    Rational roots come back as exact Fractions. Any remaining roots are
    returned as mpc approximations at the current working precision.
    """
    poly = [Fraction(c) for c in op.leading()]
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    rational, poly = _rational_roots(poly)
    points: list = [Fraction(0)] + sorted(set(rational))
    if len(poly) > 1:
        desc = [frac_to_mpf(c) for c in reversed(poly)]
        roots = mpmath.polyroots(desc, maxsteps=200, extraprec=2 * mp.prec)
        points += sorted((mpmath.mpc(r) for r in roots), key=lambda z: (z.real, z.imag))
    points.append(INFINITY)
    return points


def finite_singular_points(op: Operator) -> list[mpmath.mpc]:
    return [to_mpc(p) for p in singular_points(op) if p is not INFINITY]


def convergence_radius(op: Operator) -> mpmath.mpf:
    """Distance from 0 to the nearest other finite singularity."""
    others = [abs(p) for p in finite_singular_points(op) if p != 0]
    return min(others) if others else mpmath.inf


# ---------------------------------------------------------------------------
# Frobenius basis at phi = 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchedPoint:
    """A point together with the chosen value of log(phi)."""

    value: mpmath.mpc
    log_value: mpmath.mpc

    @classmethod
    def principal(cls, value) -> "BranchedPoint":
        """Principal branch, so log(-x) = ln(x) + i*pi for x > 0."""
        z = to_mpc(value)
        return cls(z, mpmath.log(z))

    def check(self, tol=None) -> bool:
        tol = tol if tol is not None else mpmath.mpf(10) ** (-(mp.dps - 5))
        return abs(mpmath.exp(self.log_value) - self.value) <= tol * max(1, abs(self.value))


@dataclass(frozen=True)
class StateMatrix:
    """Rows are solutions, columns are d/dphi derivative orders 0..3."""

    at: BranchedPoint
    entries: tuple[tuple[mpmath.mpc, ...], ...]
    precision: int

    @classmethod
    def from_matrix(cls, at: BranchedPoint, m, precision: int) -> "StateMatrix":
        return cls(at, tuple(tuple(m[i, j] for j in range(m.cols)) for i in range(m.rows)), precision)

    def matrix(self) -> mpmath.matrix:
        return mpmath.matrix([list(r) for r in self.entries])

    def det(self):
        return mpmath.det(self.matrix())

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]


@dataclass(frozen=True)
class CanonicalBasis:
    op: Operator
    truncation_order: int
    f: tuple[tuple[Fraction, ...], ...]
    _floats: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def tail_bound(self, r) -> mpmath.mpf:
        """Crude bound on the truncation error of values and derivatives at |phi| = r."""
        r = mpmath.mpf(r)
        rho = convergence_radius(self.op)
        if r >= rho:
            return mpmath.inf
        n = self.truncation_order
        last = max(abs(frac_to_mpf(fj[n])) for fj in self.f) if n > 0 else mpmath.mpf(0)
        deriv = max(1, (n / r) ** 3) if r > 0 else 1
        logs = (1 + abs(mpmath.log(r)) + mpmath.pi) ** 3 if r > 0 else 1
        return last * r**n * deriv * logs / (1 - r / rho)

    def precision_hint(self, r) -> int:
        """Decimal digits this truncation supports at |phi| = r."""
        bound = self.tail_bound(r)
        if bound == 0:
            return mp.dps
        if not mpmath.isfinite(bound):
            return 0
        return max(0, int(-mpmath.log10(bound)))

    def float_coeffs(self):
        """f_j coefficients as mpf at the current precision (cached per precision)."""
        key = mp.prec
        if key not in self._floats:
            self._floats[key] = [[frac_to_mpf(c) for c in fj] for fj in self.f]
        return self._floats[key]


def _shifted_poly_series(row: tuple[int, ...], m: int) -> list[int]:
    """Coefficients in eps of sum_j row[j] (m + eps)^j, truncated at eps^3."""
    out = [0] * ORDER
    for j, c in enumerate(row):
        if c:
            for d in range(min(j, ORDER - 1) + 1):
                out[d] += c * comb(j, d) * m ** (j - d)
    return out


def check_mum(op: Operator) -> None:
    indicial = op.coeffs[0]
    if any(indicial[:ORDER]) or indicial[ORDER] == 0:
        raise NotMUMError(f"indicial polynomial at 0 is {indicial}, not c*rho^4")


@functools.lru_cache(maxsize=32)
def _epsilon_coefficients(op: Operator, n_max: int) -> tuple[tuple[Fraction, ...], ...]:
    check_mum(op)
    lead = op.coeffs[0][ORDER]
    a: list[list[Fraction]] = [[Fraction(1), Fraction(0), Fraction(0), Fraction(0)]]
    for n in range(1, n_max + 1):
        acc = [0, 0, 0, 0]
        for i in range(1, min(op.degree, n) + 1):
            p = _shifted_poly_series(op.coeffs[i], n - i)
            prev = a[n - i]
            for d in range(ORDER):
                s = 0
                for e in range(d + 1):
                    if p[e] and prev[d - e]:
                        s += p[e] * prev[d - e]
                acc[d] += s
        # 1/(n + eps)^4 = n^-4 * sum_d (-1)^d C(d+3, 3) (eps/n)^d
        inv = [Fraction((-1) ** d * comb(d + 3, 3), lead * n ** (4 + d)) for d in range(ORDER)]
        a.append([-sum(acc[e] * inv[d - e] for e in range(d + 1)) for d in range(ORDER)])
    return tuple(tuple(row) for row in a)


def frobenius_mum(op: Operator, N: int) -> CanonicalBasis:
    """Canonical Frobenius basis truncated at phi^N, exact rationals."""
    if N < 0:
        raise ValueError("truncation order must be non-negative")
    check_mum(op)
    a = _epsilon_coefficients(op, N)
    f = tuple(tuple(math.factorial(j) * a[n][j] for n in range(N + 1)) for j in range(ORDER))
    return CanonicalBasis(op, N, f)


def holomorphic_coefficient(n: int) -> int:
    """AESZ34 holomorphic period: sum over i+j+k+l+m=n of multinomial(n; i,j,k,l,m)^2."""
    total = 0
    for i in range(n + 1):
        ci = comb(n, i)
        for j in range(n - i + 1):
            cj = ci * comb(n - i, j)
            for k in range(n - i - j + 1):
                ck = cj * comb(n - i - j, k)
                rest = n - i - j - k
                for l in range(rest + 1):
                    total += (ck * comb(rest, l)) ** 2
    return total


def required_truncation(op: Operator, r, prec: int) -> CanonicalBasis:
    """Grow N until the tail bound at |phi| = r is below 10^-(prec+10)."""
    r = mpmath.mpf(r)
    rho = convergence_radius(op)
    if r >= rho:
        raise OutOfDiscError(f"|phi| = {mpmath.nstr(r, 8)} is outside the disc of radius {mpmath.nstr(rho, 8)}")
    target = mpmath.mpf(10) ** (-(prec + 10))
    if r == 0:
        return frobenius_mum(op, 8)
    n = int(mpmath.ceil((prec + 10) * mpmath.log(10) / mpmath.log(rho / r))) + 10
    n = max(n, 8)
    while True:
        basis = frobenius_mum(op, n)
        if basis.tail_bound(r) < target:
            return basis
        n = int(n * 1.2) + 5


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _series_mul(a, b):
    out = [0] * ORDER
    for i, x in enumerate(a):
        if x:
            for j in range(ORDER - i):
                out[i + j] += x * b[j]
    return out


def _series_values(coeffs, z):
    """[g(z), g'(z), g''(z)/2, g'''(z)/6] for g = sum coeffs[n] z^n."""
    out = [mpmath.mpc(0)] * ORDER
    n_max = len(coeffs) - 1
    # Horner on each Taylor coefficient: sum_n C(n, d) c_n z^(n-d)
    for d in range(ORDER):
        acc = mpmath.mpc(0)
        for n in range(n_max, d - 1, -1):
            acc = acc * z + comb(n, d) * coeffs[n]
        out[d] = acc
    return out


def eval_canonical(basis: CanonicalBasis, at: BranchedPoint, prec: int) -> StateMatrix:
    """Wronskian of w0..w3 at a point inside the convergence disc.

    The caller sets the working precision; ``prec`` is the accuracy the
    truncation is required to support.
    """
    z = at.value
    r = abs(z)
    rho = convergence_radius(basis.op)
    if r >= rho or z == 0:
        raise OutOfDiscError(
            f"phi = {mpmath.nstr(z, 8)} is outside the punctured disc 0 < |phi| < {mpmath.nstr(rho, 8)}"
        )
    if basis.tail_bound(r) >= mpmath.mpf(10) ** (-(prec + 10)):
        needed = required_truncation(basis.op, r, prec).truncation_order
        raise PrecisionError(
            f"truncation N={basis.truncation_order} is insufficient at |phi|={mpmath.nstr(r, 6)}; need N>={needed}",
            required=needed,
            achieved=basis.precision_hint(r),
        )
    g = [_series_values(fj, z) for fj in basis.float_coeffs()]
    logser = [at.log_value, 1 / z, -1 / (2 * z**2), 1 / (3 * z**3)]
    powers = [[mpmath.mpc(1), 0, 0, 0]]
    for _ in range(3):
        powers.append(_series_mul(powers[-1], logser))
    tpi = two_pi_i()
    rows = []
    for k in range(ORDER):
        acc = [mpmath.mpc(0)] * ORDER
        for m in range(k + 1):
            term = _series_mul(powers[m], g[k - m])
            acc = [x + comb(k, m) * y for x, y in zip(acc, term)]
        scale = tpi**k
        rows.append(tuple(math.factorial(d) * acc[d] / scale for d in range(ORDER)))
    return StateMatrix(at, tuple(rows), prec)


def canonical_state(op: Operator, at, prec: int) -> StateMatrix:
    """Evaluate the canonical Wronskian with an automatically chosen truncation."""
    point = at if isinstance(at, BranchedPoint) else BranchedPoint.principal(at)
    basis = required_truncation(op, abs(point.value), prec)
    return eval_canonical(basis, point, prec)


# ---------------------------------------------------------------------------
# Residual checks
# ---------------------------------------------------------------------------


def _theta_logseries(terms: list[list[Fraction]]) -> list[list[Fraction]]:
    """theta applied to sum_m L^m g_m, with g_m given as coefficient lists."""
    out = []
    for m, gm in enumerate(terms):
        new = [n * c for n, c in enumerate(gm)]
        if m + 1 < len(terms):
            nxt = terms[m + 1]
            new = [x + (m + 1) * y for x, y in zip(new, nxt)]
        out.append(new)
    return out


def apply_operator_logseries(op: Operator, terms: list[list[Fraction]]) -> list[list[Fraction]]:
    """op applied to sum_m L^m g_m; each g_m is truncated to the same length."""
    length = len(terms[0])
    result = [[Fraction(0)] * (length + op.degree) for _ in terms]
    powers = [terms]
    for _ in range(ORDER):
        powers.append(_theta_logseries(powers[-1]))
    for i, row in enumerate(op.coeffs):
        for j, c in enumerate(row):
            if not c:
                continue
            for m, gm in enumerate(powers[j]):
                for n, v in enumerate(gm):
                    if v:
                        result[m][n + i] += c * v
    return result


def canonical_logseries(basis: CanonicalBasis, k: int) -> list[list[Fraction]]:
    """The bracket of w_k as sum_m L^m g_m (the (2 pi i)^-k factor dropped)."""
    f = basis.f
    return [[comb(k, m) * c for c in f[k - m]] for m in range(k + 1)]


def residual_orders(basis: CanonicalBasis, k: int) -> list[int]:
    """Orders n at which op(truncated w_k) has a nonzero coefficient."""
    res = apply_operator_logseries(basis.op, canonical_logseries(basis, k))
    return sorted({n for gm in res for n, v in enumerate(gm) if v})
