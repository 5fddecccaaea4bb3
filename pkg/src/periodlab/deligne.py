"""F_infinity, its eigenspaces and Deligne's periods c+ / c- for rank-4 CY3 motives.

Cohomology classes are integer 4-vectors in the basis (beta0, beta1, alpha0,
alpha1). The coefficients of Omega^(n) in that basis are S * W[:, n], and
cup products are evaluated with the Gram matrix of the basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp

from .errors import InconsistencyError, InsufficientDataError, NonInvolutionError
from .mirror import SMatrix, zeta3
from .numeric import two_pi_i
from .pf_core import StateMatrix
from .recognition import RecognizedRational, recognize_rational

# integral of b_a cup b_b for b = (beta0, beta1, alpha0, alpha1)
GRAM = ((0, 0, -1, 0), (0, 0, 0, -1), (1, 0, 0, 0), (0, 1, 0, 0))


@dataclass(frozen=True)
class GramMatrix:
    entries: tuple[tuple[int, ...], ...] = GRAM

    def matrix(self) -> mpmath.matrix:
        return mpmath.matrix([list(r) for r in self.entries])

    def is_antisymmetric(self) -> bool:
        e = self.entries
        return all(e[i][j] == -e[j][i] for i in range(4) for j in range(4))

    def det(self) -> int:
        return round(mpmath.det(self.matrix()))


def gram_matrix() -> GramMatrix:
    return GramMatrix()


@dataclass(frozen=True)
class Involution:
    float_entries: mpmath.matrix
    rational_entries: tuple[tuple[Fraction, ...], ...] | None
    residual: mpmath.mpf

    @property
    def rationalized(self) -> bool:
        return self.rational_entries is not None

    def integer_rows(self) -> list[list[int]] | None:
        if self.rational_entries is None or any(x.denominator != 1 for r in self.rational_entries for x in r):
            return None
        return [[int(x) for x in r] for r in self.rational_entries]


def _matmul_exact(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))) for i in range(len(a)))


def _identity(n):
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def conj_matrix(m: mpmath.matrix) -> mpmath.matrix:
    return m.apply(mpmath.conj)


def f_infinity(S: SMatrix, W: StateMatrix, max_height: int = 10**6, tol=None) -> Involution:
    """F = S W conj(W)^-1 conj(S)^-1, rationalised entry-wise."""
    if tol is None:
        tol = mpmath.mpf(10) ** (-(W.precision // 2))
    s = S.matrix()
    w = W.matrix()
    if mpmath.det(w) == 0:
        raise ZeroDivisionError("Wronskian is singular")
    f = s * w * mpmath.inverse(conj_matrix(w)) * mpmath.inverse(conj_matrix(s))
    rows = []
    residual = mpmath.mpf(0)
    for i in range(4):
        row = []
        for j in range(4):
            z = mpmath.mpc(f[i, j])
            r = recognize_rational(z.real, max_height, tol) if abs(z.imag) < tol else None
            if r is None:
                return Involution(f, None, mpmath.inf)
            residual = max(residual, abs(z - mpmath.mpf(r.num) / r.den))
            row.append(r.fraction)
        rows.append(tuple(row))
    rational = tuple(rows)
    if _matmul_exact(rational, rational) != _identity(4):
        raise InconsistencyError("rationalised F_infinity does not square to the identity (wrong branch or path?)")
    return Involution(f, rational, residual)


# ---------------------------------------------------------------------------
# Eigenspaces
# ---------------------------------------------------------------------------


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    ncols = len(m[0])
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [x - factor * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def _primitive(v: list[Fraction]) -> tuple[int, ...]:
    scale = math.lcm(*(x.denominator for x in v))
    ints = [int(x * scale) for x in v]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    last = next(x for x in reversed(ints) if x != 0)
    if last < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def rational_kernel(matrix) -> list[tuple[int, ...]]:
    """Primitive integer basis of the kernel, one vector per free column."""
    rows = [[Fraction(x) for x in r] for r in matrix]
    n = len(rows[0])
    red, pivots = _rref(rows)
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[free]
        basis.append(_primitive(v))
    return basis


def eigenspace_bases(F: Involution) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Primitive integer bases of ker(F - 1) and ker(F + 1), each sorted descending."""
    if F.rational_entries is None:
        raise NonInvolutionError("F_infinity is not rationalised")
    R = F.rational_entries
    spaces = []
    for sign in (1, -1):
        shifted = [[R[i][j] - sign * (i == j) for j in range(4)] for i in range(4)]
        spaces.append(sorted(rational_kernel(shifted), reverse=True))
    plus, minus = spaces
    if (len(plus), len(minus)) != (2, 2):
        raise NonInvolutionError(f"eigenspace dimensions are ({len(plus)}, {len(minus)}), expected (2, 2)")
    return plus, minus


# ---------------------------------------------------------------------------
# Pairings and periods
# ---------------------------------------------------------------------------


def omega_coefficients(S: SMatrix, W: StateMatrix, n: int) -> list[mpmath.mpc]:
    """Coefficients of Omega^(n) in the basis (beta0, beta1, alpha0, alpha1)."""
    s = S.matrix()
    col = mpmath.matrix([W[i, n] for i in range(4)])
    u = s * col
    return [u[i] for i in range(4)]


def cup(u, gamma) -> mpmath.mpc:
    """Integral of (sum u_a b_a) cup (sum gamma_b b_b), no normalisation."""
    return mpmath.fsum(u[a] * GRAM[a][b] * gamma[b] for a in range(4) for b in range(4) if GRAM[a][b])


def pair(u, gamma) -> mpmath.mpc:
    """(2 pi i)^-3 times the cup product."""
    return cup(u, gamma) / two_pi_i() ** 3


def period_determinant(S: SMatrix, W: StateMatrix, basis) -> mpmath.mpc:
    g0, g1 = basis
    u0 = omega_coefficients(S, W, 0)
    u1 = omega_coefficients(S, W, 1)
    return pair(u0, g0) * pair(u1, g1) - pair(u0, g1) * pair(u1, g0)


def c_plus(S: SMatrix, W: StateMatrix, plus_basis) -> mpmath.mpc:
    return period_determinant(S, W, plus_basis)


def c_minus(S: SMatrix, W: StateMatrix, minus_basis) -> mpmath.mpc:
    return period_determinant(S, W, minus_basis)


def tate_twist(c, n: int) -> mpmath.mpc:
    """Deligne period of the twist M(n) for a rank-2 eigenspace: c * (2 pi i)^(2n)."""
    return c * two_pi_i() ** (2 * n)


def c_plus_closed_form(W: StateMatrix, md) -> mpmath.mpc:
    """Small positive phi: 1/2 lambda^2 Y111 (w0 w2' - w2 w0')."""
    lam = mpmath.mpf(md.lam.numerator) / md.lam.denominator
    return lam**2 * md.Y111 / 2 * (W[0, 0] * W[2, 1] - W[2, 0] * W[0, 1])


def c_minus_closed_form(W: StateMatrix, md) -> mpmath.mpc:
    """Small positive phi: lambda^2 Y111/6 [(a w0 - w3) w1' - (a w0' - w3') w1], a = 2 Y000/Y111."""
    lam = mpmath.mpf(md.lam.numerator) / md.lam.denominator
    a = 2 * md.Y000() / md.Y111
    return lam**2 * md.Y111 / 6 * ((a * W[0, 0] - W[3, 0]) * W[1, 1] - (a * W[0, 1] - W[3, 1]) * W[1, 0])


def normalized_c_plus_paper(W: StateMatrix) -> mpmath.mpc:
    """pi^4 det[[w0, -w1 + w2], [w0', -w1' + w2']], the AESZ34 normalisation at -1/7."""
    a = -W[1, 0] + W[2, 0]
    b = -W[1, 1] + W[2, 1]
    return mpmath.pi**4 * (W[0, 0] * b - W[0, 1] * a)


def normalized_c_minus_paper(W: StateMatrix, zeta3_value=None) -> mpmath.mpc:
    """det of the two-column AESZ34 c- display at -1/7.

    First column (32 zeta(3)/(2 pi i)^3 - 1) w0 - 2 w1 + 12 w2 - 8 w3, second
    column -w0 + 2 w1, each with its phi-derivative in the second row.
    """
    z3 = zeta3(mp.dps) if zeta3_value is None else zeta3_value
    a = 32 * z3 / two_pi_i() ** 3 - 1

    def first(n):
        return a * W[0, n] - 2 * W[1, n] + 12 * W[2, n] - 8 * W[3, n]

    def second(n):
        return -W[0, n] + 2 * W[1, n]

    return first(0) * second(1) - first(1) * second(0)


# ---------------------------------------------------------------------------
# Criticality
# ---------------------------------------------------------------------------


def critical_twists(hodge, diagonal_split=None) -> set[int]:
    """All n for which the twist M(n) is critical.

    Odd weight gives a finite answer. For even weight the critical set can be
    infinite (Q(0) is critical at every even n >= 2), so only n within two of
    the Hodge range are examined.

    ``hodge`` lists (p, q, h_pq) for a pure structure of one weight.
    ``diagonal_split`` gives (dim H^{w/2,+}, dim H^{w/2,-}) for even weight.
    """
    terms = [(p, q, h) for p, q, h in hodge if h]
    if not terms:
        return set()
    weights = {p + q for p, q, _ in terms}
    if len(weights) != 1:
        raise ValueError(f"mixed weights {sorted(weights)}")
    w = weights.pop()
    diagonal = [(p, h) for p, q, h in terms if p == q]
    if diagonal and diagonal_split is None:
        raise InsufficientDataError("even weight with H^{p,p} != 0 needs the F_infinity split")
    span = [x for p, q, _ in terms for x in (p, q)]
    result = set()
    for n in range(min(span) - 2, max(span) + 3):
        ok = all(
            (p - n <= -1 and q - n >= 0) or (p - n >= 0 and q - n <= -1) for p, q, _ in terms if p != q
        )
        if ok and diagonal:
            plus, minus = diagonal_split
            (p, h), = diagonal
            # F_inf on H^{p,p}(n) is the original action times (-1)^n
            twisted_plus, twisted_minus = (plus, minus) if n % 2 == 0 else (minus, plus)
            ok = twisted_minus == 0 if p - n < 0 else twisted_plus == 0
        if ok:
            result.add(n)
    return result


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass
class DeligneReport:
    f_infinity: Involution
    plus_basis: list[tuple[int, ...]]
    minus_basis: list[tuple[int, ...]]
    c_plus: mpmath.mpc
    c_minus: mpmath.mpc
    c_plus_twisted: mpmath.mpc
    c_minus_twisted: mpmath.mpc
    c_plus_paper: mpmath.mpc | None = None
    c_minus_paper: mpmath.mpc | None = None
    l_values: dict = field(default_factory=dict)
    ratio_plus: mpmath.mpc | None = None
    ratio_minus: mpmath.mpc | None = None
    recognized_plus: RecognizedRational | None = None
    recognized_minus: RecognizedRational | None = None
    digits_agreement: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.recognized_plus is not None and self.recognized_minus is not None
