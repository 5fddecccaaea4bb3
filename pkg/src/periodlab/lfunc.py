"""Modular-form coefficients, L-values at integer points, Gamma factors and j(tau)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp

from .errors import CoefficientGapError, ConvergenceError, CrossCheckError, InsufficientDataError, ParseError, SignError

logger = logging.getLogger(__name__)


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, v in enumerate(sieve) if v]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# ---------------------------------------------------------------------------
# Elliptic curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EllipticCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        if self.discriminant == 0:
            raise ValueError("singular Weierstrass equation")

    @property
    def discriminant(self) -> int:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def good_reduction(self, p: int) -> bool:
        return self.discriminant % p != 0


# y^2 + xy + y = x^3 + 4x - 6, the modular curve X0(14)
X0_14 = EllipticCurve(1, 0, 1, 4, -6)


def count_points(E: EllipticCurve, p: int) -> int:
    """#E(F_p) including the point at infinity (singular point counted if present)."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    a1, a2, a3, a4, a6 = (c % p for c in (E.a1, E.a2, E.a3, E.a4, E.a6))
    count = 1
    if p == 2:
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                    count += 1
        return count
    squares = [0] * p
    for y in range(p):
        squares[y * y % p] += 1
    for x in range(p):
        # complete the square: (2y + a1 x + a3)^2 = disc
        b = (a1 * x + a3) % p
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p
        disc = (b * b + 4 * rhs) % p
        count += squares[disc]
    return count


def ap_point_count(E: EllipticCurve, p: int) -> int:
    """a_p = p + 1 - #E(F_p); also correct at multiplicative bad primes."""
    return p + 1 - count_points(E, p)


# ---------------------------------------------------------------------------
# Modular forms
# ---------------------------------------------------------------------------


@dataclass
class ModularForm:
    label: str
    weight: int
    level: int
    ap: dict[int, int]
    eps: int | None = None
    an: list[int] = field(default_factory=list, repr=False)

    def coefficients(self, upto: int) -> list[int]:
        if len(self.an) <= upto:
            self.an = expand_coefficients(self, upto)
        return self.an[: upto + 1]

    def deligne_bound_violations(self) -> list[int]:
        bad = []
        for p, a in self.ap.items():
            if self.level % p and a * a > 4 * p ** (self.weight - 1):
                bad.append(p)
        return bad


def expand_coefficients(form: ModularForm, upto: int) -> list[int]:
    """a_0..a_upto (a_0 = 0) from a_p via the Hecke recursions."""
    missing = [p for p in primes_upto(upto) if p not in form.ap]
    if missing:
        raise CoefficientGapError(f"{form.label}: missing a_p for p in {missing[:10]}...", missing)
    k, N = form.weight, form.level
    prime_power: dict[tuple[int, int], int] = {}
    for p in primes_upto(upto):
        ap = form.ap[p]
        prev, cur = 1, ap
        prime_power[(p, 0)] = 1
        prime_power[(p, 1)] = ap
        r = 1
        while p ** (r + 1) <= upto:
            if N % p:
                prev, cur = cur, ap * cur - p ** (k - 1) * prev
            else:
                prev, cur = cur, ap * cur
            r += 1
            prime_power[(p, r)] = cur
    a = [0] * (upto + 1)
    if upto >= 1:
        a[1] = 1
    # smallest-prime-factor sieve for the multiplicative extension
    spf = list(range(upto + 1))
    for p in range(2, math.isqrt(upto) + 1):
        if spf[p] == p:
            for m in range(p * p, upto + 1, p):
                if spf[m] == m:
                    spf[m] = p
    for n in range(2, upto + 1):
        p = spf[n]
        m, r = n, 0
        while m % p == 0:
            m //= p
            r += 1
        a[n] = prime_power[(p, r)] * a[m]
    return a


def form_from_curve(E: EllipticCurve, label: str, level: int, upto: int) -> ModularForm:
    ap = {p: ap_point_count(E, p) for p in primes_upto(upto)}
    return ModularForm(label, 2, level, ap)


def f2_form(upto: int = 1000) -> ModularForm:
    """14.2.a.a from point counts on X0(14)."""
    return form_from_curve(X0_14, "14.2.a.a", 14, upto)


def euler_function(upto: int) -> list[int]:
    """Coefficients of prod (1 - q^n) via the pentagonal number theorem."""
    c = [0] * (upto + 1)
    k = 0
    while True:
        done = True
        for kk in ((k,) if k == 0 else (k, -k)):
            e = kk * (3 * kk - 1) // 2
            if e <= upto:
                c[e] += -1 if kk % 2 else 1
                done = False
        if done and k > 0:
            return c
        k += 1


def eta_product(exponents: dict[int, int], upto: int) -> list[int]:
    """q-coefficients of prod_d eta(d tau)^e_d, including the q^(sum d e_d / 24) shift."""
    shift = Fraction(sum(d * e for d, e in exponents.items()), 24)
    if shift.denominator != 1:
        raise ValueError("eta quotient is not a power series in q")
    shift = int(shift)
    series = [1] + [0] * upto
    base = euler_function(upto)
    for d, e in exponents.items():
        dilated = [0] * (upto + 1)
        for i, c in enumerate(base):
            if i * d > upto:
                break
            dilated[i * d] = c
        for _ in range(e):
            series = _mul_trunc(series, dilated, upto)
    return ([0] * shift + series)[: upto + 1]


def _mul_trunc(a, b, upto):
    out = [0] * (upto + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(upto + 1 - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def eta_f2_crosscheck(upto: int, reference: ModularForm | None = None) -> list[int]:
    """q-expansion of eta(t) eta(2t) eta(7t) eta(14t), checked against point counts."""
    coeffs = eta_product({1: 1, 2: 1, 7: 1, 14: 1}, upto)
    reference = reference or f2_form(max(upto, 2))
    expected = reference.coefficients(upto)
    bad = [n for n in range(1, upto + 1) if coeffs[n] != expected[n]]
    if bad:
        raise CrossCheckError(f"eta product disagrees with point counts at n = {bad[:10]}")
    return coeffs


# ---------------------------------------------------------------------------
# Coefficient files
# ---------------------------------------------------------------------------


def parse_coefficients(text: str) -> ModularForm:
    header: dict[str, str] = {}
    ap: dict[int, int] = {}
    eps = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] in ("label", "weight", "level") and len(parts) == 2:
                header[parts[0]] = parts[1]
            elif parts[0] == "sign" and len(parts) == 2:
                eps = int(parts[1])
            elif parts[0] == "a" and len(parts) == 3:
                n, v = int(parts[1]), int(parts[2])
                if is_prime(n):
                    ap[n] = v
                elif n != 1 or v != 1:
                    # composite coefficients are always recomputed
                    continue
            else:
                raise ParseError(f"unrecognised line {line!r}", lineno)
        except ValueError:
            raise ParseError(f"bad integer in {line!r}", lineno) from None
    for key in ("label", "weight", "level"):
        if key not in header:
            raise ParseError(f"missing header '{key}'")
    return ModularForm(header["label"], int(header["weight"]), int(header["level"]), ap, eps)


def serialize_coefficients(form: ModularForm) -> str:
    lines = [f"label {form.label}", f"weight {form.weight}", f"level {form.level}"]
    if form.eps is not None:
        lines.append(f"sign {form.eps}")
    lines += [f"a {p} {form.ap[p]}" for p in sorted(form.ap)]
    return "\n".join(lines) + "\n"


def load_coefficients(path) -> ModularForm:
    with open(path, encoding="utf-8") as fh:
        return parse_coefficients(fh.read())


# ---------------------------------------------------------------------------
# L-values
# ---------------------------------------------------------------------------


def incomplete_gamma_int(m: int, x) -> mpmath.mpf:
    """Gamma(m, x) = (m-1)! e^-x sum_{j<m} x^j / j! for integer m >= 1."""
    if m < 1:
        raise ValueError("closed form needs m >= 1")
    term = mpmath.mpf(1)
    total = mpmath.mpf(1)
    for j in range(1, m):
        term = term * x / j
        total += term
    return math.factorial(m - 1) * mpmath.exp(-x) * total


def coefficient_cutoff(level: int, prec: int, t=1) -> int:
    t = mpmath.mpf(t)
    tmin = min(t, 1 / t)
    return int(mpmath.ceil((prec + 10) * mpmath.log(10) * mpmath.sqrt(level) / (2 * mpmath.pi * tmin))) + 16


def completed_l_value(form: ModularForm, s: int, eps: int, t, prec: int) -> mpmath.mpf:
    """Lambda(s) = (sqrt(N)/2pi)^s Gamma(s) L(f, s) from the split at parameter t.

    Lambda(s) = sum a_n [ (A/n)^s Gamma(s, n t / A) + eps (A/n)^(k-s) Gamma(k-s, n / (t A)) ]
    with A = sqrt(N) / (2 pi); the two halves come from splitting the Mellin
    integral at t and using f(i/(N y)) = eps * ... under the Fricke involution.
    """
    k, N = form.weight, form.level
    if not 1 <= s <= k - 1:
        raise ValueError(f"s must lie in 1..{k - 1}")
    with mpmath.workdps(prec + 10):
        t = mpmath.mpf(t)
        A = mpmath.sqrt(N) / (2 * mpmath.pi)
        n_max = coefficient_cutoff(N, prec, t)
        try:
            a = form.coefficients(n_max)
        except CoefficientGapError as exc:
            raise CoefficientGapError(f"{form.label}: L-value needs a_n up to n = {n_max}", exc.missing) from None
        total = mpmath.mpf(0)
        for n in range(1, n_max + 1):
            if not a[n]:
                continue
            x = n / A
            term = (A / n) ** s * incomplete_gamma_int(s, x * t)
            term += eps * (A / n) ** (k - s) * incomplete_gamma_int(k - s, x / t)
            total += a[n] * term
        return total


def determine_sign(form: ModularForm, prec: int = 30) -> int:
    """Functional-equation sign from split-parameter invariance."""
    splits = [mpmath.mpf(1), mpmath.mpf(6) / 5, mpmath.mpf(7) / 5]
    s = 1
    agree = []
    with mpmath.workdps(prec + 10):
        tol = mpmath.mpf(10) ** (-(prec - 5))
        for eps in (1, -1):
            vals = [completed_l_value(form, s, eps, t, prec) for t in splits]
            scale = max(abs(v) for v in vals) or mpmath.mpf(1)
            if all(abs(v - vals[0]) <= tol * max(scale, 1) for v in vals[1:]):
                agree.append(eps)
    if len(agree) != 1:
        raise SignError(f"{form.label}: sign undetermined (consistent signs: {agree})")
    return agree[0]


def l_value(form: ModularForm, s: int, prec: int, t=1) -> mpmath.mpf:
    """L(f, s) at an integer 1 <= s <= k-1 via the approximate functional equation."""
    if form.eps is None:
        form.eps = determine_sign(form)
    with mpmath.workdps(prec + 10):
        lam = completed_l_value(form, s, form.eps, t, prec)
        A = mpmath.sqrt(form.level) / (2 * mpmath.pi)
        value = lam / (A**s * mpmath.gamma(s))
    with mpmath.workdps(prec):
        return +value


# ---------------------------------------------------------------------------
# Gamma factors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaFactor:
    kind: str  # "R" or "C"
    shift: int  # factor is Gamma_kind(s - shift)
    multiplicity: int

    def __str__(self):
        arg = "s" if self.shift == 0 else (f"s-{self.shift}" if self.shift > 0 else f"s+{-self.shift}")
        power = f"^{self.multiplicity}" if self.multiplicity != 1 else ""
        return f"Gamma_{self.kind}({arg}){power}"


def gamma_r(s):
    return mpmath.pi ** (-mpmath.mpf(s) / 2) * mpmath.gamma(mpmath.mpf(s) / 2)


def gamma_c(s):
    return 2 * (2 * mpmath.pi) ** (-mpmath.mpf(s)) * mpmath.gamma(s)


@dataclass(frozen=True)
class GammaFactors:
    factors: tuple[GammaFactor, ...]

    def __str__(self):
        return " * ".join(str(f) for f in self.factors) or "1"

    def has_pole(self, s) -> bool:
        for f in self.factors:
            arg = mpmath.mpf(s) - f.shift
            if f.kind == "C" and arg <= 0 and arg == int(arg):
                return True
            if f.kind == "R" and arg <= 0 and arg == int(arg) and int(arg) % 2 == 0:
                return True
        return False

    def evaluate(self, s):
        """Numeric value, or None at a pole."""
        if self.has_pole(s):
            return None
        value = mpmath.mpf(1)
        for f in self.factors:
            g = gamma_c if f.kind == "C" else gamma_r
            value *= g(mpmath.mpf(s) - f.shift) ** f.multiplicity
        return value


def gamma_factors(hodge, w: int, diagonal_split=None) -> GammaFactors:
    """Archimedean factor prod_{p<q} Gamma_C(s-p)^h_pq (+ Gamma_R terms for even w)."""
    table = {(p, q): h for p, q, h in hodge if h}
    for (p, q), h in table.items():
        if p + q != w:
            raise ValueError(f"h^({p},{q}) does not have weight {w}")
        if table.get((q, p)) != h:
            raise ValueError(f"Hodge symmetry fails for ({p},{q})")
    factors = [GammaFactor("C", p, h) for (p, q), h in sorted(table.items()) if p < q]
    if w % 2 == 0 and table.get((w // 2, w // 2)):
        if diagonal_split is None:
            raise InsufficientDataError("even weight needs dim H^{w/2,+} and dim H^{w/2,-}")
        plus, minus = diagonal_split
        if plus:
            factors.append(GammaFactor("R", w // 2, plus))
        if minus:
            factors.append(GammaFactor("R", w // 2 - 1, minus))
    return GammaFactors(tuple(factors))


# ---------------------------------------------------------------------------
# j-invariant
# ---------------------------------------------------------------------------


def j_invariant(tau, prec: int | None = None) -> mpmath.mpc:
    """j = E4^3 / Delta with Delta = q prod (1 - q^n)^24."""
    prec = prec or mp.dps
    with mpmath.workdps(prec + 10):
        tau = mpmath.mpc(tau)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half plane")
        q = mpmath.expjpi(2 * tau)
        if abs(q) >= 0.5:
            raise ConvergenceError(f"|q| = {mpmath.nstr(abs(q), 5)} is too large; reduce tau first")
        eps = mpmath.mpf(10) ** (-(prec + 8))
        # Euler function via pentagonal exponents
        euler = mpmath.mpc(1)
        k = 1
        while True:
            e1 = k * (3 * k - 1) // 2
            term = q**e1 * (1 + q**k)
            euler += -term if k % 2 else term
            if abs(q) ** e1 < eps:
                break
            k += 1
        e4 = mpmath.mpc(1)
        n = 1
        qn = q
        while True:
            e4 += 240 * n**3 * qn / (1 - qn)
            if n**3 * abs(qn) < eps:
                break
            n += 1
            qn *= q
        delta = q * euler**24
        result = e4**3 / delta
    with mpmath.workdps(prec):
        return +result
