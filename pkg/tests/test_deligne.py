import functools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodlab.deligne import (
    Involution,
    c_minus,
    c_minus_closed_form,
    c_plus,
    c_plus_closed_form,
    critical_twists,
    eigenspace_bases,
    f_infinity,
    gram_matrix,
    normalized_c_minus_paper,
    normalized_c_plus_paper,
    pair,
    period_determinant,
    rational_kernel,
    tate_twist,
)
from periodlab.errors import InsufficientDataError, NonInvolutionError
from periodlab.mirror import MirrorData, build_S
from periodlab.numeric import parse_point
from periodlab.pf_core import canonical_state, load_operator

from conftest import DATA
from oracles import MINUS_BASIS_M17, f_infinity_m17, f_infinity_small_positive, plus_basis_m17

PREC = 60
TOL = mpmath.mpf(10) ** -(PREC - 15)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1)


def F(rows):
    return Involution(mpmath.matrix(rows), tuple(tuple(Fraction(x) for x in r) for r in rows), mpmath.mpf(0))


@pytest.fixture(scope="module")
def small_states(aesz34):
    with mpmath.workdps(PREC + 15):
        return {z: canonical_state(aesz34, parse_point(z), PREC + 15) for z in ("1/100", "1/64")}


def test_gram_is_symplectic():
    g = gram_matrix()
    assert g.is_antisymmetric() and g.det() == 1


def test_eigenspace_examples():
    plus, minus = eigenspace_bases(F([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]]))
    assert plus == [(1, 0, 0, 0), (0, 1, 0, 0)]
    assert minus == [(0, 0, 1, 0), (0, 0, 0, 1)]
    for k in (1, 2):
        plus, minus = eigenspace_bases(F(f_infinity_m17(k)))
        assert plus == plus_basis_m17(k) and minus == MINUS_BASIS_M17


def test_eigenspace_rejects_wrong_split():
    with pytest.raises(NonInvolutionError):
        eigenspace_bases(F([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]]))
    with pytest.raises(NonInvolutionError):
        eigenspace_bases(Involution(mpmath.eye(4), None, mpmath.inf))


def test_rational_kernel_is_primitive():
    assert rational_kernel([[2, -4, 0], [0, 0, 0]]) == [(2, 1, 0), (0, 0, 1)]
    assert rational_kernel([[Fraction(1, 2), Fraction(1, 3)]]) == [(-2, 3)]


@pytest.mark.parametrize("k", [1, 2])
def test_f_infinity_at_minus_one_seventh(wronskian_m17, k):
    with mpmath.workdps(PREC + 15):
        inv = f_infinity(build_S(MirrorData.aesz34(k)), wronskian_m17)
    assert inv.integer_rows() == f_infinity_m17(k)
    assert inv.residual < mpmath.mpf(10) ** -20
    r = inv.rational_entries
    assert sum(r[i][i] for i in range(4)) == 0


@pytest.mark.parametrize("z", ["1/100", "1/64"])
def test_small_positive_closed_forms(small_states, z):
    W = small_states[z]
    with mpmath.workdps(PREC + 15):
        for md in (MirrorData.aesz34(1), MirrorData.aesz34(2, lam=Fraction(3, 5))):
            S = build_S(md)
            inv = f_infinity(S, W)
            assert inv.integer_rows() == f_infinity_small_positive(md.Y011)
            plus, minus = eigenspace_bases(inv)
            assert rel(c_plus(S, W, plus), c_plus_closed_form(W, md)) < TOL
            # the closed form pairs against (alpha0, beta1); sorted order is (beta1, alpha0)
            assert minus == [(0, 1, 0, 0), (0, 0, 1, 0)]
            assert rel(c_minus(S, W, minus[::-1]), c_minus_closed_form(W, md)) < TOL
            assert rel(c_minus(S, W, minus), -c_minus_closed_form(W, md)) < TOL


def test_y011_y001_do_not_enter(small_states):
    W = small_states["1/64"]
    with mpmath.workdps(PREC + 15):
        base = MirrorData.aesz34(1)
        ref = build_S(base)
        plus0, minus0 = eigenspace_bases(f_infinity(ref, W))
        cp0, cm0 = c_plus(ref, W, plus0), c_minus(ref, W, minus0)
        for y011, y001 in ((3, Fraction(7, 2)), (-2, 5)):
            md = MirrorData(base.Y111, y011, y001, base.y000_rational, base.y000_zeta)
            S = build_S(md)
            inv = f_infinity(S, W)
            assert inv.integer_rows() == f_infinity_small_positive(y011)
            plus, minus = eigenspace_bases(inv)
            assert rel(c_plus(S, W, plus), cp0) < TOL
            assert rel(c_minus(S, W, minus), cm0) < TOL


@functools.cache
def _state_1_100():
    # hypothesis forbids function-scoped fixtures, so the state is cached here
    with mpmath.workdps(45):
        return canonical_state(load_operator(DATA / "aesz34.op"), parse_point("1/100"), 45)


@given(st.fractions(max_denominator=20).filter(lambda q: q != 0 and abs(q) < 50))
def test_lambda_scaling(q):
    W = _state_1_100()
    with mpmath.workdps(45):
        md = MirrorData.aesz34(1)
        a, b = build_S(md), build_S(md.with_lambda(q))
        fa, fb = f_infinity(a, W), f_infinity(b, W)
        assert fa.rational_entries == fb.rational_entries
        plus, minus = eigenspace_bases(fa)
        q2 = mpmath.mpf(q.numerator) ** 2 / q.denominator**2
        assert rel(c_plus(b, W, plus), q2 * c_plus(a, W, plus)) < mpmath.mpf(10) ** -30
        assert rel(c_minus(b, W, minus), q2 * c_minus(a, W, minus)) < mpmath.mpf(10) ** -30


def test_swap_flips_sign(wronskian_m17):
    with mpmath.workdps(PREC + 15):
        S = build_S(MirrorData.aesz34(1))
        plus = plus_basis_m17(1)
        a = period_determinant(S, wronskian_m17, plus)
        b = period_determinant(S, wronskian_m17, plus[::-1])
        assert abs(a + b) < TOL * abs(a)


def test_pair_is_bilinear_and_alternating(wronskian_m17):
    with mpmath.workdps(PREC + 15):
        g = (1, -2, 3, 5)
        assert abs(pair(g, g)) < TOL
        u = [wronskian_m17[i, 0] for i in range(4)]
        two = pair([2 * x for x in u], g)
        assert abs(two - 2 * pair(u, g)) < TOL * abs(two)


def test_tate_twist():
    with mpmath.workdps(30):
        c = mpmath.mpc(2, -1)
        assert tate_twist(c, 0) == c
        assert abs(tate_twist(c, 2) - 16 * mpmath.pi**4 * c) < mpmath.mpf(10) ** -25
        assert abs(tate_twist(c, 1) + 4 * mpmath.pi**2 * c) < mpmath.mpf(10) ** -25


def test_normalized_c_plus_is_real(wronskian_m17):
    with mpmath.workdps(PREC + 15):
        cp = normalized_c_plus_paper(wronskian_m17)
        assert abs(cp.imag) < mpmath.mpf(10) ** -(PREC // 2) * abs(cp)
        cm = normalized_c_minus_paper(wronskian_m17)
        assert abs(cm.imag) < mpmath.mpf(10) ** -(PREC // 2) * abs(cm)


def test_critical_twists():
    assert critical_twists([(3, 0, 1), (2, 1, 1), (1, 2, 1), (0, 3, 1)]) == {2}
    assert critical_twists([(1, 0, 1), (0, 1, 1)]) == {1}
    assert critical_twists([]) == set()
    with pytest.raises(InsufficientDataError):
        critical_twists([(1, 1, 1)])
    # Q(0): zeta(n) is critical for even n >= 2 and odd n <= -1; the search window is [-2, 2]
    assert critical_twists([(0, 0, 1)], diagonal_split=(1, 0)) == {-1, 2}
    with pytest.raises(ValueError):
        critical_twists([(1, 0, 1), (1, 1, 1)], diagonal_split=(1, 0))
