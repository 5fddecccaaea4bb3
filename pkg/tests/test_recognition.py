from fractions import Fraction
from math import gcd

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodlab.recognition import (
    RecognizedRational,
    convergents,
    default_tol,
    digits_agreement,
    mpf_to_fraction,
    recognize_rational,
)

TOL = mpmath.mpf(10) ** -30


def rec(p, q):
    return recognize_rational(mpmath.mpf(p) / q, 10**4, TOL)


def test_examples():
    with mpmath.workdps(50):
        assert rec(1, 2).fraction == Fraction(1, 2)
        r = recognize_rational(mpmath.mpf("-75.03125"), 10**6, TOL)
        assert (r.num, r.den, r.height) == (-2401, 32, 2401)
        assert str(r) == "-2401/32"
        assert recognize_rational(mpmath.pi, 10**3, mpmath.mpf(10) ** -20) is None
        assert str(rec(7, 1)) == "7"


def test_small_grid_exhaustive():
    with mpmath.workdps(50):
        for q in range(1, 301):
            for p in range(-300, 301):
                if gcd(p, q) == 1:
                    r = rec(p, q)
                    assert (r.num, r.den) == (p, q)


def test_every_denominator_to_ten_thousand():
    with mpmath.workdps(50):
        for q in range(1, 10**4 + 1):
            for p in {1, q - 1, -(10**4 - 1), 10**4 - 1}:
                if p and gcd(p, q) == 1:
                    r = rec(p, q)
                    assert (r.num, r.den) == (p, q)


@given(st.integers(-(10**4), 10**4), st.integers(1, 10**4))
def test_random_grid_points(p, q):
    g = gcd(p, q)
    with mpmath.workdps(50):
        r = rec(p, q)
    assert (r.num, r.den) == (p // g, q // g)


@given(st.floats(-1e3, 1e3, allow_nan=False), st.integers(5, 40), st.integers(1, 10))
def test_shrinking_tol_never_moves_backwards(x, d, extra):
    with mpmath.workdps(50):
        loose = recognize_rational(x, 10**6, mpmath.mpf(10) ** -d)
        tight = recognize_rational(x, 10**6, mpmath.mpf(10) ** -(d + extra))
    if loose is not None and tight is not None:
        # a tighter tolerance can only accept the same or a later convergent
        assert tight.fraction == loose.fraction or tight.den > loose.den


@given(st.integers(-(10**4), 10**4), st.integers(1, 10**4), st.integers(-(10**6), 10**6), st.integers(9, 25))
def test_shrinking_tol_keeps_or_drops_a_true_rational(p, q, noise, d):
    # below 1/(2 H^2) two rationals of height <= H cannot both fit, so the answer is unique
    with mpmath.workdps(60):
        x = mpmath.mpf(p) / q + mpmath.mpf(noise) * mpmath.mpf(10) ** -52
        answers = [recognize_rational(x, 10**4, mpmath.mpf(10) ** -e) for e in range(d, 51, 5)]
    assert all(a is None or a.fraction == Fraction(p, q) for a in answers)


def test_loose_tol_can_confuse_neighbours():
    with mpmath.workdps(30):
        x = mpmath.mpf(1) / 317
        assert recognize_rational(x, 10**4, mpmath.mpf(10) ** -5).fraction == Fraction(1, 316)
        assert recognize_rational(x, 10**4, mpmath.mpf(10) ** -10).fraction == Fraction(1, 317)


def test_tighter_tol_can_pick_a_later_convergent():
    with mpmath.workdps(30):
        x = mpmath.mpf("0.333334")
        assert recognize_rational(x, 10**6, mpmath.mpf(10) ** -5).fraction == Fraction(1, 3)
        assert recognize_rational(x, 10**6, mpmath.mpf(10) ** -10).fraction == Fraction(166666, 499997)


def test_height_cutoff_is_on_denominator():
    with mpmath.workdps(50):
        assert recognize_rational(mpmath.mpf(100000) / 3, 10, TOL).fraction == Fraction(100000, 3)
        assert recognize_rational(mpmath.mpf(1) / 30000, 10**4, TOL) is None


def test_invalid_arguments():
    with pytest.raises(ValueError):
        recognize_rational(1, 10, 0)
    with pytest.raises(ValueError):
        RecognizedRational(2, 4, mpmath.mpf(0))
    with pytest.raises(ValueError):
        mpf_to_fraction(mpmath.inf)


def test_mpf_to_fraction_exact():
    assert mpf_to_fraction(mpmath.mpf(-0.375)) == Fraction(-3, 8)
    assert mpf_to_fraction(mpmath.mpf(2) ** 70) == 2**70
    assert list(convergents(Fraction(355, 113))) == [(3, 1), (22, 7), (355, 113)]


def test_default_tol():
    assert default_tol(60) == mpmath.mpf(10) ** -30


def test_digits_agreement():
    assert digits_agreement(mpmath.mpf("1.0000001"), 1) == 7
    with mpmath.workdps(40):
        assert digits_agreement(mpmath.pi, mpmath.pi) == 40
        assert digits_agreement(mpmath.pi, mpmath.pi, cap=12) == 12
        assert digits_agreement(mpmath.mpf("3.14159"), mpmath.pi) == 6
    assert digits_agreement(1e-310, 0) >= 0


@given(st.floats(-1e6, 1e6).filter(lambda v: abs(v) > 1e-3), st.floats(1e-12, 1e-2))
def test_digits_agreement_roughly_symmetric(b, rel):
    with mpmath.workdps(30):
        a = mpmath.mpf(b) * (1 + mpmath.mpf(rel))
        assert abs(digits_agreement(a, b) - digits_agreement(b, a)) <= 1
