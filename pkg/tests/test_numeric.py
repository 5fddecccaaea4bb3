from fractions import Fraction

import mpmath
import pytest

from periodlab.numeric import cmax_abs, frac_to_mpf, parse_point, parse_real, to_mpc, tolerance, two_pi_i


@pytest.mark.parametrize(
    "text, expected",
    [
        ("-1/7", (Fraction(-1, 7), 0)),
        ("0.25", (Fraction(1, 4), 0)),
        ("i/30", (0, Fraction(1, 30))),
        ("-i/30", (0, Fraction(-1, 30))),
        ("1/100+1/30*i", (Fraction(1, 100), Fraction(1, 30))),
        ("-0.5-2i", (Fraction(-1, 2), -2)),
        ("3i", (0, 3)),
        ("i", (0, 1)),
        ("1e-3+1e-2i", (Fraction(1, 1000), Fraction(1, 100))),
        ("2i+1", (1, 2)),
    ],
)
def test_parse_point(text, expected):
    with mpmath.workdps(40):
        z = parse_point(text)
        re, im = (mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x) for x in expected)
        assert abs(z - mpmath.mpc(re, im)) < mpmath.mpf(10) ** -38


def test_parse_point_uses_working_precision():
    with mpmath.workdps(60):
        assert abs(parse_point("-1/7") * 7 + 1) < mpmath.mpf(10) ** -58


def test_parse_errors():
    for bad in ("", "abc", "1/0"):
        with pytest.raises((ValueError, ZeroDivisionError)):
            parse_point(bad)
    assert parse_real(" 3/4 ") == mpmath.mpf(0.75)


def test_conversions():
    assert frac_to_mpf(Fraction(1, 4)) == mpmath.mpf(0.25)
    assert to_mpc(Fraction(1, 2)) == mpmath.mpc(0.5)
    assert to_mpc((1, Fraction(-1, 2))) == mpmath.mpc(1, -0.5)
    assert to_mpc("i/2") == mpmath.mpc(0, 0.5)
    assert to_mpc(1 + 2j) == mpmath.mpc(1, 2)


def test_constants():
    with mpmath.workdps(50):
        assert abs(two_pi_i() - 2j * mpmath.pi) < mpmath.mpf(10) ** -48
    assert tolerance(60) == mpmath.mpf(10) ** -45
    assert cmax_abs([1, -3, mpmath.mpc(0, 2)]) == 3
    assert cmax_abs([]) == 0
