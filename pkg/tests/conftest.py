from pathlib import Path

import mpmath
import pytest

from periodlab.continuation import transport
from periodlab.lfunc import f2_form, load_coefficients
from periodlab.pf_core import load_operator

DATA = Path(__file__).resolve().parents[1] / "src" / "periodlab" / "data"


@pytest.fixture(autouse=True)
def _reset_precision():
    # every test starts from mpmath's default and cannot leak a raised dps
    saved = mpmath.mp.dps
    mpmath.mp.dps = 15
    yield
    mpmath.mp.dps = saved


@pytest.fixture(scope="session")
def aesz34():
    return load_operator(DATA / "aesz34.op")


@pytest.fixture(scope="session")
def wronskian_m17(aesz34):
    """Canonical Wronskian at -1/7 via -1/50, 60 digits (75 working)."""
    with mpmath.workdps(75):
        return transport(aesz34, None, [mpmath.mpf(-1) / 50, mpmath.mpf(-1) / 7], 60)


@pytest.fixture(scope="session")
def f2():
    return f2_form(1000)


@pytest.fixture(scope="session")
def f4():
    return load_coefficients(DATA / "14.4.a.a.coeffs")


# criterion number -> (status, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("abcdefghijklmnopqrstuvwxyz")), k)):
        status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:<3} {status}  {detail}")
