from fractions import Fraction

import pytest

from periodlab.cli import EXIT_ERROR, EXIT_NOT_VERIFIED, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def kv(out):
    return dict(line.split(" ", 1) for line in out.splitlines())


def test_frobenius(capsys):
    code, out, _ = run(capsys, "frobenius", "-N", "5")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "f0: 1 5 45 545 7885 127905"
    assert [line.split(":")[0] for line in lines] == ["f0", "f1", "f2", "f3"]
    code, out, _ = run(capsys, "frobenius", "-N", "0")
    assert out.splitlines() == ["f0: 1", "f1: 0", "f2: 0", "f3: 0"]


def test_bad_operator_is_a_domain_error(capsys, tmp_path):
    bad = tmp_path / "bad.op"
    bad.write_text("name B\nvariable z\nc 0 4 x\n")
    code, _, err = run(capsys, "frobenius", "--op", str(bad))
    assert code == EXIT_ERROR and "line 3" in err
    code, _, err = run(capsys, "frobenius", "--op", str(tmp_path / "missing.op"))
    assert code == EXIT_ERROR and err.startswith("periodlab: error in")


def test_precision_floor(capsys):
    with pytest.raises(SystemExit) as info:
        main(["verify", "--precision", "20"])
    assert info.value.code == 2


@pytest.mark.parametrize("k", ["1", "2"])
def test_verify(capsys, k):
    code, out, _ = run(capsys, "verify", "--precision", "60", "--offline", "--k", k)
    assert code == EXIT_OK
    assert "ratio_plus = -2401/32" in out and "ratio_minus = 1029/32" in out
    assert "verdict: verified" in out


def test_verify_kv_is_deterministic(capsys):
    _, first, _ = run(capsys, "verify", "--precision", "50", "--offline", "--format", "kv")
    _, second, _ = run(capsys, "verify", "--precision", "50", "--offline", "--format", "kv")
    assert first == second
    items = kv(first)
    assert items["f_infinity"] == "1,1,-3,6;0,-1,6,-12;0,0,-1,0;0,0,-1,1"
    assert items["plus_basis"] == "(1,0,0,0);(0,-6,0,1)"
    assert items["minus_basis"] == "(0,0,2,1);(-1,2,0,0)"
    assert (items["ratio_plus"], items["ratio_minus"]) == ("-2401/32", "1029/32")
    assert items["verdict"] == "verified"


def test_low_precision_never_gives_another_rational(capsys):
    _, out, _ = run(capsys, "verify", "--precision", "30", "--offline", "--format", "kv")
    items = kv(out)
    assert items["ratio_plus"] in ("-2401/32", "unrecognized")
    assert items["ratio_minus"] in ("1029/32", "unrecognized")


@pytest.mark.parametrize("vperp", ["0.3737", "0.37369955695472976799767292752499463211766555651682"])
def test_bad_vperp_is_not_verified(capsys, vperp):
    code, out, _ = run(capsys, "verify", "--precision", "60", "--offline", "--format", "kv", "--vperp", vperp)
    assert code == EXIT_NOT_VERIFIED
    items = kv(out)
    assert items["ratio_plus"] == "-2401/32"
    assert items["ratio_minus"] == "unrecognized" and items["verdict"] == "not-verified"


def test_deligne_command(capsys):
    code, out, _ = run(capsys, "deligne", "--precision", "40", "--format", "kv", "--k", "2")
    assert code == EXIT_OK
    assert kv(out)["f_infinity"] == "1,1,-6,12;0,-1,12,-24;0,0,-1,0;0,0,-1,1"


def test_deligne_with_mirror_file(capsys, tmp_path):
    m = tmp_path / "k3.mirror"
    m.write_text("Y111 36\nY011 0\nY001 -3\nY000 72*zeta3/(2*pi*i)^3\n")
    code, out, _ = run(capsys, "deligne", "--precision", "40", "--format", "kv", "--mirror", str(m))
    assert code == EXIT_OK
    assert kv(out)["f_infinity"] == "1,1,-9,18;0,-1,18,-36;0,0,-1,0;0,0,-1,1"


def test_continue_command(capsys):
    code, out, _ = run(capsys, "continue", "--precision", "40", "--format", "kv")
    assert code == EXIT_OK
    items = kv(out)
    assert items["target"] == "-1/7" and "w3_3_im" in items
    assert float(items["det_re"]) != 0
    # the branch of log(-1/7) reached from -1/50 is the principal one
    assert items["log_target_im"].startswith("3.14159265358979323846")


def test_monodromy_command(capsys):
    code, out, _ = run(capsys, "monodromy", "--precision", "40", "--format", "kv", "--center", "0")
    assert code == EXIT_OK
    assert kv(out)["matrix"] == "1,0,0,0;1,1,0,0;1,2,1,0;1,3,3,1"


def test_monodromy_base_on_the_singular_point(capsys):
    code, _, err = run(capsys, "monodromy", "--precision", "40", "--center", "1/25", "--base", "1/25")
    assert code == EXIT_ERROR


def test_lvalue_command(capsys):
    code, out, _ = run(capsys, "lvalue", "--precision", "40", "--format", "kv", "--form", "14.4.a.a", "--s", "2")
    assert code == EXIT_OK
    items = kv(out)
    assert items["value"].startswith("0.91930674266912115653914356907939249680")
    assert (items["source"], items["sign"]) == ("bundled", "1")
    code, _, err = run(capsys, "lvalue", "--precision", "40", "--form", "14.4.a.a", "--s", "4")
    assert code == EXIT_ERROR and "s must lie" in err


def test_lvalue_from_file(capsys, tmp_path, f2):
    from periodlab.lfunc import serialize_coefficients

    path = tmp_path / "f2.coeffs"
    path.write_text(serialize_coefficients(f2))
    code, out, _ = run(capsys, "lvalue", "--precision", "30", "--format", "kv", "--form", str(path), "--s", "1")
    assert code == EXIT_OK and kv(out)["value"].startswith("0.3302236593444805390282619")


def test_unknown_form_offline(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PERIODLAB_CACHE", str(tmp_path))
    code, _, err = run(capsys, "lvalue", "--offline", "--form", "11.2.a.a", "--s", "1")
    assert code == EXIT_ERROR and "offline" in err


def test_jcheck(capsys):
    code, out, _ = run(capsys, "jcheck", "--precision", "40", "--format", "kv")
    assert code == EXIT_OK and int(kv(out)["digits"]) >= 10
    code, _, _ = run(capsys, "jcheck", "--precision", "40", "--vperp", "0.38")
    assert code == EXIT_NOT_VERIFIED


def test_ratio_fraction_parses(capsys):
    _, out, _ = run(capsys, "verify", "--precision", "40", "--offline", "--format", "kv")
    items = kv(out)
    assert Fraction(items["ratio_plus"]) == Fraction(int(items["ratio_plus_num"]), int(items["ratio_plus_den"]))
