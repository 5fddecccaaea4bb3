"""End-to-end verification run: transport, F_infinity, c+-, L-values, recognition."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import mpmath

from .continuation import plan_path, read_path_file, transport
from .deligne import (
    DeligneReport,
    c_minus,
    c_plus,
    eigenspace_bases,
    f_infinity,
    normalized_c_minus_paper,
    normalized_c_plus_paper,
    tate_twist,
)
from .errors import OfflineError
from .lfunc import ModularForm, coefficient_cutoff, f2_form, l_value, load_coefficients, parse_coefficients
from .lmfdb_client import ClientConfig, LMFDBClient, default_cache_dir
from .mirror import MirrorData, build_S, load_mirror
from .numeric import GUARD_DIGITS, parse_point
from .pf_core import finite_singular_points, load_operator
from .recognition import default_tol, digits_agreement, recognize_rational

logger = logging.getLogger(__name__)

VPERP = "0.37369955695472976699767292752499463211766555651682"

MIN_VPERP_DIGITS = 30

# published 50-digit values, used only to report digits of agreement
REFERENCE_L = {
    "L_f2_1": "0.33022365934448053902826194612283487754045234078189",
    "L_f4_1": "0.67496319716994177129269568273091339919322842904407",
    "L_f4_2": "0.91930674266912115653914356907939249680895763199044",
}


def data_path(name: str) -> Path:
    return Path(str(resources.files("periodlab") / "data" / name))


@dataclass
class RunConfig:
    precision: int = 100
    operator: Path = field(default_factory=lambda: data_path("aesz34.op"))
    mirror: Path | None = None
    target: str = "-1/7"
    base: str = "-1/50"
    path: Path | None = None
    k: int = 1
    offline: bool = False
    output: str = "text"
    vperp: str = VPERP
    clearance: str = "1/100"
    f2: str = "14.2.a.a"
    f4: str = "14.4.a.a"
    cache_dir: Path = field(default_factory=default_cache_dir)

    def __post_init__(self):
        if self.precision < 30:
            raise ValueError("precision must be at least 30 digits")
        if self.output not in ("kv", "text"):
            raise ValueError("output must be 'kv' or 'text'")

    def mirror_data(self) -> MirrorData:
        if self.mirror is not None:
            return load_mirror(self.mirror)
        return MirrorData.aesz34(self.k)


def resolve_form(spec: str, prec: int, offline: bool = True, cache_dir: Path | None = None) -> tuple[ModularForm, str]:
    """A form from a file path, or a label looked up as point counts, cache, bundled data, network.

    Returns the form and a short provenance string.
    """
    path = Path(spec)
    if path.suffix == ".coeffs" and path.exists():
        return load_coefficients(path), f"file:{path.name}"
    if spec == "14.2.a.a":
        return f2_form(coefficient_cutoff(14, prec, t=mpmath.mpf(7) / 5)), "point-count"
    client = LMFDBClient(ClientConfig(offline=True, cache_dir=cache_dir or default_cache_dir()))
    cached = client.read_cache(spec, 2)
    if cached is not None:
        return parse_coefficients(cached), "cache"
    bundled = data_path(f"{spec}.coeffs")
    if bundled.exists():
        return load_coefficients(bundled), "bundled"
    if offline:
        raise OfflineError(f"no local coefficients for {spec}; populate {client.cache_path(spec)} or run online")
    client.config.offline = False
    return parse_coefficients(client.fetch_coefficients(spec, 1000)), "lmfdb"


def waypoints_for(config: RunConfig, op) -> list:
    if config.path is not None:
        return read_path_file(config.path)
    singular = finite_singular_points(op)
    plan = plan_path(parse_point(config.base), parse_point(config.target), singular, parse_point(config.clearance).real)
    return list(plan.waypoints)


def significant_digits(decimal: str) -> int:
    """Digits carried by a decimal string, leading zeros excluded."""
    mantissa = decimal.strip().lstrip("+-").lower().split("e")[0].replace(".", "")
    return len(mantissa.lstrip("0")) or 1


def _recognize(z, tol):
    z = mpmath.mpc(z)
    if abs(z.imag) >= tol:
        return None
    return recognize_rational(z.real, 10**6, tol)


def run_verification(config: RunConfig) -> DeligneReport:
    prec = config.precision
    op = load_operator(config.operator)
    md = config.mirror_data()
    work = prec + GUARD_DIGITS
    with mpmath.workdps(work):
        waypoints = waypoints_for(config, op)
        target = parse_point(config.target)
        if abs(waypoints[-1] - target) > 0:
            raise ValueError("path does not end at the target")
        W = transport(op, None, waypoints, prec)
        S = build_S(md, work)
        F = f_infinity(S, W)
        plus, minus = eigenspace_bases(F)
        cp = c_plus(S, W, plus)
        cm = c_minus(S, W, minus)
        cp_twisted, cm_twisted = tate_twist(cp, 2), tate_twist(cm, 2)
        cp_paper = normalized_c_plus_paper(W)
        cm_paper = normalized_c_minus_paper(W)

        f2, f2_src = resolve_form(config.f2, work, config.offline, config.cache_dir)
        f4, f4_src = resolve_form(config.f4, work, config.offline, config.cache_dir)
        lv = {
            "L_f2_1": l_value(f2, 1, work),
            "L_f4_1": l_value(f4, 1, work),
            "L_f4_2": l_value(f4, 2, work),
        }
        vperp = mpmath.mpf(config.vperp)
        ratio_plus = cp_paper / (lv["L_f2_1"] * lv["L_f4_2"])
        # the determinant carries pi^-3, not pi^3 (see README)
        ratio_minus = cm_paper * mpmath.pi**3 * vperp / (lv["L_f4_1"] * lv["L_f2_1"])
        ratio_minus_literal = cm_paper * vperp / (mpmath.pi**3 * lv["L_f4_1"] * lv["L_f2_1"])

        tol = default_tol(prec)
        rp = _recognize(ratio_plus, tol)
        # v_perp is an external decimal, so it caps the accuracy of the c- ratio
        vperp_digits = significant_digits(config.vperp)
        if vperp_digits < MIN_VPERP_DIGITS:
            logger.warning("v_perp has %d digits, fewer than %d; c- ratio left unrecognised", vperp_digits, MIN_VPERP_DIGITS)
            rm = None
        else:
            rm = _recognize(ratio_minus, default_tol(min(prec, vperp_digits)))
        digits = {}
        for key, ref in REFERENCE_L.items():
            with mpmath.workdps(60):
                digits[key] = digits_agreement(lv[key], mpmath.mpf(ref), cap=50)
        if rp is not None:
            digits["ratio_plus"] = digits_agreement(ratio_plus.real, mpmath.mpf(rp.num) / rp.den, cap=work)
        if rm is not None:
            digits["ratio_minus"] = digits_agreement(ratio_minus.real, mpmath.mpf(rm.num) / rm.den, cap=work)

    provenance = {
        "operator": op.name,
        "k": md.k if md.k is not None else config.k,
        "lambda": md.lam,
        "precision": prec,
        "target": config.target,
        "path": " -> ".join(_point(w) for w in waypoints),
        "f2_source": f2_src,
        "f4_source": f4_src,
        "f2_sign": f2.eps,
        "f4_sign": f4.eps,
    }
    return DeligneReport(
        f_infinity=F,
        plus_basis=plus,
        minus_basis=minus,
        c_plus=cp,
        c_minus=cm,
        c_plus_twisted=cp_twisted,
        c_minus_twisted=cm_twisted,
        c_plus_paper=cp_paper,
        c_minus_paper=cm_paper,
        l_values=lv,
        ratio_plus=ratio_plus,
        ratio_minus=ratio_minus,
        recognized_plus=rp,
        recognized_minus=rm,
        digits_agreement=digits,
        provenance=provenance | {"ratio_minus_literal": ratio_minus_literal},
    )


# ---------------------------------------------------------------------------
# Report serialisation
# ---------------------------------------------------------------------------


def _num(x, digits):
    with mpmath.workdps(digits + 5):
        return mpmath.nstr(x, digits, min_fixed=-5, max_fixed=5)


def _point(z):
    z = mpmath.mpc(z)
    if z.imag == 0:
        return mpmath.nstr(z.real, 12)
    return f"{mpmath.nstr(z.real, 12)}{'+' if z.imag >= 0 else '-'}{mpmath.nstr(abs(z.imag), 12)}i"


def _vectors(vs):
    return ";".join("(" + ",".join(str(x) for x in v) + ")" for v in vs)


def _matrix(rows):
    return ";".join(",".join(str(x) for x in r) for r in rows)


def report_items(report: DeligneReport) -> list[tuple[str, str]]:
    """Ordered (key, value) pairs; the kv format prints exactly these."""
    with mpmath.workdps(int(report.provenance["precision"]) + GUARD_DIGITS):
        return _report_items(report)


def _report_items(report: DeligneReport) -> list[tuple[str, str]]:
    p = report.provenance
    d = int(p["precision"])
    items: list[tuple[str, str]] = [
        ("operator", str(p["operator"])),
        ("k", str(p["k"])),
        ("lambda", str(p["lambda"])),
        ("precision", str(d)),
        ("target", str(p["target"])),
        ("path", str(p["path"])),
    ]
    F = report.f_infinity
    items.append(("f_infinity", _matrix(F.rational_entries) if F.rationalized else "unrecognized"))
    items.append(("f_infinity_residual", _num(F.residual, 5)))
    items.append(("plus_basis", _vectors(report.plus_basis)))
    items.append(("minus_basis", _vectors(report.minus_basis)))
    for name in ("c_plus", "c_minus", "c_plus_twisted", "c_minus_twisted", "c_plus_paper", "c_minus_paper"):
        z = mpmath.mpc(getattr(report, name))
        items.append((f"{name}_re", _num(z.real, d)))
        items.append((f"{name}_im", _num(z.imag, 5)))
    for key in ("L_f2_1", "L_f4_1", "L_f4_2"):
        items.append((key, _num(report.l_values[key], d)))
    for key in ("L_f2_1", "L_f4_1", "L_f4_2"):
        items.append((f"digits_{key}", str(report.digits_agreement[key])))
    items += [("f2_source", str(p["f2_source"])), ("f4_source", str(p["f4_source"]))]
    items += [("f2_sign", str(p["f2_sign"])), ("f4_sign", str(p["f4_sign"]))]
    for side in ("plus", "minus"):
        z = mpmath.mpc(getattr(report, f"ratio_{side}"))
        r = getattr(report, f"recognized_{side}")
        items.append((f"ratio_{side}_re", _num(z.real, d)))
        items.append((f"ratio_{side}_im", _num(z.imag, 5)))
        if r is None:
            items.append((f"ratio_{side}", "unrecognized"))
        else:
            items += [
                (f"ratio_{side}", str(r)),
                (f"ratio_{side}_num", str(r.num)),
                (f"ratio_{side}_den", str(r.den)),
                (f"ratio_{side}_height", str(r.height)),
                (f"ratio_{side}_residual", _num(r.residual, 5)),
                (f"digits_ratio_{side}", str(report.digits_agreement[f"ratio_{side}"])),
            ]
    lit = mpmath.mpc(p["ratio_minus_literal"])
    items.append(("ratio_minus_literal_re", _num(lit.real, 30)))
    items.append(("verdict", "verified" if report.verified else "not-verified"))
    return items


def format_kv(report: DeligneReport) -> str:
    return "\n".join(f"{k} {v}" for k, v in report_items(report)) + "\n"


def format_text(report: DeligneReport) -> str:
    items = dict(report_items(report))
    lines = [
        f"{items['operator']} (k = {items['k']}, lambda = {items['lambda']}) at phi = {items['target']}, {items['precision']} digits",
        f"path: {items['path']}",
        f"F_infinity = [{items['f_infinity'].replace(';', '], [')}]  (residual {items['f_infinity_residual']})",
        f"plus basis {items['plus_basis']}, minus basis {items['minus_basis']}",
        f"c+ (twisted by (2 pi i)^4) = {items['c_plus_twisted_re']}",
        f"c-                         = {items['c_minus_re']}",
        f"L(f2,1) = {items['L_f2_1']}  [{items['digits_L_f2_1']} digits vs reference]",
        f"L(f4,1) = {items['L_f4_1']}  [{items['digits_L_f4_1']} digits vs reference]",
        f"L(f4,2) = {items['L_f4_2']}  [{items['digits_L_f4_2']} digits vs reference]",
        f"c+_norm / (L(f2,1) L(f4,2))        = {items['ratio_plus_re']}",
        f"c-_norm pi^3 v / (L(f4,1) L(f2,1)) = {items['ratio_minus_re']}",
        f"ratio_plus = {items['ratio_plus']}",
        f"ratio_minus = {items['ratio_minus']}",
        f"verdict: {items['verdict']}",
    ]
    return "\n".join(lines) + "\n"


def format_report(report: DeligneReport, output: str) -> str:
    return format_kv(report) if output == "kv" else format_text(report)

