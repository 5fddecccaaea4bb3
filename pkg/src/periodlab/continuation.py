"""Analytic continuation of the 4-dimensional solution space by Taylor stepping.

A state is a 4x4 matrix whose rows are solutions and whose columns hold the
value and first three phi-derivatives. Each step re-expands every row around
the current point with the ODE-induced recurrence and evaluates the local
series at the next point; steps never exceed half the distance to the
nearest singular point, so each local series converges at least like 2^-n.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from math import comb

import mpmath
from mpmath import mp

from .errors import ClearanceError, ParseError, PrecisionError, SingularStepError, StepSizeError
from .numeric import GUARD_DIGITS, parse_real, to_mpc
from .pf_core import (
    BranchedPoint,
    CanonicalBasis,
    DOperator,
    Operator,
    StateMatrix,
    convergence_radius,
    eval_canonical,
    finite_singular_points,
    required_truncation,
    theta_to_d,
)
from .recognition import recognize_rational

__all__ = [
    "PathPlan",
    "StateMatrix",
    "plan_path",
    "loop_path",
    "read_path_file",
    "taylor_step",
    "transport",
    "transport_state",
    "transport_nodes",
    "monodromy",
    "MonodromyResult",
]

logger = logging.getLogger(__name__)

STEP_RATIO = mpmath.mpf(1) / 2
# relative slack on the step-size precondition, absorbs rounding in |target - at|
_STEP_SLACK = mpmath.mpf("1e-10")


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathPlan:
    waypoints: tuple[mpmath.mpc, ...]
    clearance: mpmath.mpf
    around: mpmath.mpc | None = None

    def __len__(self):
        return len(self.waypoints)

    def reversed(self) -> "PathPlan":
        return PathPlan(tuple(reversed(self.waypoints)), self.clearance, self.around)

    def then(self, other: "PathPlan") -> "PathPlan":
        if not self.waypoints:
            return other
        if not other.waypoints:
            return self
        if abs(self.waypoints[-1] - other.waypoints[0]) > 0:
            raise ValueError("paths do not join")
        return PathPlan(
            self.waypoints + other.waypoints[1:], min(self.clearance, other.clearance), self.around or other.around
        )


def segment_distance(a, b, s) -> mpmath.mpf:
    """Distance from point s to the closed segment [a, b]."""
    d = b - a
    if d == 0:
        return abs(s - a)
    t = ((s - a) * mpmath.conj(d)).real / abs(d) ** 2
    t = min(max(t, 0), 1)
    return abs(a + t * d - s)


def path_clearance(waypoints, singular, exclude=None) -> mpmath.mpf:
    pts = [s for s in singular if exclude is None or abs(s - exclude) > 0]
    if not pts or len(waypoints) == 0:
        return mpmath.inf
    if len(waypoints) == 1:
        return min(abs(waypoints[0] - s) for s in pts)
    return min(segment_distance(a, b, s) for a, b in zip(waypoints, waypoints[1:]) for s in pts)


def _upper_normal(d) -> mpmath.mpc:
    n = mpmath.mpc(0, 1) * d / abs(d)
    if n.imag < 0 or (n.imag == 0 and n.real < 0):
        n = -n
    return n


def _refine(a, b, singular, delta, depth=0) -> list:
    """Interior waypoints making [a, b] keep distance >= delta from singular."""
    bad = [(segment_distance(a, b, s), s) for s in singular]
    bad = [(dist, s) for dist, s in bad if dist < delta]
    if not bad:
        return []
    if depth > 12:
        raise ClearanceError("could not find a detour with the requested clearance")
    _, s = min(bad, key=lambda t: (t[0], t[1].real, t[1].imag))
    n = _upper_normal(b - a)
    h = 2 * delta
    for _ in range(40):
        w = s + n * h
        ok_point = all(abs(w - t) >= delta for t in singular)
        if ok_point and segment_distance(a, w, s) >= delta and segment_distance(w, b, s) >= delta:
            break
        h *= 2
    else:
        raise ClearanceError("could not find a detour with the requested clearance")
    return _refine(a, w, singular, delta, depth + 1) + [w] + _refine(w, b, singular, delta, depth + 1)


def plan_path(frm, to, singular, delta, via=()) -> PathPlan:
    """Polyline from ``frm`` to ``to`` keeping distance >= delta from ``singular``.

    The straight segment is used when it is clear. Otherwise detour waypoints
    are inserted at perpendicular offsets on the upper-half-plane side of each
    offending singularity. Extra ``via`` points are honoured in order.
    """
    frm, to = to_mpc(frm), to_mpc(to)
    delta = mpmath.mpf(delta)
    if delta <= 0:
        raise ValueError("clearance must be positive")
    singular = [to_mpc(s) for s in singular]
    if frm == to and not via:
        return PathPlan((), delta)
    for p in (frm, to):
        near = [s for s in singular if abs(p - s) < delta]
        if near:
            raise ClearanceError(f"endpoint {mpmath.nstr(p, 8)} is within {mpmath.nstr(delta, 4)} of a singularity")
    anchors = [frm] + [to_mpc(v) for v in via] + [to]
    points = [anchors[0]]
    for a, b in zip(anchors, anchors[1:]):
        if a == b:
            continue
        points += _refine(a, b, singular, delta) + [b]
    return PathPlan(tuple(points), delta)


def loop_path(base, center, singular, delta=None, vertices: int = 16) -> PathPlan:
    """Counterclockwise loop around ``center`` starting and ending at ``base``.

    When the circle through ``base`` keeps clearance from every other singular
    point it is used directly; otherwise a lasso is built: a planned approach
    to a smaller circle, the circle, and the approach reversed.
    """
    base, center = to_mpc(base), to_mpc(center)
    others = [to_mpc(s) for s in singular if abs(to_mpc(s) - center) > 0]
    gap = min((abs(s - center) for s in others), default=mpmath.inf)
    radius = abs(base - center)
    if radius == 0:
        raise ClearanceError("base point coincides with the loop centre")
    if delta is None:
        base_gap = min((abs(s - base) for s in others), default=mpmath.inf)
        delta = min(radius, gap, 2 * base_gap) / 4
    delta = mpmath.mpf(delta)

    def circle(r, start_angle):
        pts = [center + r * mpmath.expjpi(start_angle / mpmath.pi + 2 * mpmath.mpf(k) / vertices) for k in range(vertices)]
        # the vertex list closes on the start point
        return pts + [pts[0]]

    theta = mpmath.arg(base - center)
    ring = circle(radius, theta)
    ring[0] = ring[-1] = base
    if radius + delta <= gap and path_clearance(ring, others) >= delta:
        return PathPlan(tuple(ring), delta, center)
    r = gap / 2
    if r < delta:
        delta = r / 2
    ring = circle(r, theta)
    approach = plan_path(base, ring[0], others + [center], delta)
    loop = approach.waypoints + tuple(ring[1:]) + tuple(reversed(approach.waypoints))[1:]
    if path_clearance(loop, others) < delta:
        raise ClearanceError("loop would pass too close to another singular point")
    return PathPlan(loop, delta, center)


def read_path_file(path) -> list[mpmath.mpc]:
    """Waypoints from a file with one 're im' pair per line (decimals or p/q)."""
    points = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected '<re> <im>'", lineno)
            try:
                points.append(mpmath.mpc(parse_real(parts[0]), parse_real(parts[1])))
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"bad number in {line!r}", lineno) from None
    return points


# ---------------------------------------------------------------------------
# Taylor stepping
# ---------------------------------------------------------------------------


def _shift_poly(poly, c):
    """Coefficients of p(c + h) in powers of h."""
    n = len(poly)
    out = [mpmath.mpc(0)] * n
    cpow = [mpmath.mpc(1)]
    for _ in range(n):
        cpow.append(cpow[-1] * c)
    for k, a in enumerate(poly):
        if a:
            for m in range(k + 1):
                out[m] += a * comb(k, m) * cpow[k - m]
    return out


def _dop_singular(dop: DOperator) -> list:
    lead = list(dop.coeffs[-1])
    low = 0
    while lead[low] == 0:
        low += 1
    pts = [mpmath.mpc(0)] if low else []
    rest = lead[low:]
    while rest and rest[-1] == 0:
        rest.pop()
    if len(rest) > 1:
        pts += [mpmath.mpc(r) for r in mpmath.polyroots(list(reversed(rest)), maxsteps=200, extraprec=2 * mp.prec)]
    return pts


def taylor_step(dop: DOperator, state: StateMatrix, target, singular=None) -> StateMatrix:
    """Re-expand every row at ``state.at`` and evaluate at ``target``."""
    c = state.at.value
    target = to_mpc(target)
    delta = target - c
    if delta == 0:
        return state
    if singular is None:
        singular = _dop_singular(dop)
    dist = min((abs(c - s) for s in singular), default=mpmath.inf)
    if abs(delta) > STEP_RATIO * dist * (1 + _STEP_SLACK):
        raise StepSizeError(
            f"step {mpmath.nstr(abs(delta), 6)} exceeds half the clearance {mpmath.nstr(dist, 6)}"
        )
    order = len(dop.coeffs) - 1
    shifted = [_shift_poly(p, c) for p in dop.coeffs]
    lead = shifted[order][0]
    scale = max(abs(x) for p in shifted for x in p)
    if abs(lead) <= scale * mpmath.mpf(10) ** (-mp.dps + 5):
        raise SingularStepError(f"leading coefficient vanishes at {mpmath.nstr(c, 8)}")

    # work in u = h / delta so that the target sits at u = 1
    q = []
    for j, p in enumerate(shifted):
        q.append([a * delta ** (m - j) for m, a in enumerate(p)])
    q_lead = q[order][0]
    terms = [(j, m, a) for j, p in enumerate(q) for m, a in enumerate(p) if a != 0 and not (j == order and m == 0)]
    width = max(m for _, m, _ in terms) + 1 if terms else 1

    rows = state.entries
    u = [[row[d] * delta**d / math.factorial(d) for d in range(order)] for row in rows]
    eps = mpmath.mpf(2) ** (-mp.prec)
    size = [max(abs(x) for x in ur) or mpmath.mpf(1) for ur in u]
    small = 0
    n = 0
    cap = 40 * mp.dps + 200
    while True:
        nxt = []
        for ur in u:
            acc = 0
            for j, m, a in terms:
                k = n - m
                if k < 0:
                    continue
                acc += a * _rising(k, j) * ur[k + j]
            nxt.append(-acc / (q_lead * _rising(n, order)))
        for ur, val in zip(u, nxt):
            ur.append(val)
        n += 1
        weight = (n + order) ** 3
        if all(abs(val) * weight <= eps * sz for val, sz in zip(nxt, size)):
            small += 1
        else:
            small = 0
        for i, val in enumerate(nxt):
            size[i] = max(size[i], abs(val))
        if small >= width + order:
            break
        if n > cap:
            raise PrecisionError("local Taylor series failed to converge", required=cap)

    out = []
    for ur in u:
        vals = []
        for d in range(order):
            acc = mpmath.mpc(0)
            for k in range(len(ur) - 1, d - 1, -1):
                acc += comb(k, d) * ur[k]
            vals.append(acc * math.factorial(d) / delta**d)
        out.append(tuple(vals))
    if state.at.value != 0:
        log_value = state.at.log_value + mpmath.log(1 + delta / c)
    else:
        log_value = mpmath.log(target)
    return StateMatrix(BranchedPoint(target, log_value), tuple(out), state.precision)


def _rising(k: int, j: int) -> int:
    """(k+1)(k+2)...(k+j)."""
    out = 1
    for t in range(1, j + 1):
        out *= k + t
    return out


def _substeps(a, b, singular):
    """Deterministic intermediate points with each step <= half the clearance."""
    pts = []
    cur = a
    while True:
        remaining = b - cur
        if remaining == 0:
            return pts
        dist = min((abs(cur - s) for s in singular), default=mpmath.inf)
        allowed = STEP_RATIO * dist
        if abs(remaining) <= allowed:
            pts.append(b)
            return pts
        cur = cur + remaining * (allowed / abs(remaining))
        pts.append(cur)


def transport_nodes(op: Operator, state: StateMatrix, waypoints, dop: DOperator | None = None):
    """Yield the state at every sub-step node along the polyline."""
    dop = dop or theta_to_d(op)
    singular = finite_singular_points(op)
    yield state
    cur = state
    pts = [to_mpc(w) for w in waypoints]
    if pts and abs(pts[0] - cur.at.value) > 0:
        pts = [cur.at.value] + pts
    for a, b in zip(pts, pts[1:]):
        for nxt in _substeps(a, b, singular):
            cur = taylor_step(dop, cur, nxt, singular)
            yield cur


def transport_state(op: Operator, state: StateMatrix, waypoints, dop: DOperator | None = None) -> StateMatrix:
    cur = state
    for cur in transport_nodes(op, state, waypoints, dop):
        pass
    return cur


def transport(op: Operator, basis: CanonicalBasis | None, path, prec: int) -> StateMatrix:
    """Canonical Wronskian continued along ``path`` (PathPlan or waypoint list).

    Seeds with the Frobenius evaluation at the first waypoint, which must lie
    in the convergence disc at 0; the principal branch of log is used there.
    Runs at ``prec`` + guard digits; the result carries the working precision.
    """
    waypoints = path.waypoints if isinstance(path, PathPlan) else tuple(path)
    if not waypoints:
        raise ValueError("empty path")
    with mpmath.workdps(prec + GUARD_DIGITS):
        pts = [to_mpc(w) for w in waypoints]
        start = BranchedPoint.principal(pts[0])
        if basis is None or basis.tail_bound(abs(pts[0])) >= mpmath.mpf(10) ** (-(prec + GUARD_DIGITS + 10)):
            basis = required_truncation(op, abs(pts[0]), prec + GUARD_DIGITS)
        seed = eval_canonical(basis, start, prec + GUARD_DIGITS)
        return transport_state(op, seed, pts[1:])


# ---------------------------------------------------------------------------
# Monodromy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonodromyResult:
    matrix: mpmath.matrix
    rational: tuple[tuple, ...] | None
    residual: mpmath.mpf
    path: PathPlan

    @property
    def rationalized(self) -> bool:
        return self.rational is not None


def rationalize_matrix(m, tol, max_height=10**6):
    """Entry-wise rational recognition; None when any entry fails."""
    rows = []
    worst = mpmath.mpf(0)
    for i in range(m.rows):
        row = []
        for j in range(m.cols):
            z = mpmath.mpc(m[i, j])
            if abs(z.imag) >= tol:
                return None, mpmath.inf
            r = recognize_rational(z.real, max_height, tol)
            if r is None:
                return None, mpmath.inf
            worst = max(worst, abs(z - mpmath.mpf(r.num) / r.den))
            row.append(r.fraction)
        rows.append(tuple(row))
    return tuple(rows), worst


def monodromy(op: Operator, base, center, prec: int, approach=None, vertices: int = 16, loop=None) -> MonodromyResult:
    """Monodromy of the canonical basis along a counterclockwise loop around ``center``.

    The canonical state at ``base`` is obtained by continuing from the
    Frobenius seed along ``approach`` (waypoints starting inside the
    convergence disc; defaults to ``base`` itself, which then has to lie in
    the disc). Returns M with W_after_loop = M * W_base. An explicit closed
    ``loop`` (PathPlan or waypoints from ``base`` back to ``base``) replaces
    the planned circle; ``center`` is then only recorded.
    """
    with mpmath.workdps(prec + GUARD_DIGITS):
        base = to_mpc(base)
        center = to_mpc(center)
        singular = finite_singular_points(op)
        path0 = [to_mpc(w) for w in (approach or [base])]
        if abs(path0[-1] - base) > 0:
            path0.append(base)
        w_base = transport(op, None, path0, prec)
        if loop is None:
            plan = loop_path(base, center, singular, vertices=vertices)
        else:
            pts = tuple(to_mpc(w) for w in (loop.waypoints if isinstance(loop, PathPlan) else loop))
            if abs(pts[0] - base) > 0 or abs(pts[-1] - base) > 0:
                raise ValueError("explicit loop must start and end at the base point")
            plan = PathPlan(pts, path_clearance(pts, singular), center)
        w_loop = transport_state(op, w_base, plan.waypoints[1:])
        m = w_loop.matrix() * mpmath.inverse(w_base.matrix())
        tol = mpmath.mpf(10) ** (-(prec // 2))
        rational, residual = rationalize_matrix(m, tol)
        return MonodromyResult(m, rational, residual, plan)
