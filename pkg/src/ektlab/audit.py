"""Invariant audit: fast cross-module health checks with a pass/fail table.

Each row measures one structural invariant (closed-form agreement, symmetry,
monotonicity, convergence order) and compares it against its documented
threshold.  The table is what `ektlab audit` prints; any failing row makes
the command exit nonzero.  A fault-injection mode perturbs the helicoid
slope integrand to demonstrate that the first-integral check actually has
teeth (negative control).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from . import curves, graphs, helicoid, lifts, solver
from .spaces import (BasePoint, SpaceParams, build_triangle, conformal_factor,
                     interior_angle_at_p2, law_of_cosines)

__all__ = ["AuditRow", "run_audit", "format_table"]

_SEED = 20260814


@dataclass
class AuditRow:
    name: str
    passed: bool
    measured: float
    threshold: str


def _check_conformal_factor() -> Tuple[float, bool]:
    rng = np.random.default_rng(_SEED)
    worst = 0.0
    for kappa in (0.0, -0.75, -1.0):
        params = SpaceParams(kappa=kappa, tau=0.5)
        lim = 0.9 * (2.0 / math.sqrt(-kappa)) if kappa < 0 else 3.0
        for _ in range(50):
            x, y = rng.uniform(-lim / 2, lim / 2, size=2)
            direct = 1.0 / (1.0 + kappa * (x * x + y * y) / 4.0)
            worst = max(worst, abs(conformal_factor(BasePoint(x, y), params) - direct))
    return worst, worst < 1e-15


def _check_closed_form_graphs() -> Tuple[float, bool]:
    rng = np.random.default_rng(_SEED + 1)
    worst = 0.0
    for kappa in (0.0, -0.75, -1.0):
        for tau in (0.0, 0.5):
            params = SpaceParams(kappa=kappa, tau=tau)
            forms = [graphs.umbrella_graph()]
            if kappa == 0.0:
                forms.append(graphs.shear_graph(params))
            else:
                forms.append(graphs.arctan_graph(params))
            lim = 0.8 * (2.0 / math.sqrt(-kappa)) if kappa < 0 else 2.0
            pts = rng.uniform(-lim / 2, lim / 2, size=(40, 2))
            for g in forms:
                h = graphs.graph_mean_curvature(g, pts[:, 0], pts[:, 1], params)
                worst = max(worst, float(np.max(np.abs(h))))
    return worst, worst < 1e-8


def _check_law_of_cosines() -> Tuple[float, bool]:
    worst = 0.0
    for kappa in (-0.36, -1.0):
        for k in (2, 3):
            s = law_of_cosines(1.0, 2.0, k, kappa) - law_of_cosines(2.0, 1.0, k, kappa)
            worst = max(worst, abs(s))
            inc_a = law_of_cosines(1.2, 1.0, k, kappa) - law_of_cosines(1.0, 1.0, k, kappa)
            inc_b = law_of_cosines(1.0, 1.2, k, kappa) - law_of_cosines(1.0, 1.0, k, kappa)
            if inc_a <= 0 or inc_b <= 0:
                worst = max(worst, 1.0)
    # curvature correction scales like |kappa| a b ell, so the flat-limit
    # comparison needs sub-unit sides to sit below 1e-6 at kappa = -1e-4
    a, b = 0.3, 0.4
    flat = math.sqrt(a * a + b * b - 2.0 * a * b * math.cos(math.pi / 3))
    near = law_of_cosines(a, b, 3, -1e-4)
    worst = max(worst, abs(near - flat))
    return worst, worst < 1e-6


def _check_holonomy() -> Tuple[float, bool]:
    params = SpaceParams(kappa=0.0, tau=0.5)
    worst = 0.0
    for r in (0.5, 1.0, 2.0):
        gap = lifts.holonomy_gap(lifts.circle_path(r), params)
        worst = max(worst, abs(gap - math.pi * r * r))
    gap_cw = lifts.holonomy_gap(lifts.circle_path(1.0, clockwise=True), params)
    worst = max(worst, abs(gap_cw + math.pi))
    square = [BasePoint(1, 1), BasePoint(-1, 1), BasePoint(-1, -1),
              BasePoint(1, -1), BasePoint(1, 1)]
    sq = [BasePoint(x, y) for x, y in _densify(square, 4000)]
    gap_sq = lifts.holonomy_gap(sq, params)
    area = lifts.enclosed_area(sq, params)
    worst = max(worst, abs(gap_sq - 2.0 * params.tau * area))
    return worst, worst < 1e-6


def _densify(path, n_per_side):
    out = []
    for p, q in zip(path[:-1], path[1:]):
        ts = np.linspace(0.0, 1.0, n_per_side, endpoint=False)
        for t in ts:
            out.append((p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)))
    out.append((path[-1].x, path[-1].y))
    return out


def _check_angle_threshold() -> Tuple[float, bool]:
    worst = 0.0
    for H in (0.1, 0.4):
        delta = math.sqrt(1.0 - 4.0 * H * H)
        kappa = 4.0 * H * H - 1.0
        for k in (2, 3, 4, 6):
            b_star = math.acosh(1.0 / math.sin(math.pi / k)) / delta
            beta = interior_angle_at_p2(b_star, k, kappa)
            worst = max(worst, abs(beta - math.pi / 2.0))
    return worst, worst < 1e-10


def _check_helicoid_oddness() -> Tuple[float, bool]:
    worst = 0.0
    for mu in (-3.0, -0.3, 2.0):
        for x in (0.3, 1.1, 2.7):
            worst = max(worst, abs(helicoid.g_mu(-x, mu) + helicoid.g_mu(x, mu)))
        t = helicoid.t_mu(mu)
        vs = [0.3 * min(t, 3.0), 0.7 * min(t, 3.0)]
        prof = helicoid.invert_profile(mu, vs + [-v for v in vs])
        f = dict(zip(prof.v.tolist(), prof.f.tolist()))
        for v in vs:
            worst = max(worst, abs(f[v] + f[-v]))
    return worst, worst < 1e-12


def _check_half_period() -> Tuple[float, bool]:
    pos = [helicoid.t_mu(m) for m in (0.6, 1.0, 2.0, 5.0, 10.0)]
    neg = [helicoid.t_mu(m) for m in (-10.0, -5.0, -2.0, -1.0, -0.6)]
    ok = all(b < a for a, b in zip(pos, pos[1:]))
    ok &= all(b > a for a, b in zip(neg, neg[1:]))
    ok &= pos[-1] < 0.5 * pos[1]
    margin = min(min(a - b for a, b in zip(pos, pos[1:])),
                 min(b - a for a, b in zip(neg, neg[1:])))
    return margin, ok


def _check_inversion_identity() -> Tuple[float, bool]:
    worst = 0.0
    for mu in (-3.0, -0.8, 0.25, 1.7):
        t = helicoid.t_mu(mu)
        grid = np.linspace(-0.85, 0.85, 9) * min(t, 4.0)
        prof = helicoid.invert_profile(mu, grid)
        for v, f in zip(prof.v, prof.f):
            worst = max(worst, abs(helicoid.g_mu(float(f), mu) - v))
    return worst, worst < 1e-9


def _check_residuals_quarter() -> Tuple[float, bool]:
    worst = 0.0
    for mu in (0.25, -0.25):
        grid = helicoid.residual_grid(mu, spacing=1e-3, fraction=0.9, window=2.0)
        prof = helicoid.invert_profile(mu, grid)
        worst = max(worst, helicoid.minimality_residual(prof))
        worst = max(worst, helicoid.first_integral_residual(prof))
    return worst, worst < 1e-6


def _check_curvature_identity() -> Tuple[float, bool]:
    rng = np.random.default_rng(_SEED + 2)
    mus = np.where(rng.random(200) < 0.5, -1.0, 1.0) * rng.uniform(0.5 + 1e-9, 20.0, 200)
    ss = rng.uniform(-30.0, 30.0, 200)
    worst = 0.0
    for s, mu in zip(ss, mus):
        worst = max(worst, abs(curves.kg_critical(s, mu)
                               + helicoid.theta_prime(s, mu) - 1.0))
    return worst, worst < 1e-12


def _check_angle_range() -> Tuple[float, bool]:
    prof = helicoid.invert_profile(-3.0, np.linspace(-0.4, 0.4, 21))
    grid_u = np.linspace(-3.0, 3.0, 25)
    worst = 0.0
    ok = True
    for v in prof.v:
        for u in grid_u:
            nu = helicoid.angle_function(float(u), float(v), prof)
            if nu > 1.0 + 1e-12:
                ok = False
            if abs(u) > 1e-12 or abs(v) > 1e-12:
                if nu >= 1.0:
                    ok = False
            else:
                worst = max(worst, abs(nu - 1.0))
    return worst, ok and worst < 1e-12


def _check_integrator_order() -> Tuple[float, bool]:
    end_true = math.tanh(1.0)  # geodesic through 0: r = tanh(s/2) at s = 2
    errs = []
    for step in (2e-3, 1e-3):
        c = curves.integrate_prescribed_curvature(
            lambda s: 0.0, (0.0, 2.0), (0.0, 0.0), 0.0, step=step)
        errs.append(abs(c.x[-1] - end_true))
    ratio = errs[0] / errs[1]
    return ratio, 3.0 <= ratio <= 5.0


def _check_dihedral_closure() -> Tuple[float, bool]:
    # quarter of a hyperbolic circle about the origin closes under k=2
    rho = 1.0
    kg = 1.0 / math.tanh(rho)
    r0 = math.tanh(rho / 2.0)
    quarter = math.pi / 2.0 * math.sinh(rho)
    c = curves.integrate_prescribed_curvature(
        lambda s: kg, (0.0, quarter), (r0, 0.0), math.pi / 2.0, step=2e-4)
    asm = curves.assemble_domain(c, 2)
    return asm.max_gap, asm.closed and asm.max_gap <= 1e-8


def _check_solver_roundtrip() -> Tuple[float, bool]:
    sols = solver.solve_jenkins_serrin(1.0, 1.0, 2, 0.4, [2.0, 4.0], 0.05)
    last = sols[-1]
    nu = last.nu().values
    if np.any(nu <= 0.0) or np.any(nu > 1.0 + 1e-9):
        return float(np.max(nu)), False
    imax = int(np.argmax(nu))
    off = float(last.domain.node_metric_radius[imax])
    desc = all(b <= a + 1e-12 for a, b in
               zip(last.energy_history, last.energy_history[1:]))
    d_val = solver.distance_d_single(last)
    bounded = d_val <= 1.0  # nu <= 1 along a side of length b = 1
    return off, desc and bounded and off <= last.domain.target_h + 1e-12


_CHECKS: List[Tuple[str, str, Callable[[], Tuple[float, bool]]]] = [
    ("conformal-factor-closed-form", "< 1e-15", _check_conformal_factor),
    ("closed-form-graph-residuals", "< 1e-8", _check_closed_form_graphs),
    ("law-of-cosines-properties", "< 1e-6", _check_law_of_cosines),
    ("holonomy-gap-vs-area", "< 1e-6", _check_holonomy),
    ("interior-angle-threshold", "< 1e-10", _check_angle_threshold),
    ("helicoid-oddness", "< 1e-12", _check_helicoid_oddness),
    ("half-period-monotonicity", "margin > 0", _check_half_period),
    ("profile-inversion-identity", "< 1e-9", _check_inversion_identity),
    ("helicoid-residuals-mu-quarter", "< 1e-6", _check_residuals_quarter),
    ("critical-curvature-identity", "< 1e-12", _check_curvature_identity),
    ("angle-function-range", "nu <= 1, max at 0", _check_angle_range),
    ("frenet-integrator-order", "ratio in [3, 5]", _check_integrator_order),
    ("dihedral-assembly-closure", "gap <= 1e-8", _check_dihedral_closure),
    ("solver-nu-energy-distance", "max-nu at p0", _check_solver_roundtrip),
]


def run_audit(fault_eps: float = 0.0) -> List[AuditRow]:
    """Run every invariant check; optionally with the integrand fault active."""
    rows = []
    ctx = helicoid.fault_injection(fault_eps) if fault_eps else None
    try:
        if ctx is not None:
            ctx.__enter__()
        for name, thresh, fn in _CHECKS:
            try:
                measured, ok = fn()
            except Exception as exc:  # an invariant check must never crash the table
                rows.append(AuditRow(name, False, float("nan"), f"raised {type(exc).__name__}"))
                continue
            rows.append(AuditRow(name, bool(ok), float(measured), thresh))
    finally:
        if ctx is not None:
            ctx.__exit__(None, None, None)
    return rows


def format_table(rows: List[AuditRow]) -> str:
    width = max(len(r.name) for r in rows)
    lines = []
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status}  measured={r.measured:.6e}  ({r.threshold})")
    n_fail = sum(not r.passed for r in rows)
    lines.append(f"{n_fail} of {len(rows)} checks failed" if n_fail
                 else f"all {len(rows)} checks passed")
    return "\n".join(lines)
