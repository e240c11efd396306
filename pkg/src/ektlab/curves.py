"""Prescribed-curvature curves in the hyperbolic plane and symmetry assembly.

Conjugate symmetry curves of the vertical-plane boundaries live in the
Poincare disk of curvature -1 (chart radius 1).  A unit-speed curve with
tangent angle phi and signed geodesic curvature kg satisfies

    x' = (1 - r^2) cos(phi) / 2,
    y' = (1 - r^2) sin(phi) / 2,
    phi' = kg(s) - x sin(phi) + y cos(phi),

which is the conformal Frenet system for the metric 2|dz|/(1-|z|^2); the
sign convention makes a counterclockwise circle of hyperbolic radius rho
carry kg = coth(rho) > 0.  Integration is one-step Heun with a fixed step,
so halving the step cuts endpoint errors about 4x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .spaces import GeometryError

__all__ = [
    "PlanarCurve",
    "HeightProfile",
    "AssembledBoundary",
    "integrate_prescribed_curvature",
    "integrate_prescribed_curvature_batch",
    "kg_critical",
    "conjugate_vertical_boundary",
    "conjugate_horizontal_profile",
    "assemble_domain",
    "disk_distance",
    "distance_to_geodesic_diameter",
    "curve_csv_lines",
]

_DEFAULT_STEP = 5e-4
_EPS_IDEAL = 1e-6
_DEFAULT_S_CAP = 60.0


def disk_distance(p, q) -> float:
    """Hyperbolic distance between two points of the unit Poincare disk."""
    pz = complex(p[0], p[1])
    qz = complex(q[0], q[1])
    num = abs(qz - pz)
    den = abs(1.0 - pz.conjugate() * qz)
    t = num / den
    if t >= 1.0:
        return math.inf
    return 2.0 * math.atanh(t)


def distance_to_geodesic_diameter(x, y, axis_angle: float = 0.0):
    """Signed hyperbolic distance to the diameter at the given angle.

    Positive on the left of the oriented diameter; used as the equidistant
    oracle: points at chart position z have distance
    asinh(2 d_e / (1 - |z|^2)) where d_e is the signed Euclidean distance
    to the line.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d_e = y * math.cos(axis_angle) - x * math.sin(axis_angle)
    return np.arcsinh(2.0 * d_e / (1.0 - x * x - y * y))


@dataclass(frozen=True)
class PlanarCurve:
    """Unit-speed sampled curve in the unit disk.

    samples view the arrays as (point, tangent angle, arclength) rows;
    kg_samples holds the prescribed curvature at each sample.
    """

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    phi: np.ndarray
    kg_samples: np.ndarray
    truncated_reason: Optional[str] = None
    total_turning: Optional[float] = None
    theta_prime_samples: Optional[np.ndarray] = None

    @property
    def samples(self):
        return [((xi, yi), pi, si) for xi, yi, pi, si in
                zip(self.x.tolist(), self.y.tolist(), self.phi.tolist(), self.s.tolist())]

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def endpoint(self) -> Tuple[float, float]:
        return float(self.x[-1]), float(self.y[-1])

    def max_unit_speed_defect(self) -> float:
        """Largest |measured segment length - delta s| over the samples."""
        z = self.x + 1j * self.y
        num = np.abs(np.diff(z))
        den = np.abs(1.0 - np.conj(z[:-1]) * z[1:])
        d = 2.0 * np.arctanh(np.minimum(num / den, 1.0 - 1e-16))
        return float(np.max(np.abs(d - np.diff(self.s))))

    def mirrored_x(self) -> "PlanarCurve":
        """Reflection across the x-axis (flips the curvature sign)."""
        return replace(
            self, y=-self.y, phi=-self.phi, kg_samples=-self.kg_samples,
            total_turning=None if self.total_turning is None else -self.total_turning,
            theta_prime_samples=None if self.theta_prime_samples is None
            else -self.theta_prime_samples)


@dataclass(frozen=True)
class HeightProfile:
    """Conjugated horizontal geodesic: cumulative base length and height."""

    s: np.ndarray
    base_arclength: np.ndarray
    height: np.ndarray

    @property
    def samples(self):
        return list(zip(self.s.tolist(), self.base_arclength.tolist(),
                        self.height.tolist()))

    @property
    def total_base_length(self) -> float:
        return float(self.base_arclength[-1])

    @property
    def total_height_drop(self) -> float:
        return float(abs(self.height[-1] - self.height[0]))


def curve_csv_lines(curve: PlanarCurve) -> List[str]:
    """CSV dump of a sampled curve, one row per sample."""
    head = []
    if curve.truncated_reason is not None:
        head.append(f"# truncated_reason={curve.truncated_reason}")
    if curve.total_turning is not None:
        head.append(f"# total_turning={curve.total_turning!r}")
    head.append("s,x,y,phi,kg")
    rows = [f"{s!r},{x!r},{y!r},{p!r},{k!r}"
            for s, x, y, p, k in zip(curve.s.tolist(), curve.x.tolist(),
                                     curve.y.tolist(), curve.phi.tolist(),
                                     curve.kg_samples.tolist())]
    return head + rows


def _frenet_rhs(state: np.ndarray, kg: np.ndarray) -> np.ndarray:
    x, y, phi = state[..., 0], state[..., 1], state[..., 2]
    fac = 0.5 * (1.0 - x * x - y * y)
    return np.stack([fac * np.cos(phi), fac * np.sin(phi),
                     kg - x * np.sin(phi) + y * np.cos(phi)], axis=-1)


def _march(kg_fn, s0: float, s_end: float, state0, step: float,
           eps_ideal: float, s_cap: float):
    """Heun march from s0 toward s_end (may be +-inf); returns sample lists."""
    direction = 1.0 if s_end >= s0 else -1.0
    h = direction * step
    if abs(h) < 1e-14:
        raise GeometryError("integration step underflow")
    span_cap = s_cap if math.isinf(s_end) else abs(s_end - s0)
    n_max = int(math.ceil(span_cap / step)) + 1
    out_s = [s0]
    out_state = [np.asarray(state0, dtype=float)]
    out_kg = [float(kg_fn(s0))]
    reason = None
    s, state = s0, np.asarray(state0, dtype=float)
    for i in range(n_max):
        remaining = abs(s_end - s)
        hh = h if math.isinf(s_end) or remaining > step else direction * remaining
        if abs(hh) < 1e-15:
            break
        k1 = float(kg_fn(s))
        f1 = _frenet_rhs(state, k1)
        pred = state + hh * f1
        k2 = float(kg_fn(s + hh))
        f2 = _frenet_rhs(pred, k2)
        new = state + 0.5 * hh * (f1 + f2)
        r = math.hypot(new[0], new[1])
        if r >= 1.0:
            reason = "left disk numerically"
            break
        s = s + hh
        state = new
        out_s.append(s)
        out_state.append(state)
        out_kg.append(float(kg_fn(s)))
        if 1.0 - r < eps_ideal:
            reason = "ideal boundary"
            break
        if math.isinf(s_end) and abs(s - s0) >= s_cap:
            reason = "arclength cap"
            break
    return out_s, out_state, out_kg, reason


def integrate_prescribed_curvature(kg: Callable[[float], float],
                                   s_range: Tuple[float, float],
                                   init_point: Tuple[float, float],
                                   init_angle: float,
                                   step: float = _DEFAULT_STEP,
                                   eps_ideal: float = _EPS_IDEAL,
                                   s_cap: float = _DEFAULT_S_CAP) -> PlanarCurve:
    """Integrate the disk Frenet system with prescribed kg(s).

    The initial data sits at s_range[0] when finite, else at s = 0 with the
    curve extended in both directions.  Unbounded ends stop at boundary
    proximity 1 - |p| < eps_ideal (or the arclength cap, recorded in
    truncated_reason).
    """
    if step <= 0:
        raise GeometryError("integration step must be positive")
    s0, s1 = s_range
    if s1 <= s0:
        raise GeometryError("empty s_range")
    if math.hypot(*init_point) >= 1.0:
        raise GeometryError("initial point outside the open unit disk")
    state0 = (init_point[0], init_point[1], init_angle)
    if math.isinf(s0):
        anchor = 0.0 if math.isinf(s1) else s1
        if not math.isinf(s1):
            raise GeometryError("anchor the initial data at a finite s")
        back = _march(kg, anchor, -math.inf, state0, step, eps_ideal, s_cap)
        fwd = _march(kg, anchor, math.inf, state0, step, eps_ideal, s_cap)
        s = np.concatenate([np.array(back[0][::-1]), np.array(fwd[0][1:])])
        st = np.vstack([np.array(back[1][::-1]), np.array(fwd[1][1:])])
        kgv = np.concatenate([np.array(back[2][::-1]), np.array(fwd[2][1:])])
        reason = back[3] or fwd[3]
    else:
        out_s, out_state, out_kg, reason = _march(kg, s0, s1, state0, step,
                                                  eps_ideal, s_cap)
        s = np.array(out_s)
        st = np.vstack(out_state)
        kgv = np.array(out_kg)
    return PlanarCurve(s=s, x=st[:, 0], y=st[:, 1], phi=st[:, 2],
                       kg_samples=kgv, truncated_reason=reason)


def integrate_prescribed_curvature_batch(kg_batch: Callable[[float], np.ndarray],
                                         s_span: float,
                                         init_points: np.ndarray,
                                         init_angles: np.ndarray,
                                         step: float = 2e-3,
                                         eps_ideal: float = _EPS_IDEAL) -> List[PlanarCurve]:
    """March many curves at once over s in [-s_span, s_span].

    kg_batch(s) returns the curvature of every curve at parameter s.  Curves
    freeze in place once they reach boundary proximity; each returned curve
    is trimmed to its active range.  Used for randomized property sweeps
    where per-curve Python loops would dominate.
    """
    init_points = np.asarray(init_points, dtype=float)
    n = init_points.shape[0]
    halves = []
    for direction in (1.0, -1.0):
        n_steps = int(math.ceil(s_span / step))
        states = np.column_stack([init_points, np.asarray(init_angles, dtype=float)])
        traj = np.empty((n_steps + 1, n, 3))
        kgs = np.empty((n_steps + 1, n))
        traj[0] = states
        kgs[0] = kg_batch(0.0)
        active = np.ones(n, dtype=bool)
        stop_idx = np.full(n, n_steps, dtype=int)
        s = 0.0
        for i in range(n_steps):
            hh = direction * step
            k1 = kg_batch(s)
            f1 = _frenet_rhs(states, k1)
            pred = states + hh * f1
            k2 = kg_batch(s + hh)
            f2 = _frenet_rhs(pred, k2)
            new = np.where(active[:, None], states + 0.5 * hh * (f1 + f2), states)
            r2 = new[:, 0] ** 2 + new[:, 1] ** 2
            done = active & (1.0 - np.sqrt(r2) < eps_ideal)
            stop_idx[done] = np.minimum(stop_idx[done], i + 1)
            active &= ~done
            states = new
            s += hh
            traj[i + 1] = states
            kgs[i + 1] = k2
        halves.append((traj, kgs, stop_idx))
    curves = []
    svals = step * np.arange(halves[0][0].shape[0])
    for j in range(n):
        fw_traj, fw_kg, fw_stop = halves[0]
        bw_traj, bw_kg, bw_stop = halves[1]
        nf, nb = fw_stop[j] + 1, bw_stop[j] + 1
        s_arr = np.concatenate([-svals[1:nb][::-1], svals[:nf]])
        st = np.vstack([bw_traj[1:nb, j][::-1], fw_traj[:nf, j]])
        kgv = np.concatenate([bw_kg[1:nb, j][::-1], fw_kg[:nf, j]])
        curves.append(PlanarCurve(s=s_arr, x=st[:, 0], y=st[:, 1], phi=st[:, 2],
                                  kg_samples=kgv,
                                  truncated_reason="ideal boundary"))
    return curves


def kg_critical(s, mu: float):
    """Geodesic curvature 1 + 4 mu (1+2mu)^2 / (16 mu^2 + (1+2mu)^4 s^2)."""
    if abs(mu) <= 0.5:
        raise GeometryError("kg_critical needs |mu| > 1/2")
    s = np.asarray(s, dtype=float)
    p = (1.0 + 2.0 * mu) ** 2
    out = 1.0 + 4.0 * mu * p / (16.0 * mu * mu + p * p * s * s)
    return float(out) if out.ndim == 0 else out


def conjugate_vertical_boundary(theta_prime_fn: Callable[[float], float],
                                H: float,
                                s_range: Tuple[float, float],
                                init: Tuple[Tuple[float, float], float],
                                step: float = _DEFAULT_STEP,
                                eps_ideal: float = _EPS_IDEAL,
                                s_cap: float = _DEFAULT_S_CAP) -> PlanarCurve:
    """Symmetry curve conjugate to a vertical fiber: kg(s) = 2H - theta'(s).

    Records the total turning (trapezoid of theta' over the realized range)
    and the theta' samples on the curve.
    """
    if not 0.0 <= H <= 0.5:
        raise GeometryError("H must lie in [0, 1/2]")
    init_point, init_angle = init
    curve = integrate_prescribed_curvature(
        lambda s: 2.0 * H - theta_prime_fn(s), s_range, init_point, init_angle,
        step=step, eps_ideal=eps_ideal, s_cap=s_cap)
    tp = 2.0 * H - curve.kg_samples
    total = float(np.trapezoid(tp, curve.s))
    return replace(curve, total_turning=total, theta_prime_samples=tp)


def conjugate_horizontal_profile(nu_samples) -> HeightProfile:
    """Conjugate a horizontal geodesic from its angle-function samples.

    Input rows (s, nu); the conjugated curve sits in a vertical plane with
    base speed |nu| and vertical speed sqrt(1 - nu^2), integrated by the
    trapezoid rule.
    """
    arr = np.asarray(list(nu_samples), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise GeometryError("need rows (s, nu) with at least two samples")
    s, nu = arr[:, 0], arr[:, 1]
    if np.any(np.diff(s) <= 0):
        raise GeometryError("s samples must be strictly increasing")
    if np.any(nu < -1e-9) or np.any(nu > 1.0 + 1e-9):
        raise GeometryError("nu samples must lie in [0, 1]")
    nu = np.clip(nu, 0.0, 1.0)
    base = np.concatenate([[0.0], np.cumsum(0.5 * (nu[1:] + nu[:-1]) * np.diff(s))])
    vert = np.sqrt(1.0 - nu * nu)
    height = np.concatenate([[0.0], np.cumsum(0.5 * (vert[1:] + vert[:-1]) * np.diff(s))])
    return HeightProfile(s=s, base_arclength=base, height=-height)


@dataclass(frozen=True)
class AssembledBoundary:
    """Dihedral orbit of a fundamental curve, merged into boundary chains."""

    pieces: List[np.ndarray]
    symmetry_k: int
    closed: bool
    max_gap: Optional[float]

    @property
    def segment_count(self) -> int:
        return sum(p.shape[0] - 1 for p in self.pieces)


def _canonical_key(pts: np.ndarray) -> tuple:
    q = np.round(pts * 1e9).astype(np.int64)
    fwd = q.tobytes()
    rev = q[::-1].tobytes()
    return min(fwd, rev)


def assemble_domain(fundamental_curve: PlanarCurve, k: int) -> AssembledBoundary:
    """Tile the boundary by the dihedral group of order 2k.

    The group is generated by the rotation through 2 pi / k and the
    reflection across the x-axis; the fundamental curve must start on one of
    the k mirror rays (or at the origin).  Coincident images are deduplicated
    and chains are merged at simple (degree-2) junctions.
    """
    if k < 2 or int(k) != k:
        raise GeometryError("k must be an integer >= 2")
    pts = fundamental_curve.points
    x0, y0 = pts[0]
    r0 = math.hypot(x0, y0)
    if r0 > 1e-12:
        ang = math.atan2(y0, x0) % (math.pi / k)
        if min(ang, math.pi / k - ang) * r0 > 1e-8:
            raise GeometryError("fundamental curve must start on a symmetry ray")
    images = []
    seen = set()
    for j in range(k):
        rot = 2.0 * math.pi * j / k
        cr, sr = math.cos(rot), math.sin(rot)
        R = np.array([[cr, -sr], [sr, cr]])
        for mirror in (False, True):
            p = pts.copy()
            if mirror:
                p[:, 1] = -p[:, 1]
            p = p @ R.T
            key = _canonical_key(p)
            if key in seen:
                continue
            seen.add(key)
            images.append(p)
    merged = _merge_chains(images)
    gaps = []
    closed = len(merged) > 0
    for chain in merged:
        gap = float(np.hypot(*(chain[0] - chain[-1])))
        gaps.append(gap)
        if gap > 1e-8:
            closed = False
    return AssembledBoundary(pieces=merged, symmetry_k=k, closed=closed,
                             max_gap=max(gaps) if gaps else None)


def _merge_chains(images: List[np.ndarray], tol: float = 1e-8) -> List[np.ndarray]:
    """Join pieces at shared endpoints, but only across degree-2 junctions.

    Endpoints are clustered by chart distance <= tol, so integrator-level
    jitter between symmetric images cannot split a junction.
    """
    ends = []
    for idx, p in enumerate(images):
        ends.append(((idx, 0), p[0]))
        ends.append(((idx, -1), p[-1]))
    parent = list(range(len(ends)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(ends)):
        for j in range(i + 1, len(ends)):
            if float(np.hypot(*(ends[i][1] - ends[j][1]))) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    cluster_of = {}
    members: dict = {}
    for i, (ident, _) in enumerate(ends):
        r = find(i)
        cluster_of[ident] = r
        members.setdefault(r, []).append(ident)

    def endpoint_id(piece_idx, orient, which):
        if orient == +1:
            return (piece_idx, 0 if which == "head" else -1)
        return (piece_idx, -1 if which == "head" else 0)

    used = [False] * len(images)
    chains = []
    for start in range(len(images)):
        if used[start]:
            continue
        used[start] = True
        seq = [(start, +1)]
        for which, grow_tail in (("tail", True), ("head", False)):
            while True:
                pi, orient = seq[-1] if grow_tail else seq[0]
                ident = endpoint_id(pi, orient, which)
                mem = members[cluster_of[ident]]
                if len(mem) != 2:
                    break
                other = [m for m in mem if m != ident]
                if len(other) != 1 or used[other[0][0]]:
                    break
                oi, oe = other[0]
                used[oi] = True
                if grow_tail:
                    seq.append((oi, +1 if oe == 0 else -1))
                else:
                    seq.insert(0, (oi, +1 if oe == -1 else -1))
        arrs = []
        for n_, (pi, orient) in enumerate(seq):
            arr = images[pi] if orient == +1 else images[pi][::-1]
            arrs.append(arr if n_ == 0 else arr[1:])
        chains.append(np.vstack(arrs))
    return chains
