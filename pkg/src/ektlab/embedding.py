"""Self-intersection detection and coverage multiplicity for disk curves.

Crossings are found by a vectorized sweep over candidate segment pairs from
a uniform spatial hash (cell size tied to the longest segment, so any two
intersecting segments land in neighboring cells).  Covered-twice regions are
measured by winding-number rasterization: open chains are closed through
arcs just inside the ideal circle, each scanline accumulates signed
crossings, and pixels with |winding| >= 2 are summed with the hyperbolic
density (2/(1-r^2))^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .spaces import GeometryError
from .curves import AssembledBoundary, PlanarCurve

__all__ = [
    "EmbeddednessReport",
    "self_intersections",
    "multiplicity_two_area",
    "rotation_lemma_check",
    "report_json_dict",
    "write_domain_svg",
    "write_domain_panels_svg",
    "critical_catenoid_domain",
]

_EPS_GEOM = 1e-9


@dataclass(frozen=True)
class EmbeddednessReport:
    """Crossing list, doubly covered hyperbolic area, and the verdict."""

    self_intersections: List[Tuple[float, float, Tuple[float, float]]]
    multiplicity_2_area: float
    embedded: bool
    symmetry_k: int
    uncertain: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def crossings(self) -> int:
        return len(self.self_intersections)


def _thin(points: np.ndarray, params: np.ndarray, min_seg: float):
    """Drop samples closer than min_seg in cumulative chart length.

    Curves integrated in the hyperbolic metric cluster exponentially near
    the ideal circle; without thinning, one hash cell can hold thousands of
    segments and the pair sweep degenerates.  Chords of length min_seg are
    far below any feature scale of the symmetry curves, so crossings and
    their parameters survive the thinning.
    """
    if min_seg <= 0 or points.shape[0] < 3:
        return points, params
    seg = np.hypot(*np.diff(points, axis=0).T)
    ell = np.concatenate([[0.0], np.cumsum(seg)])
    _, keep = np.unique(np.floor(ell / min_seg), return_index=True)
    if keep[-1] != points.shape[0] - 1:
        keep = np.append(keep, points.shape[0] - 1)
    return points[keep], params[keep]


def _as_pieces(obj, min_seg: float = 0.0) -> Tuple[List[np.ndarray], List[np.ndarray], int]:
    """Normalize input to (point arrays, per-sample parameters, symmetry k).

    PlanarCurve keeps its hyperbolic arclength parameter; polyline pieces
    are parametrized by cumulative Euclidean chart length with consecutive
    pieces offset so parameters stay distinct.
    """
    if isinstance(obj, PlanarCurve):
        pieces = [obj.points]
        params = [obj.s.copy()]
        k = 1
    else:
        if isinstance(obj, AssembledBoundary):
            pieces = obj.pieces
            k = obj.symmetry_k
        elif isinstance(obj, np.ndarray):
            pieces = [obj]
            k = 1
        else:
            pieces = [np.asarray(p, dtype=float) for p in obj]
            k = 1
        params = []
        offset = 0.0
        for p in pieces:
            if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 2:
                raise GeometryError("each piece needs at least two planar points")
            ell = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(p, axis=0).T))])
            params.append(ell + offset)
            offset += ell[-1] + 1.0
    thinned = [_thin(p, q, min_seg) for p, q in zip(pieces, params)]
    return [t[0] for t in thinned], [t[1] for t in thinned], k


def _candidate_pairs(mid: np.ndarray, cell: float) -> Tuple[np.ndarray, np.ndarray]:
    """Index pairs of segments whose midpoints fall in neighboring hash cells."""
    ij = np.floor(mid / cell).astype(np.int64)
    key = ij[:, 0] * 2_000_003 + ij[:, 1]
    order = np.argsort(key, kind="stable")
    sk = key[order]
    uniq, starts = np.unique(sk, return_index=True)
    counts = np.diff(np.concatenate([starts, [sk.size]]))
    pairs_i, pairs_j = [], []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            off = dx * 2_000_003 + dy
            if off < 0:
                continue  # unordered cell pairs visited once
            if off == 0:
                # all pairs within each cell
                for s, c in zip(starts, counts):
                    if c < 2:
                        continue
                    members = order[s:s + c]
                    iu, ju = np.triu_indices(c, k=1)
                    pairs_i.append(members[iu])
                    pairs_j.append(members[ju])
                continue
            tgt = uniq + off
            pos = np.searchsorted(uniq, tgt)
            ok = (pos < uniq.size) & (uniq[np.minimum(pos, uniq.size - 1)] == tgt)
            for a in np.nonzero(ok)[0]:
                mem_a = order[starts[a]:starts[a] + counts[a]]
                b = pos[a]
                mem_b = order[starts[b]:starts[b] + counts[b]]
                gi, gj = np.meshgrid(mem_a, mem_b, indexing="ij")
                pairs_i.append(gi.ravel())
                pairs_j.append(gj.ravel())
    if not pairs_i:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(pairs_i), np.concatenate(pairs_j)


def self_intersections(obj: Union[PlanarCurve, AssembledBoundary, Sequence[np.ndarray]],
                       eps_geom: float = _EPS_GEOM,
                       grid: int = 1024,
                       min_seg: float = 1e-5) -> EmbeddednessReport:
    """Report transverse crossings and the doubly covered hyperbolic area.

    Near-tangential configurations (parameter or perpendicular clearance
    within eps_geom) are listed as uncertain instead of decided.
    """
    pieces, params, k = _as_pieces(obj, min_seg=min_seg)
    A = np.vstack([p[:-1] for p in pieces])
    B = np.vstack([p[1:] for p in pieces])
    sA = np.concatenate([q[:-1] for q in params])
    sB = np.concatenate([q[1:] for q in params])
    piece_id = np.concatenate([np.full(p.shape[0] - 1, n) for n, p in enumerate(pieces)])
    seg_idx = np.concatenate([np.arange(p.shape[0] - 1) for p in pieces])
    d = B - A
    lens = np.hypot(d[:, 0], d[:, 1])
    max_len = float(np.max(lens)) if lens.size else 0.0
    if max_len == 0.0:
        raise GeometryError("degenerate polyline (zero-length segments only)")
    cell = 2.05 * max_len
    pi_, pj_ = _candidate_pairs((A + B) / 2.0, cell)
    # drop self pairs and chain neighbors within the same piece
    keep = ~((piece_id[pi_] == piece_id[pj_]) & (np.abs(seg_idx[pi_] - seg_idx[pj_]) <= 1))
    pi_, pj_ = pi_[keep], pj_[keep]
    crossings = []
    uncertain = []
    if pi_.size:
        a1, d1 = A[pi_], d[pi_]
        a2, d2 = A[pj_], d[pj_]
        denom = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        rhs = a2 - a1
        near_par = np.abs(denom) <= eps_geom * np.maximum(lens[pi_] * lens[pj_], 1e-300)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (rhs[:, 0] * d2[:, 1] - rhs[:, 1] * d2[:, 0]) / denom
            u = (rhs[:, 0] * d1[:, 1] - rhs[:, 1] * d1[:, 0]) / denom
        inside = (t > 0.0) & (t < 1.0) & (u > 0.0) & (u < 1.0) & ~near_par
        margin = np.minimum.reduce([t, 1.0 - t, u, 1.0 - u])
        para_t = np.clip((rhs * d1).sum(axis=1) / np.maximum(lens[pi_] ** 2, 1e-300), 0, 1)
        gap = np.hypot(*(a1 + para_t[:, None] * d1 - a2).T)
        for idx in np.nonzero(inside | (near_par & (gap < 10 * eps_geom)))[0]:
            s1 = sA[pi_[idx]] + t[idx] * (sB[pi_[idx]] - sA[pi_[idx]])
            s2 = sA[pj_[idx]] + u[idx] * (sB[pj_[idx]] - sA[pj_[idx]])
            if near_par[idx] or margin[idx] * min(lens[pi_[idx]], lens[pj_[idx]]) < eps_geom:
                uncertain.append((float(min(s1, s2)), float(max(s1, s2))))
                continue
            pt = a1[idx] + t[idx] * d1[idx]
            lo, hi = sorted((float(s1), float(s2)))
            crossings.append((lo, hi, (float(pt[0]), float(pt[1]))))
    crossings.sort()
    area = multiplicity_two_area(pieces, grid=grid)
    embedded = not crossings
    return EmbeddednessReport(self_intersections=crossings,
                              multiplicity_2_area=area,
                              embedded=embedded, symmetry_k=k,
                              uncertain=sorted(set(uncertain)))


def _close_chains(pieces: List[np.ndarray], arc_step: float = 2.0 * math.pi / 2048) -> List[np.ndarray]:
    """Close open chains through arcs just inside the ideal circle.

    Open ends are assumed to sit near the boundary circle (diverging
    symmetry curves); ends are joined in counterclockwise order, which is
    the non-crossing pairing for boundaries of immersed disks.
    """
    loops = []
    open_pieces = []
    for p in pieces:
        if np.hypot(*(p[0] - p[-1])) < 1e-8:
            loops.append(p)
        else:
            open_pieces.append(p)
    if not open_pieces:
        return loops
    used = [False] * len(open_pieces)
    for seed in range(len(open_pieces)):
        if used[seed]:
            continue
        chain = [open_pieces[seed]]
        used[seed] = True
        start_pt = open_pieces[seed][0]
        while True:
            cur_end = chain[-1][-1]
            th_end = math.atan2(cur_end[1], cur_end[0])
            best = None
            for i, p in enumerate(open_pieces):
                if used[i]:
                    continue
                for flip in (False, True):
                    q = p[::-1] if flip else p
                    th_s = math.atan2(q[0][1], q[0][0])
                    gap = (th_s - th_end) % (2.0 * math.pi)
                    if best is None or gap < best[0]:
                        best = (gap, i, flip)
            th_close = math.atan2(start_pt[1], start_pt[0])
            gap_close = (th_close - th_end) % (2.0 * math.pi)
            if best is None or gap_close <= best[0]:
                arc = _ideal_arc(cur_end, start_pt, gap_close, arc_step)
                chain.append(arc)
                break
            gap, i, flip = best
            q = open_pieces[i][::-1] if flip else open_pieces[i]
            used[i] = True
            chain.append(_ideal_arc(cur_end, q[0], gap, arc_step))
            chain.append(q)
        loops.append(np.vstack(chain))
    return loops


def _ideal_arc(p_from: np.ndarray, p_to: np.ndarray, gap: float, arc_step: float) -> np.ndarray:
    r0, r1 = np.hypot(*p_from), np.hypot(*p_to)
    th0 = math.atan2(p_from[1], p_from[0])
    n = max(2, int(math.ceil(gap / arc_step)) + 1)
    th = th0 + np.linspace(0.0, gap, n)
    rr = np.linspace(r0, r1, n)
    return np.column_stack([rr * np.cos(th), rr * np.sin(th)])


def multiplicity_two_area(pieces: Sequence[np.ndarray], grid: int = 1024,
                          r_cut: float = 1.0 - 2e-6) -> float:
    """Hyperbolic area covered with |winding| >= 2 by the closed-up chains."""
    loops = _close_chains([np.asarray(p, dtype=float) for p in pieces])
    if not loops:
        return 0.0
    px = 2.0 / grid
    centers = -1.0 + (np.arange(grid) + 0.5) * px
    # crossing events (row, x, direction) for all loop segments
    rows_all, xs_all, dir_all = [], [], []
    for loop in loops:
        a, b = loop[:-1], loop[1:]
        y0, y1 = a[:, 1], b[:, 1]
        keep = y0 != y1
        a, b, y0, y1 = a[keep], b[keep], y0[keep], y1[keep]
        lo = np.minimum(y0, y1)
        hi = np.maximum(y0, y1)
        i_lo = np.searchsorted(centers, lo, side="left")
        i_hi = np.searchsorted(centers, hi, side="left")
        counts = i_hi - i_lo
        seg_of = np.repeat(np.arange(a.shape[0]), counts)
        if seg_of.size == 0:
            continue
        local = np.arange(seg_of.size) - np.repeat(
            np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
        row = i_lo[seg_of] + local
        yr = centers[row]
        tt = (yr - y0[seg_of]) / (y1[seg_of] - y0[seg_of])
        xc = a[seg_of, 0] + tt * (b[seg_of, 0] - a[seg_of, 0])
        rows_all.append(row)
        xs_all.append(xc)
        dir_all.append(np.where(y1[seg_of] > y0[seg_of], 1, -1))
    if not rows_all:
        return 0.0
    rows = np.concatenate(rows_all)
    xs = np.concatenate(xs_all)
    dirs = np.concatenate(dir_all)
    order = np.lexsort((xs, rows))
    rows, xs, dirs = rows[order], xs[order], dirs[order]
    # hyperbolic pixel mass, cumulative along each row
    X, Y = np.meshgrid(centers, centers, indexing="xy")
    r2 = X * X + Y * Y
    lam2 = np.where(np.sqrt(r2) <= r_cut, 4.0 / (1.0 - r2) ** 2, 0.0) * px * px
    cum = np.concatenate([np.zeros((grid, 1)), np.cumsum(lam2, axis=1)], axis=1)
    area = 0.0
    boundaries = np.concatenate([[0], np.nonzero(np.diff(rows))[0] + 1, [rows.size]])
    for bi in range(boundaries.size - 1):
        s0, s1 = boundaries[bi], boundaries[bi + 1]
        row = rows[s0]
        w = np.cumsum(dirs[s0:s1])
        xrow = xs[s0:s1]
        hot = np.abs(w[:-1]) >= 2
        if not np.any(hot):
            continue
        cl = np.searchsorted(centers, xrow[:-1][hot], side="left")
        cr = np.searchsorted(centers, xrow[1:][hot], side="left")
        area += float(np.sum(cum[row, cr] - cum[row, cl]))
    return area


def rotation_lemma_check(curve: PlanarCurve,
                         theta_prime_total: Optional[float] = None) -> str:
    """Check "positive theta', total turning <= pi => no self-intersection".

    Returns "holds", "violated", or "inapplicable" (hypothesis not met).
    A "violated" outcome on valid inputs contradicts the rotation bound and
    is treated as build-breaking by the audit.
    """
    tp = curve.theta_prime_samples
    total = theta_prime_total if theta_prime_total is not None else curve.total_turning
    if tp is None or total is None:
        return "inapplicable"
    if np.any(tp <= 0.0) or total > math.pi + 1e-9:
        return "inapplicable"
    report = self_intersections(curve, grid=64)
    return "holds" if report.embedded else "violated"


def report_json_dict(report: EmbeddednessReport,
                     total_turning: Optional[float] = None) -> dict:
    return {
        "embedded": report.embedded,
        "crossings": report.crossings,
        "multiplicity_2_area": report.multiplicity_2_area,
        "total_turning": total_turning,
    }


def _panel_markup(pieces: Sequence[np.ndarray], size: int, fill_grid: int,
                  dx: float, label: Optional[str] = None) -> List[str]:
    """Markup of one disk panel (fill, ideal circle, strokes) shifted by dx."""
    pieces = [np.asarray(p, dtype=float) for p in pieces]
    half = size / 2.0

    def to_px(pts):
        return (pts[:, 0] * 0.95 + 1.0) * half + dx, (1.0 - pts[:, 1] * 0.95) * half

    out = []
    # covered-twice fill from a coarse winding pass
    loops = _close_chains(pieces)
    if loops:
        px = 2.0 / fill_grid
        centers = -1.0 + (np.arange(fill_grid) + 0.5) * px
        wind = np.zeros((fill_grid, fill_grid), dtype=int)
        for loop in loops:
            a, b = loop[:-1], loop[1:]
            for i in range(fill_grid):
                yc = centers[i]
                m = ((np.minimum(a[:, 1], b[:, 1]) < yc)
                     & (np.maximum(a[:, 1], b[:, 1]) >= yc))
                if not np.any(m):
                    continue
                tt = (yc - a[m, 1]) / (b[m, 1] - a[m, 1])
                xc = a[m, 0] + tt * (b[m, 0] - a[m, 0])
                dd = np.where(b[m, 1] > a[m, 1], 1, -1)
                o = np.argsort(xc)
                cols = np.searchsorted(xc[o], centers)
                w = np.concatenate([[0], np.cumsum(dd[o])])
                wind[i] += w[cols]
        hot = np.argwhere(np.abs(wind) >= 2)
        cell_px = 0.95 * size / fill_grid
        for i, j in hot:
            cx = (centers[j] * 0.95 + 1.0) * half + dx - cell_px / 2.0
            cy = (1.0 - centers[i] * 0.95) * half - cell_px / 2.0
            out.append(f'<rect x="{cx:.2f}" y="{cy:.2f}" width="{cell_px:.2f}" '
                       f'height="{cell_px:.2f}" fill="#b0b0b0" stroke="none"/>')
    out.append(f'<circle cx="{half + dx}" cy="{half}" r="{0.95 * half}" fill="none" '
               'stroke="black" stroke-width="1"/>')
    for p in pieces:
        stride = max(1, p.shape[0] // 4000)
        q = p[::stride] if stride > 1 else p
        if not np.array_equal(q[-1], p[-1]):
            q = np.vstack([q, p[-1]])
        xs, ys = to_px(q)
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#1040a0" '
                   'stroke-width="1.2"/>')
    if label is not None:
        out.append(f'<text x="{half + dx:.2f}" y="{size - 6}" '
                   'font-family="monospace" font-size="14" '
                   f'text-anchor="middle">{label}</text>')
    return out


def write_domain_svg(path: str, pieces: Sequence[np.ndarray], params: dict,
                     size: int = 720, fill_grid: int = 256) -> None:
    """SVG figure: ideal circle, curve strokes, covered-twice region fill.

    The full parameter set is embedded as a comment header; output is
    deterministic for fixed inputs.
    """
    header = " ".join(f"{k}={params[k]!r}" for k in sorted(params))
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f"<!-- params: {header} -->",
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    out.extend(_panel_markup(pieces, size, fill_grid, 0.0))
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def write_domain_panels_svg(path: str,
                            panels: Sequence[Tuple[str, Sequence[np.ndarray]]],
                            params: dict, size: int = 720,
                            fill_grid: int = 256) -> None:
    """Side-by-side disk panels (label, pieces) in one deterministic SVG."""
    if not panels:
        raise GeometryError("no panels to draw")
    width = size * len(panels)
    header = " ".join(f"{k}={params[k]!r}" for k in sorted(params))
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f"<!-- params: {header} -->",
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{size}" '
           f'viewBox="0 0 {width} {size}">',
           f'<rect width="{width}" height="{size}" fill="white"/>']
    for n, (label, pieces) in enumerate(panels):
        out.extend(_panel_markup(pieces, size, fill_grid, float(n * size), label))
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def critical_catenoid_domain(mu: float, k: int = 2, step: float = 5e-4,
                             s_cap: float = 60.0, grid: int = 1024):
    """Boundary of the conjugate disk domain for the critical catenoid data.

    The fiber rotation speed theta'(s) of the mu-helicoid prescribes
    kg = kg_critical along the symmetry curve (H = 1/2 case); the curve is
    integrated over the full fiber, tiled by the dihedral group of order 2k,
    and analyzed for self-intersections and doubly covered hyperbolic area.

    Returns (curve, assembled, report).
    """
    from .curves import conjugate_vertical_boundary, assemble_domain
    from .helicoid import theta_prime, vertex_base_distance

    d0 = vertex_base_distance(mu)
    r0 = math.tanh(d0 / 2.0)
    phi0 = math.pi / 2.0 if mu < 0 else -math.pi / 2.0
    # theta' is even in s and the initial tangent is vertical, so the s<0
    # half of the fiber is the x-axis mirror of the s>0 half; the dihedral
    # tiling below restores it
    curve = conjugate_vertical_boundary(lambda s: float(theta_prime(s, mu)),
                                        0.5, (0.0, math.inf),
                                        ((r0, 0.0), phi0),
                                        step=step, s_cap=s_cap)
    assembled = assemble_domain(curve, k)
    report = self_intersections(assembled, grid=grid)
    return curve, assembled, report
