"""Conforming triangulations of geodesic triangles in the disk chart.

Finite triangles T_{a,b} are meshed star-shaped from p0: concentric metric
circles at radius i*h carry nodes at angular spacing matched to the circle
circumference, the curved far side contributes its own arclength-uniform
boundary nodes, and a Delaunay pass filtered by centroid tests produces the
elements.  Ideal vertices (a or b infinite) are cut off by a truncation
boundary at metric distance R_trunc from p0.  The flat half-strip
(kappa = 0, k = 2, a infinite) gets a structured rectangle mesh instead,
which keeps the refinement study clean.

Boundary tags: side_p0p1 (the phi = 0 ray), side_p0p2 (the phi = pi/k ray),
side_p1p2 (the far side), truncation.  A corner node takes the tag of the
side through p0 when there is a choice, so Dirichlet data stays single
valued at corners.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.spatial import Delaunay

from .spaces import (GeometryError, GeodesicTriangle, SpaceParams,
                     chart_radius, build_triangle)

__all__ = ["TriangulatedDomain", "triangulate", "TAGS"]

TAGS = ("side_p0p1", "side_p0p2", "side_p1p2", "truncation")
_PRIORITY = {t: i for i, t in enumerate(TAGS)}


@dataclass
class TriangulatedDomain:
    params: SpaceParams
    triangle: GeodesicTriangle
    nodes: np.ndarray
    elements: np.ndarray
    boundary_tags: Dict[int, str]
    target_h: float
    r_trunc: Optional[float] = None
    node_metric_radius: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.node_metric_radius is None:
            self.node_metric_radius = _metric_radius_arr(
                np.hypot(self.nodes[:, 0], self.nodes[:, 1]), self.triangle.kappa)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def nodes_with_tag(self, tag: str) -> np.ndarray:
        idx = np.array(sorted(i for i, t in self.boundary_tags.items() if t == tag),
                       dtype=int)
        return idx

    def dirichlet_indices(self) -> np.ndarray:
        return np.array(sorted(self.boundary_tags), dtype=int)

    def boundary_edges(self) -> np.ndarray:
        """Edges belonging to exactly one element."""
        e = self.elements
        pairs = np.vstack([e[:, [0, 1]], e[:, [1, 2]], e[:, [2, 0]]])
        pairs = np.sort(pairs, axis=1)
        uniq, counts = np.unique(pairs, axis=0, return_counts=True)
        return uniq[counts == 1]


def _metric_radius_arr(chart_r, kappa: float):
    chart_r = np.asarray(chart_r, dtype=float)
    if kappa == 0.0:
        return chart_r.copy()
    delta = math.sqrt(-kappa)
    return (2.0 / delta) * np.arctanh(np.clip(chart_r * delta / 2.0, 0.0, 1.0 - 1e-16))


def _pairwise_metric_dist(pts: np.ndarray, ref: np.ndarray, kappa: float) -> np.ndarray:
    """Min metric distance from each point of pts to the reference polyline."""
    if kappa == 0.0:
        d2 = ((pts[:, None, :] - ref[None, :, :]) ** 2).sum(axis=2)
        return np.sqrt(d2.min(axis=1))
    delta = math.sqrt(-kappa)
    z = (pts[:, 0] + 1j * pts[:, 1]) * delta / 2.0
    w = (ref[:, 0] + 1j * ref[:, 1]) * delta / 2.0
    num = np.abs(z[:, None] - w[None, :])
    den = np.abs(1.0 - np.conj(z[:, None]) * w[None, :])
    t = np.clip(num / den, 0.0, 1.0 - 1e-16)
    return (2.0 / delta) * np.arctanh(t).min(axis=1)


def _metric_resample(fine: np.ndarray, kappa: float, spacing: float):
    """Resample a finely sampled chart polyline uniformly in metric length."""
    seg = np.hypot(*np.diff(fine, axis=0).T)
    mid = (fine[1:] + fine[:-1]) / 2.0
    lam = 1.0 / (1.0 + kappa * (mid[:, 0] ** 2 + mid[:, 1] ** 2) / 4.0)
    cum = np.concatenate([[0.0], np.cumsum(lam * seg)])
    total = cum[-1]
    n = max(1, int(round(total / spacing)))
    targets = np.linspace(0.0, total, n + 1)
    x = np.interp(targets, cum, fine[:, 0])
    y = np.interp(targets, cum, fine[:, 1])
    out = np.column_stack([x, y])
    out[0], out[-1] = fine[0], fine[-1]
    return out, total


def _geodesic_circle(p1: np.ndarray, p2: np.ndarray, disk_r: float):
    """Center and radius of the circle orthogonal to the chart boundary."""
    mat = 2.0 * np.vstack([p1, p2])
    rhs = np.array([p1 @ p1 + disk_r ** 2, p2 @ p2 + disk_r ** 2])
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    if abs(det) < 1e-14:
        return None  # diameter through the origin
    c = np.linalg.solve(mat, rhs)
    rg = math.sqrt(max(c @ c - disk_r ** 2, 0.0))
    return c, rg


def _arc_points(c: np.ndarray, rg: float, th0: float, th1: float, n: int) -> np.ndarray:
    th = np.linspace(th0, th1, n)
    return np.column_stack([c[0] + rg * np.cos(th), c[1] + rg * np.sin(th)])


def _far_side(triangle: GeodesicTriangle, r_trunc: Optional[float], h: float):
    """Fine far-side polyline (from the a-end toward p2) and the inside test."""
    kappa, k = triangle.kappa, triangle.k
    p2 = np.array([triangle.p2.x, triangle.p2.y])
    if not triangle.a_infinite:
        p1 = np.array([triangle.p1.x, triangle.p1.y])
        if kappa == 0.0:
            n = max(8, int(math.ceil(np.hypot(*(p2 - p1)) / (h / 4.0))))
            fine = p1 + np.linspace(0.0, 1.0, n)[:, None] * (p2 - p1)
            t = p2 - p1
            normal_sign = math.copysign(1.0, t[0] * (-p1[1]) - t[1] * (-p1[0]))

            def inside(pts):
                d = pts - p1
                return normal_sign * (t[0] * d[:, 1] - t[1] * d[:, 0]) > 0.0
            return fine, inside
        disk_r = 2.0 / math.sqrt(-kappa)
        cr = _geodesic_circle(p1, p2, disk_r)
        if cr is None:
            raise GeometryError("degenerate far side through the origin")
        c, rg = cr
        th1, th2 = (math.atan2(*(p - c)[::-1]) for p in (p1, p2))
        # walk the short way (the arc inside the disk)
        dth = (th2 - th1 + math.pi) % (2.0 * math.pi) - math.pi
        n = max(16, int(math.ceil(abs(dth) * rg / (h / 4.0))))
        fine = _arc_points(c, rg, th1, th1 + dth, n)

        def inside(pts):
            return np.hypot(*(pts - c).T) > rg
        return fine, inside
    # ideal a-vertex
    if r_trunc is None or r_trunc <= 0:
        raise GeometryError("an ideal side needs a positive R_trunc")
    if kappa == 0.0:
        b_y = p2[1]
        x_hi = math.sqrt(max(r_trunc ** 2 - b_y ** 2, 0.0))
        if x_hi <= p2[0]:
            raise GeometryError("R_trunc does not reach past p2")
        n = max(8, int(math.ceil((x_hi - p2[0]) / (h / 4.0))))
        fine = np.column_stack([np.linspace(x_hi, p2[0], n), np.full(n, b_y)])

        def inside(pts):
            return pts[:, 1] < b_y
        return fine, inside
    delta = math.sqrt(-kappa)
    disk_r = 2.0 / delta
    cy = (p2 @ p2 - 2.0 * disk_r * p2[0] + disk_r ** 2) / (2.0 * p2[1])
    c = np.array([disk_r, cy])
    rg = math.sqrt(c @ c - disk_r ** 2)
    th2 = math.atan2(*(p2 - c)[::-1])
    # trim the arc at the truncation circle |z| = r_t
    r_t = chart_radius(r_trunc, kappa)
    m = (r_t ** 2 + disk_r ** 2) / 2.0
    cosv = m / (r_t * float(np.hypot(*c)))
    if abs(cosv) > 1.0:
        raise GeometryError("R_trunc does not reach the far side")
    v = math.acos(cosv)
    argc = math.atan2(c[1], c[0])
    cands = []
    for sgn in (1.0, -1.0):
        phi = argc + sgn * v
        z = r_t * np.array([math.cos(phi), math.sin(phi)])
        if -1e-9 <= math.atan2(z[1], z[0]) <= math.pi / k + 1e-9:
            cands.append(z)
    if not cands:
        raise GeometryError("truncation circle misses the far side inside the wedge")
    z_cross = min(cands, key=lambda z: abs(math.atan2(z[1], z[0])))
    th_cross = math.atan2(*(z_cross - c)[::-1])
    dth = (th2 - th_cross + math.pi) % (2.0 * math.pi) - math.pi
    n = max(16, int(math.ceil(abs(dth) * rg / (h / 4.0))))
    fine = _arc_points(c, rg, th_cross, th_cross + dth, n)

    def inside(pts):
        return np.hypot(*(pts - c).T) > rg
    return fine, inside


def triangulate(triangle: GeodesicTriangle, target_h: float,
                R_trunc: Optional[float] = None) -> TriangulatedDomain:
    """Mesh the (possibly truncated) triangle at metric edge length ~target_h."""
    if target_h <= 0:
        raise GeometryError("target_h must be positive")
    if triangle.a_infinite and triangle.b_infinite:
        raise GeometryError("the doubly ideal wedge is not meshable")
    if not triangle.a_infinite and not triangle.b_infinite and triangle.ell <= 0:
        raise GeometryError("degenerate triangle with zero far side")
    if triangle.b_infinite:
        return _mirrored(triangle, target_h, R_trunc)
    kappa, k, h = triangle.kappa, triangle.k, target_h
    params = SpaceParams.from_h(math.sqrt(1.0 + kappa) / 2.0)
    if kappa == 0.0 and triangle.a_infinite and k == 2:
        return _strip(triangle, params, h, R_trunc)
    delta = math.sqrt(-kappa) if kappa < 0 else 0.0
    fine, inside_test = _far_side(triangle, R_trunc, h)
    far_nodes, _ = _metric_resample(fine, kappa, h)
    if triangle.a_infinite:
        r_dom = R_trunc
    else:
        r_dom = float(np.max(_metric_radius_arr(np.hypot(*fine.T), kappa)))

    chunks = [np.zeros((1, 2))]
    wedge = math.pi / k
    i = 1
    while i * h < r_dom - 0.4 * h:
        rho = i * h
        if triangle.a_infinite and rho > R_trunc - 0.4 * h:
            break
        r_chart = chart_radius(rho, kappa)
        if delta > 0:
            dphi = h * delta / math.sinh(delta * rho)
        else:
            dphi = h / rho
        m = max(1, int(math.ceil(wedge / dphi)))
        phi = np.linspace(0.0, wedge, m + 1)
        ring = np.column_stack([r_chart * np.cos(phi), r_chart * np.sin(phi)])
        ok = inside_test(ring)
        ok &= _pairwise_metric_dist(ring, fine, kappa) >= 0.4 * h
        chunks.append(ring[ok])
        i += 1
    chunks.append(far_nodes)
    trunc_nodes = np.zeros((0, 2))
    if triangle.a_infinite:
        r_t = chart_radius(R_trunc, kappa)
        phi_cross = math.atan2(far_nodes[0, 1], far_nodes[0, 0])
        arc_metric = phi_cross * (math.sinh(delta * R_trunc) / delta if delta > 0 else R_trunc)
        n_t = max(1, int(math.ceil(arc_metric / h)))
        phi = np.linspace(0.0, phi_cross, n_t + 1)[:-1]  # crossing node comes from the far side
        trunc_nodes = np.column_stack([r_t * np.cos(phi), r_t * np.sin(phi)])
        chunks.append(trunc_nodes)

    nodes, tags = _collect(chunks, far_nodes, trunc_nodes, wedge)
    tri = Delaunay(nodes)
    cent = nodes[tri.simplices].mean(axis=1)
    keep = (cent[:, 1] > -1e-12)
    keep &= (cent[:, 0] * math.sin(wedge) - cent[:, 1] * math.cos(wedge) > -1e-12)
    keep &= inside_test(cent)
    if triangle.a_infinite:
        keep &= np.hypot(cent[:, 0], cent[:, 1]) <= chart_radius(R_trunc, kappa) + 1e-12
    elements = tri.simplices[keep]
    elements = _orient_ccw(nodes, elements)
    nodes, elements, tags = _compact(nodes, elements, tags)
    dom = TriangulatedDomain(params=params, triangle=triangle, nodes=nodes,
                             elements=elements, boundary_tags=tags,
                             target_h=h, r_trunc=R_trunc)
    _check_boundary(dom)
    return dom


def _collect(chunks, far_nodes, trunc_nodes, wedge):
    """Merge node chunks with dedup and assign boundary tags by priority."""
    far_keys = {_key(p) for p in far_nodes}
    trunc_keys = {_key(p) for p in trunc_nodes}
    nodes = []
    index = {}
    tags = {}

    def visit(p):
        kk = _key(p)
        if kk in index:
            return index[kk]
        idx = len(nodes)
        nodes.append(p)
        index[kk] = idx
        return idx

    for chunk in chunks:
        for p in np.atleast_2d(chunk):
            if chunk.size == 0:
                continue
            idx = visit(p)
            r = math.hypot(p[0], p[1])
            cand = []
            if r < 1e-12 or abs(p[1]) < 1e-9 * max(r, 1.0):
                cand.append("side_p0p1")
            if r < 1e-12 or abs(p[0] * math.sin(wedge) - p[1] * math.cos(wedge)) < 1e-9 * max(r, 1.0):
                cand.append("side_p0p2")
            if _key(p) in far_keys:
                cand.append("side_p1p2")
            if _key(p) in trunc_keys:
                cand.append("truncation")
            if cand:
                best = min(cand, key=_PRIORITY.get)
                if idx not in tags or _PRIORITY[best] < _PRIORITY[tags[idx]]:
                    tags[idx] = best
    return np.array(nodes), tags


def _key(p):
    return (round(float(p[0]) * 1e9), round(float(p[1]) * 1e9))


def _orient_ccw(nodes, elements):
    p = nodes[elements]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    area2 = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    flip = area2 < 0
    elements = elements.copy()
    elements[flip] = elements[flip][:, ::-1]
    good = np.abs(area2) > 1e-14
    return elements[good]


def _compact(nodes, elements, tags):
    used = np.unique(elements)
    remap = -np.ones(nodes.shape[0], dtype=int)
    remap[used] = np.arange(used.size)
    new_tags = {}
    for i, t in tags.items():
        if remap[i] >= 0:
            new_tags[int(remap[i])] = t
    return nodes[used], remap[elements], new_tags


def _check_boundary(dom: TriangulatedDomain):
    for edge in dom.boundary_edges():
        for n in edge:
            if int(n) not in dom.boundary_tags:
                p = dom.nodes[n]
                raise GeometryError(
                    f"untagged boundary node at ({p[0]:.6f}, {p[1]:.6f}); "
                    "triangulation margins need adjusting")


def _strip(triangle: GeodesicTriangle, params: SpaceParams, h: float,
           R_trunc: Optional[float]) -> TriangulatedDomain:
    """Structured rectangle mesh for the flat half-strip (k=2, a infinite)."""
    if R_trunc is None or R_trunc <= 0:
        raise GeometryError("the strip needs a positive R_trunc")
    b = triangle.b
    nx = max(2, int(round(R_trunc / h)))
    ny = max(2, int(round(b / h)))
    xs = np.linspace(0.0, R_trunc, nx + 1)
    ys = np.linspace(0.0, b, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return i * (ny + 1) + j

    elems = []
    for i in range(nx):
        for j in range(ny):
            elems.append((nid(i, j), nid(i + 1, j), nid(i + 1, j + 1)))
            elems.append((nid(i, j), nid(i + 1, j + 1), nid(i, j + 1)))
    elements = np.array(elems, dtype=int)
    tags = {}
    for idx in range(nodes.shape[0]):
        x, y = nodes[idx]
        cand = []
        if y == 0.0:
            cand.append("side_p0p1")
        if x == 0.0:
            cand.append("side_p0p2")
        if y == ys[-1]:
            cand.append("side_p1p2")
        if x == xs[-1]:
            cand.append("truncation")
        if cand:
            tags[idx] = min(cand, key=_PRIORITY.get)
    return TriangulatedDomain(params=params, triangle=triangle, nodes=nodes,
                              elements=elements, boundary_tags=tags,
                              target_h=h, r_trunc=R_trunc)


def _mirrored(triangle: GeodesicTriangle, target_h: float,
              R_trunc: Optional[float]) -> TriangulatedDomain:
    """Mesh an ideal-b triangle by reflecting the mirrored ideal-a mesh."""
    k = triangle.k
    swapped = build_triangle(triangle.b, triangle.a, k, triangle.kappa)
    dom = triangulate(swapped, target_h, R_trunc)
    ang = math.pi / k
    z = dom.nodes[:, 0] + 1j * dom.nodes[:, 1]
    w = np.exp(1j * ang) * np.conj(z)
    nodes = np.column_stack([w.real, w.imag])
    swap = {"side_p0p1": "side_p0p2", "side_p0p2": "side_p0p1"}
    tags = {i: swap.get(t, t) for i, t in dom.boundary_tags.items()}
    elements = _orient_ccw(nodes, dom.elements)
    return TriangulatedDomain(params=dom.params, triangle=triangle, nodes=nodes,
                              elements=elements, boundary_tags=tags,
                              target_h=target_h, r_trunc=R_trunc)
