"""Cylinder-model geometry of the homogeneous spaces E(kappa, tau).

The base M2(kappa) is the disk of radius 2/sqrt(-kappa) (the whole plane for
kappa = 0) carrying the conformal metric lambda^2 (dx^2 + dy^2) with
lambda = (1 + kappa (x^2+y^2)/4)^(-1).  The total space adds a fiber
coordinate z and the orthonormal frame

    E1 = lambda^(-1) d/dx - tau y d/dz,
    E2 = lambda^(-1) d/dy + tau x d/dz,
    E3 = d/dz  (the vertical Killing direction).

This module holds the parameter record, points, frame conversion, geodesic
triangles of the base, and the hyperbolic-trigonometry helpers shared by the
mesher and the curve integrators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "GeometryError",
    "SpaceParams",
    "BasePoint",
    "SpacePoint",
    "FrameVector",
    "GeodesicTriangle",
    "conformal_factor",
    "conformal_factor_xy",
    "frame_components",
    "law_of_cosines",
    "build_triangle",
    "interior_angle_at_p2",
    "chart_radius",
    "metric_radius",
    "chart_distance",
]


class GeometryError(ValueError):
    """Raised for inputs outside the geometric domain of an operation."""


@dataclass(frozen=True)
class SpaceParams:
    """Parameters (kappa, tau) of E(kappa, tau), optionally tied to an H.

    When ``h_partner`` is set the record describes the space E(4H^2-1, H)
    used by the conjugation machinery, and the fields must satisfy
    kappa = 4H^2 - 1, tau = H with H in [0, 1/2].
    """

    kappa: float
    tau: float
    h_partner: Optional[float] = None

    def __post_init__(self) -> None:
        if self.h_partner is not None:
            h = self.h_partner
            if not (0.0 <= h <= 0.5):
                raise GeometryError(f"h_partner must lie in [0, 1/2], got {h}")
            if abs(self.kappa - (4.0 * h * h - 1.0)) > 1e-12:
                raise GeometryError("kappa does not match 4 h_partner^2 - 1")
            if abs(self.tau - h) > 1e-12:
                raise GeometryError("tau does not match h_partner")

    @classmethod
    def from_h(cls, h: float) -> "SpaceParams":
        """Space E(4H^2-1, H) paired with H-surfaces in H2xR."""
        return cls(kappa=4.0 * h * h - 1.0, tau=h, h_partner=h)

    @property
    def delta(self) -> float:
        """sqrt(-kappa) for a hyperbolic base; 0 when kappa = 0."""
        return math.sqrt(-self.kappa) if self.kappa < 0 else 0.0

    @property
    def disk_radius(self) -> float:
        """Chart radius of the base disk (infinite for kappa = 0)."""
        return 2.0 / self.delta if self.kappa < 0 else math.inf


@dataclass(frozen=True)
class BasePoint:
    x: float
    y: float


@dataclass(frozen=True)
class SpacePoint:
    x: float
    y: float
    z: float

    @property
    def base(self) -> BasePoint:
        return BasePoint(self.x, self.y)


@dataclass(frozen=True)
class FrameVector:
    """Coefficients with respect to the orthonormal frame {E1, E2, E3}."""

    c1: float
    c2: float
    c3: float

    def norm(self) -> float:
        return math.sqrt(self.c1 * self.c1 + self.c2 * self.c2 + self.c3 * self.c3)


def _check_in_disk(x, y, params: SpaceParams) -> None:
    if params.kappa == 0.0:
        return
    denom = 1.0 + params.kappa * (np.asarray(x) ** 2 + np.asarray(y) ** 2) / 4.0
    if np.any(denom <= 0.0):
        raise GeometryError("point outside the model disk (conformal factor <= 0)")


def conformal_factor(p: BasePoint, params: SpaceParams) -> float:
    """Conformal factor lambda at a base point; rejects points off the disk."""
    _check_in_disk(p.x, p.y, params)
    return 1.0 / (1.0 + params.kappa * (p.x * p.x + p.y * p.y) / 4.0)


def conformal_factor_xy(x, y, params: SpaceParams):
    """Vectorized lambda over coordinate arrays (no domain check)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 1.0 / (1.0 + params.kappa * (x * x + y * y) / 4.0)


def frame_components(dx: float, dy: float, dz: float, at: SpacePoint,
                     params: SpaceParams) -> FrameVector:
    """Convert a coordinate vector at a point into frame coefficients.

    Inverts d/dx = lambda(E1 + tau y E3), d/dy = lambda(E2 - tau x E3),
    d/dz = E3.
    """
    lam = conformal_factor(at.base, params)
    c1 = lam * dx
    c2 = lam * dy
    c3 = dz + lam * params.tau * (at.y * dx - at.x * dy)
    return FrameVector(c1, c2, c3)


# -- hyperbolic chart helpers -------------------------------------------------
#
# For kappa < 0 every formula reduces to the unit Poincare disk through the
# rescaling w = z * delta / 2, with metric lengths carrying a 1/delta factor.

def chart_radius(distance: float, kappa: float) -> float:
    """Chart radius of the metric circle of given radius around the origin."""
    if kappa == 0.0:
        return distance
    delta = math.sqrt(-kappa)
    if math.isinf(distance):
        return 2.0 / delta
    return (2.0 / delta) * math.tanh(distance * delta / 2.0)


def metric_radius(r: float, kappa: float) -> float:
    """Inverse of chart_radius: metric distance from the origin."""
    if kappa == 0.0:
        return r
    delta = math.sqrt(-kappa)
    return (2.0 / delta) * math.atanh(r * delta / 2.0)


def chart_distance(p: BasePoint, q: BasePoint, kappa: float) -> float:
    """Metric distance between two chart points of M2(kappa), kappa <= 0."""
    if kappa == 0.0:
        return math.hypot(p.x - q.x, p.y - q.y)
    delta = math.sqrt(-kappa)
    w1 = complex(p.x, p.y) * delta / 2.0
    w2 = complex(q.x, q.y) * delta / 2.0
    t = abs((w1 - w2) / (1.0 - w1.conjugate() * w2))
    if t >= 1.0:
        return math.inf
    return (2.0 / delta) * math.atanh(t)


# -- geodesic triangles -------------------------------------------------------

def law_of_cosines(a: float, b: float, k: int, kappa: float) -> float:
    """Length of the side opposite the wedge angle pi/k.

    Hyperbolic law of cosines for kappa < 0 (with delta = sqrt(-kappa)),
    Euclidean for kappa = 0.  Requires finite a, b.
    """
    if not (a > 0 and b > 0) or math.isinf(a) or math.isinf(b):
        raise GeometryError("law_of_cosines needs finite positive side lengths")
    if k < 2:
        raise GeometryError("wedge parameter k must be an integer >= 2")
    gamma = math.pi / k
    if kappa == 0.0:
        return math.sqrt(a * a + b * b - 2.0 * a * b * math.cos(gamma))
    delta = math.sqrt(-kappa)
    c = (math.cosh(a * delta) * math.cosh(b * delta)
         - math.sinh(a * delta) * math.sinh(b * delta) * math.cos(gamma))
    return math.acosh(max(c, 1.0)) / delta


@dataclass(frozen=True)
class GeodesicTriangle:
    """Triangle T_{a,b} with vertex p0 at the origin and wedge angle pi/k.

    p1 sits on the positive x-axis at distance a, p2 on the pi/k ray at
    distance b.  Infinite side lengths mark ideal vertices: for kappa < 0 the
    vertex is placed exactly on the boundary circle, for kappa = 0 its
    coordinates are infinite and only the ray direction is meaningful.
    """

    a: float
    b: float
    k: int
    kappa: float
    p0: BasePoint
    p1: BasePoint
    p2: BasePoint
    ell: float

    @property
    def a_infinite(self) -> bool:
        return math.isinf(self.a)

    @property
    def b_infinite(self) -> bool:
        return math.isinf(self.b)


def build_triangle(a: float, b: float, k: int, kappa: float,
                   allow_wedge: bool = False) -> GeodesicTriangle:
    """Place T_{a,b} in the chart of M2(kappa).

    Both sides infinite is the wedge T_{inf,inf} and must be requested
    explicitly with ``allow_wedge``.
    """
    if kappa > 0:
        raise GeometryError("only kappa <= 0 bases are supported")
    if k < 2 or int(k) != k:
        raise GeometryError("k must be an integer >= 2")
    if not (a > 0 and b > 0):
        raise GeometryError("side lengths must be positive")
    if math.isinf(a) and math.isinf(b) and not allow_wedge:
        raise GeometryError("both sides infinite: pass allow_wedge=True for T_inf_inf")
    gamma = math.pi / k
    r1 = chart_radius(a, kappa)
    r2 = chart_radius(b, kappa)
    p0 = BasePoint(0.0, 0.0)
    p1 = BasePoint(r1, 0.0)
    p2 = BasePoint(r2 * math.cos(gamma), r2 * math.sin(gamma))
    if math.isinf(a) or math.isinf(b):
        ell = math.inf
    else:
        ell = law_of_cosines(a, b, k, kappa)
    return GeodesicTriangle(a=a, b=b, k=int(k), kappa=kappa,
                            p0=p0, p1=p1, p2=p2, ell=ell)


def interior_angle_at_p2(b: float, k: int, kappa: float,
                         a_infinite: bool = True) -> float:
    """Interior angle beta of T_{inf,b} at the finite vertex p2.

    Solves cosh(b delta) = (1 + cos(pi/k) cos(beta)) / (sin(pi/k) sin(beta))
    in closed form: with A = cosh(b delta) sin(pi/k) and B = cos(pi/k) the
    relation reads A sin(beta) - B cos(beta) = 1, so
    beta = atan2(B, A) + asin(1/hypot(A, B)).  The doubled angle 2 beta is the
    interior angle of the reflected domain at p2.
    """
    if not a_infinite:
        raise GeometryError("the closed-form angle assumes an ideal a-side")
    if kappa >= 0:
        raise GeometryError("the one-ideal-vertex relation needs kappa < 0")
    # b = 0 is the degenerate limit where the formula stays continuous
    # (it gives beta = pi - pi/k - asin-term, exactly pi/2 when k = 2)
    if not (b >= 0) or math.isinf(b):
        raise GeometryError("b must be finite and nonnegative")
    if k < 2:
        raise GeometryError("k must be an integer >= 2")
    delta = math.sqrt(-kappa)
    gamma = math.pi / k
    big_a = math.cosh(b * delta) * math.sin(gamma)
    big_b = math.cos(gamma)
    hyp = math.hypot(big_a, big_b)
    if hyp < 1.0:
        raise GeometryError("geometric inconsistency: no interior angle in (0, pi)")
    beta = math.atan2(big_b, big_a) + math.asin(1.0 / hyp)
    if not (0.0 < beta < math.pi):
        raise GeometryError("geometric inconsistency: angle outside (0, pi)")
    return beta
