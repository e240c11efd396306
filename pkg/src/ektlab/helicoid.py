"""The one-parameter family of ruled minimal graphs in Nil3 = E(0, 1/2).

Each member is parametrized as X(u, v) = (u, v, u * slope(v)) and is foliated
by horizontal straight lines.  The profile f is the inverse of the odd
monotone quadrature

    g_mu(x) = (1/2) int_0^x [ 1 + c sqrt(4+y^2) / sqrt(4+c^2 y^2) ] dy,
    c = (1+2mu)/(1-2mu),

with f(0) = 0 and f'(0) = 1 - 2mu.  For |mu| <= 1/2 the graph is entire
(half-period t_mu infinite); otherwise f blows up at the finite half-period
t_mu and the surface contains the vertical fibers over (0, +-t_mu).

Sign conventions in this chart: the sampled profile column h = (v - f)/2
follows the published parametrization and feeds sigma = lim h'/(1+h^2)
= (1+2mu)^2/(4mu), while the height field that actually satisfies the
minimal-graph equation is z = u * (f(v) - v)/2 = -u h(v); the latter is
exposed as model_slope/model_height and backs every cross check against the
graph operator, the strip solver, and the exported meshes.
"""
from __future__ import annotations

import contextlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .spaces import GeometryError

__all__ = [
    "QuadratureError",
    "HelicoidParams",
    "HelicoidProfile",
    "c_of_mu",
    "g_mu",
    "g_mu_prime",
    "t_mu",
    "blowup_half_period",
    "invert_profile",
    "residual_grid",
    "minimality_residual",
    "first_integral_residual",
    "angle_function",
    "sigma",
    "theta_prime",
    "model_slope",
    "model_height",
    "model_angle_function",
    "vertex_base_distance",
    "vertex_base_distance_quadrature",
    "profile_csv_lines",
    "fault_injection",
]


class QuadratureError(ArithmeticError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


def c_of_mu(mu: float) -> float:
    if mu == 0.5:
        raise GeometryError("c is undefined at mu = 1/2 (constant profile)")
    return (1.0 + 2.0 * mu) / (1.0 - 2.0 * mu)


@dataclass(frozen=True)
class HelicoidParams:
    mu: float

    @property
    def c(self) -> float:
        return c_of_mu(self.mu)

    @property
    def classification(self) -> str:
        return "entire graph" if abs(self.mu) <= 0.5 else "helicoid"


# additive perturbation of the slope integrand; nonzero only inside the
# audit's fault-injection negative control
_FAULT_INTEGRAND_EPS = 0.0


def _integrand(y2: np.ndarray, c: float) -> np.ndarray:
    """Slope integrand as a function of y^2 (even in y).

    The raw form (1 + c sqrt(4+y^2)/sqrt(4+c^2 y^2))/2 is kept for c >= 0;
    for c < 0 it is a difference of nearly equal terms at large y, so the
    rationalized equivalent 2(1-c^2)/(4+c^2 y^2 + |c| sqrt((4+c^2y^2)(4+y^2)))
    is used instead.
    """
    if c >= 0.0:
        out = 0.5 * (1.0 + c * np.sqrt(4.0 + y2) / np.sqrt(4.0 + c * c * y2))
    else:
        den = 4.0 + c * c * y2 + abs(c) * np.sqrt((4.0 + c * c * y2) * (4.0 + y2))
        out = 2.0 * (1.0 - c * c) / den
    if _FAULT_INTEGRAND_EPS != 0.0:
        out = out + _FAULT_INTEGRAND_EPS / (1.0 + y2)
    return out


def g_mu_prime(x, mu: float):
    """Derivative of g_mu (the slope integrand), vectorized and even."""
    c = c_of_mu(mu)
    x = np.asarray(x, dtype=float)
    return _integrand(x * x, c)


def g_mu(x: float, mu: float) -> float:
    """Odd slope quadrature from 0 to x, absolute tolerance 1e-10."""
    c = c_of_mu(mu)
    if x == 0.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(lambda y: float(_integrand(y * y, c)),
                                  0.0, abs(x), epsabs=1e-12, epsrel=1e-12,
                                  limit=200)
    if err > 1e-10:
        raise QuadratureError("g_mu quadrature did not converge", err)
    return math.copysign(1.0, x) * val


def t_mu(mu: float) -> float:
    """Half-period of the profile: infinite iff |mu| <= 1/2.

    The improper integral uses the rationalized integrand, split at y = 1
    with the tail mapped back to (0, 1] by y -> 1/y; both pieces are smooth
    and bounded.
    """
    if abs(mu) <= 0.5:
        return math.inf
    c = c_of_mu(mu)

    def f_head(y: float) -> float:
        return abs(float(_integrand(y * y, c)))

    def f_tail(t: float) -> float:
        return abs(float(_integrand(1.0 / (t * t), c))) / (t * t)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, e1 = integrate.quad(f_head, 0.0, 1.0, epsabs=1e-14, epsrel=1e-14,
                                  limit=300)
        tail, e2 = integrate.quad(f_tail, 0.0, 1.0, epsabs=1e-14, epsrel=1e-14,
                                  limit=300)
    if e1 + e2 > 1e-10:
        raise QuadratureError("t_mu quadrature did not converge", e1 + e2)
    return head + tail


def blowup_half_period(mu: float, f_stop: float = 1e8) -> float:
    """Half-period located by integrating the profile ODE to blow-up.

    Independent of the quadrature route: starting from f(0) = 0,
    f'(0) = 1 - 2mu, the system v(f), q(f) = f'(v(f)) with
    dv/df = 1/q, dq/df = 2 f (q-1)(q-2) / ((4+f^2) q) is integrated until
    |f| = f_stop, and the pole location follows from the asymptote
    f ~ A/(t - v): t = v_end + f_end/q_end up to O(f_stop^-3).
    """
    if abs(mu) <= 0.5:
        return math.inf
    sign = 1.0 if mu < -0.5 else -1.0  # f -> +inf for mu < -1/2, else -inf

    def rhs(f, y):
        v, q = y
        return [1.0 / q, 2.0 * f * (q - 1.0) * (q - 2.0) / ((4.0 + f * f) * q)]

    sol = integrate.solve_ivp(rhs, (0.0, sign * f_stop), [0.0, 1.0 - 2.0 * mu],
                              method="DOP853", rtol=1e-13, atol=1e-13)
    if not sol.success:
        raise ArithmeticError(f"profile ODE integration failed: {sol.message}")
    v_end, q_end = sol.y[0, -1], sol.y[1, -1]
    return float(v_end + sign * f_stop / q_end)


def _f_prime_rhs(f, c: float):
    """Profile slope from the conserved quantity, as a function of f."""
    f = np.asarray(f, dtype=float)
    s1 = np.sqrt(4.0 + c * c * f * f)
    s2 = np.sqrt(4.0 + f * f)
    return 2.0 * s1 / (s1 + c * s2)


class _ProfileInverter:
    """Marching Newton inversion of g_mu with incremental quadrature.

    The integrand never changes sign, so g(x) = s0 * sign(x) * Psi(|x|) with
    Psi increasing on [0, inf) and of a single convexity per branch; Newton
    on Psi therefore converges monotonically from any warm start.  Psi is
    evaluated by accumulating fixed Gauss-Legendre panels between successive
    iterates; panel lengths are capped by the distance to the nearest complex
    singularity of the integrand, keeping every panel exact to machine
    precision.
    """

    _GL_X, _GL_W = np.polynomial.legendre.leggauss(15)

    def __init__(self, mu: float):
        self.mu = mu
        self.c = c_of_mu(mu)
        self.s0 = 1.0 if mu < 0.5 else -1.0  # sign of the integrand
        self.panel = min(0.125, 0.5 / max(1.0, abs(self.c)))
        self._xi = 0.0
        self._psi = 0.0

    def _dpsi(self, xi: float) -> float:
        return abs(float(_integrand(np.array(xi * xi), self.c)))

    def _advance(self, xi_new: float) -> float:
        """Move the (xi, Psi(xi)) state to xi_new >= 0 and return Psi."""
        a, b = self._xi, xi_new
        if a != b:
            n = max(1, int(math.ceil(abs(b - a) / self.panel)))
            edges = np.linspace(a, b, n + 1)
            mids = (edges[:-1] + edges[1:]) / 2.0
            half = (edges[1:] - edges[:-1]) / 2.0
            xs = mids[:, None] + half[:, None] * self._GL_X[None, :]
            vals = np.abs(_integrand(xs * xs, self.c))
            self._psi += float(np.sum((vals @ self._GL_W) * half))
        self._xi = xi_new
        return self._psi

    def solve(self, v: float) -> float:
        """f(v): the x with g(x) = v, to near machine precision."""
        if v == 0.0:
            return 0.0
        w = abs(v)
        psi = self._advance(self._xi)
        for _ in range(100):
            err = psi - w
            if abs(err) < 1e-13 * max(1.0, w):
                break
            step = -err / self._dpsi(self._xi)
            xi_next = self._xi + step
            if xi_next < 0.0:
                xi_next = 0.5 * self._xi
            if xi_next == self._xi:
                break
            psi = self._advance(xi_next)
        else:
            raise ArithmeticError(
                f"profile inversion stalled at v={v!r} (mu={self.mu})")
        return math.copysign(self._xi, v * self.s0)

    def march(self, v_sorted: np.ndarray) -> np.ndarray:
        """Invert a batch ordered by increasing |v| (warm-started)."""
        out = np.empty_like(v_sorted)
        for i, v in enumerate(v_sorted):
            out[i] = self.solve(float(v))
        return out


@dataclass(frozen=True)
class HelicoidProfile:
    """Sampled profile of one family member.

    ``samples`` view the stored arrays as (v, f(v), h(v)) rows with
    h = (v - f)/2.  ``sigma`` is None at mu = 0 (the umbrella, no fiber).
    """

    mu: float
    t_mu: float
    v: np.ndarray
    f: np.ndarray
    h: np.ndarray
    sigma: Optional[float] = None
    _inverter: Optional[_ProfileInverter] = field(default=None, repr=False, compare=False)

    @property
    def samples(self):
        return list(zip(self.v.tolist(), self.f.tolist(), self.h.tolist()))

    @property
    def classification(self) -> str:
        return HelicoidParams(self.mu).classification

    def f_at(self, v: float) -> float:
        """Profile value at an arbitrary |v| < t_mu (fresh inversion)."""
        return float(self.f_many(np.array([v]))[0])

    def f_many(self, v) -> np.ndarray:
        """Profile values on an arbitrary batch, warm-started by |v| order."""
        v = np.asarray(v, dtype=float)
        if np.any(np.abs(v) >= self.t_mu):
            worst = float(np.max(np.abs(v)))
            raise GeometryError(
                f"|v|={worst} outside the open domain (t_mu={self.t_mu})")
        if self.mu == 0.0:
            return v.copy()
        if self.mu == 0.5:
            return np.zeros_like(v)
        if self.mu == -0.5:
            return 2.0 * v
        inv = _ProfileInverter(self.mu)
        order = np.argsort(np.abs(v), kind="stable")
        f = np.empty_like(v)
        f[order] = inv.march(v[order])
        return f

    def f_prime_at(self, v: float) -> float:
        if self.mu == 0.5:
            return 0.0
        return float(_f_prime_rhs(self.f_at(v), c_of_mu(self.mu)))


def invert_profile(mu: float, v_grid: Sequence[float]) -> HelicoidProfile:
    """Solve g_mu(f) = v on a grid and assemble the profile record.

    Samples with |v| >= t_mu are rejected (the profile only exists on the
    open interval).  mu in {0, +-1/2} short-circuit to their closed forms.
    """
    v = np.asarray(list(v_grid), dtype=float)
    t = t_mu(mu)
    if np.any(np.abs(v) >= t):
        bad = v[np.abs(v) >= t]
        raise GeometryError(
            f"{bad.size} sample(s) outside the open domain |v| < t_mu = {t}")
    sig = None if mu == 0.0 else sigma(mu)
    inverter = None
    if mu == 0.0:
        f = v.copy()
    elif mu == 0.5:
        f = np.zeros_like(v)
    elif mu == -0.5:
        f = 2.0 * v
    else:
        inverter = _ProfileInverter(mu)
        order = np.argsort(np.abs(v), kind="stable")
        f = np.empty_like(v)
        # march outward in |v| so each solve warm-starts from its neighbor
        f[order] = inverter.march(v[order])
    h = (v - f) / 2.0
    return HelicoidProfile(mu=mu, t_mu=t, v=v, f=f, h=h, sigma=sig,
                           _inverter=inverter)


def residual_grid(mu: float, spacing: float = 1e-3, fraction: float = 0.9,
                  window: float = 2.0) -> np.ndarray:
    """Symmetric uniform grid |v| <= fraction * t_mu (or <= window if entire)."""
    t = t_mu(mu)
    vmax = window if math.isinf(t) else fraction * t
    n = int(math.floor(vmax / spacing))
    return spacing * np.arange(-n, n + 1)


def _uniform_spacing(v: np.ndarray) -> float:
    dv = np.diff(v)
    if v.size < 5:
        raise GeometryError("need at least 5 profile samples for differences")
    if np.max(np.abs(dv - dv[0])) > 1e-9 * max(abs(dv[0]), 1e-30):
        raise GeometryError("residuals need a uniform sample grid")
    return float(dv[0])


def minimality_residual(profile: HelicoidProfile) -> float:
    """Max interior defect of (4+f^2) f'' = 2 f (f'-1)(f'-2), centered differences."""
    dv = _uniform_spacing(profile.v)
    f = profile.f
    fp = (f[2:] - f[:-2]) / (2.0 * dv)
    fpp = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dv * dv)
    fm = f[1:-1]
    res = (4.0 + fm * fm) * fpp - 2.0 * fm * (fp - 1.0) * (fp - 2.0)
    return float(np.max(np.abs(res)))


def first_integral_residual(profile: HelicoidProfile) -> float:
    """Max defect of the conserved slope law f' = 2 s1/(s1 + c s2)."""
    if profile.mu == 0.5:
        raise GeometryError("first integral not applicable at mu = 1/2")
    dv = _uniform_spacing(profile.v)
    c = c_of_mu(profile.mu)
    f = profile.f
    fp = (f[2:] - f[:-2]) / (2.0 * dv)
    rhs = _f_prime_rhs(f[1:-1], c)
    return float(np.max(np.abs(fp - rhs)))


def sigma(mu: float) -> float:
    """Limit rotation speed sigma = (1+2mu)^2 / (4mu); undefined at mu = 0."""
    if mu == 0.0:
        raise GeometryError("sigma is undefined at mu = 0")
    return (1.0 + 2.0 * mu) ** 2 / (4.0 * mu)


def theta_prime(s, mu: float):
    """Normal rotation speed -sigma/(1 + sigma^2 s^2) along the vertex fiber."""
    if abs(mu) <= 0.5:
        raise GeometryError("theta_prime needs |mu| > 1/2 (no vertical fiber otherwise)")
    sg = sigma(mu)
    s = np.asarray(s, dtype=float)
    out = -sg / (1.0 + sg * sg * s * s)
    return float(out) if out.ndim == 0 else out


def angle_function(u: float, v: float, profile: HelicoidProfile) -> float:
    """Angle function 2 / sqrt(u^2 (1-2h')^2 + (2h+v)^2 + 4), in (0, 1].

    h' is evaluated analytically through h' = (1 - f')/2 and the conserved
    slope law, never by differencing the samples.
    """
    f = profile.f_at(v)
    fp = profile.f_prime_at(v)
    h = (v - f) / 2.0
    hp = (1.0 - fp) / 2.0
    return 2.0 / math.sqrt(u * u * (1.0 - 2.0 * hp) ** 2 + (2.0 * h + v) ** 2 + 4.0)


# -- the minimal model graph --------------------------------------------------

def model_slope(v: float, profile: HelicoidProfile) -> float:
    """Slope (f(v) - v)/2 of the ruled minimal graph z = u * model_slope(v)."""
    return (profile.f_at(v) - v) / 2.0


def model_height(u, v, profile: HelicoidProfile):
    """Height field u * (f(v) - v)/2 of the minimal member over the (u, v) chart."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    fv = profile.f_many(v.ravel()).reshape(v.shape) if v.ndim else profile.f_at(float(v))
    out = u * (fv - v) / 2.0
    return float(out) if np.ndim(out) == 0 else out


def model_angle_function(u: float, v: float, profile: HelicoidProfile) -> float:
    """Angle function 2 / sqrt(4 + f^2 + u^2 (f'-2)^2) of the minimal model."""
    f = profile.f_at(v)
    fp = profile.f_prime_at(v)
    return 2.0 / math.sqrt(4.0 + f * f + u * u * (fp - 2.0) ** 2)


def vertex_base_distance(mu: float) -> float:
    """Base distance from the origin to the fiber projection, closed form.

    Equals int_0^inf 2 |g'(x)| / sqrt(4+x^2) dx; the two asinh terms
    telescope to |ln|c||.
    """
    if abs(mu) <= 0.5:
        raise GeometryError("needs |mu| > 1/2 (no finite fiber otherwise)")
    return abs(math.log(abs(c_of_mu(mu))))


def vertex_base_distance_quadrature(mu: float) -> float:
    """Quadrature route for the base distance (dual check of the closed form)."""
    if abs(mu) <= 0.5:
        raise GeometryError("needs |mu| > 1/2")
    c = c_of_mu(mu)

    def f_head(x: float) -> float:
        return 2.0 * abs(float(_integrand(x * x, c))) / math.sqrt(4.0 + x * x)

    def f_tail(t: float) -> float:
        return f_head(1.0 / t) / (t * t)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, _ = integrate.quad(f_head, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
        tail, _ = integrate.quad(f_tail, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    return head + tail


@contextlib.contextmanager
def fault_injection(eps: float):
    """Perturb the slope integrand additively (negative-control audits)."""
    global _FAULT_INTEGRAND_EPS
    old = _FAULT_INTEGRAND_EPS
    _FAULT_INTEGRAND_EPS = float(eps)
    try:
        yield
    finally:
        _FAULT_INTEGRAND_EPS = old


def profile_csv_lines(profile: HelicoidProfile) -> list:
    """CSV export: metadata comments, then v,f,h rows (deterministic)."""
    sig = "" if profile.sigma is None else f"{profile.sigma!r}"
    lines = [
        f"# mu={profile.mu!r}",
        f"# t_mu={profile.t_mu!r}",
        f"# sigma={sig}",
        "v,f,h",
    ]
    for v, f, h in zip(profile.v, profile.f, profile.h):
        lines.append(f"{float(v)!r},{float(f)!r},{float(h)!r}")
    return lines
