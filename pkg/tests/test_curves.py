"""Disk Frenet integrator, prescribed-curvature oracles, dihedral assembly.

Oracle curves with known closed forms (geodesics, metric circles,
equidistants, horocycles) pin the integrator; everything else layers on it.
"""
import math

import numpy as np
import pytest

from ektlab.curves import (assemble_domain, conjugate_horizontal_profile,
                           conjugate_vertical_boundary, curve_csv_lines,
                           disk_distance, distance_to_geodesic_diameter,
                           integrate_prescribed_curvature,
                           integrate_prescribed_curvature_batch, kg_critical)
from ektlab.spaces import GeometryError


def circle_kg(R: float) -> float:
    return 1.0 / math.tanh(R)


def circle_arc(R: float, arc_fraction: float, step: float = 1e-3):
    """Counterclockwise arc of the metric circle of radius R about 0."""
    length = arc_fraction * 2.0 * math.pi * math.sinh(R)
    return integrate_prescribed_curvature(
        lambda s: circle_kg(R), (0.0, length),
        (math.tanh(R / 2.0), 0.0), math.pi / 2.0, step=step)


def test_geodesic_through_origin():
    c = integrate_prescribed_curvature(lambda s: 0.0, (0.0, 1.5),
                                       (0.0, 0.0), 0.0, step=1e-3)
    assert np.max(np.abs(c.y)) == 0.0
    assert c.x[-1] == pytest.approx(math.tanh(0.75), abs=1e-7)
    assert disk_distance((0.0, 0.0), (c.x[-1], c.y[-1])) == \
        pytest.approx(1.5, abs=1e-6)


def test_metric_circle_closes_after_one_period():
    R = 1.0
    c = circle_arc(R, 1.0)
    r = np.hypot(c.x, c.y)
    assert np.max(np.abs(r - math.tanh(R / 2.0))) < 1e-6
    assert math.hypot(c.x[-1] - c.x[0], c.y[-1] - c.y[0]) < 1e-6


def test_equidistant_curve_keeps_its_distance():
    D = 0.7
    sh = math.sinh(D)
    y0 = (math.sqrt(1.0 + sh * sh) - 1.0) / sh  # chart height at distance D
    c = integrate_prescribed_curvature(lambda s: -math.tanh(D), (0.0, 2.0),
                                       (0.0, y0), 0.0, step=1e-3)
    d = distance_to_geodesic_diameter(c.x, c.y)
    assert np.max(np.abs(d - D)) < 1e-6


def test_horocycle_is_a_tangent_euclidean_circle():
    c = integrate_prescribed_curvature(lambda s: 1.0, (0.0, 6.0),
                                       (0.0, 0.0), 0.0, step=1e-3)
    drift = np.abs(np.hypot(c.x, c.y - 0.5) - 0.5)
    assert np.max(drift) < 1e-7


def test_integrator_is_second_order():
    """Full-circle closure error drops ~4x when the step halves."""
    R = 0.8

    def closure(step):
        c = circle_arc(R, 1.0, step=step)
        return math.hypot(c.x[-1] - c.x[0], c.y[-1] - c.y[0])

    ratio = closure(2e-3) / closure(1e-3)
    assert 3.0 < ratio < 5.0


def test_unbounded_ranges_truncate_with_a_reason():
    g = integrate_prescribed_curvature(lambda s: 0.0, (0.0, math.inf),
                                       (0.0, 0.0), 0.0, step=1e-3)
    assert g.truncated_reason == "ideal boundary"
    assert 1.0 - math.hypot(g.x[-1], g.y[-1]) < 2e-6
    c = integrate_prescribed_curvature(lambda s: 2.0, (0.0, math.inf),
                                       (0.0, 0.0), 0.0, step=1e-3, s_cap=7.0)
    assert c.truncated_reason == "arclength cap"
    assert c.s[-1] == pytest.approx(7.0, abs=1e-2)


def test_two_sided_range_is_anchored_at_zero():
    c = integrate_prescribed_curvature(lambda s: 0.3, (-math.inf, math.inf),
                                       (0.0, 0.0), 0.5, step=1e-3, s_cap=1.0)
    assert c.s[0] == pytest.approx(-1.0, abs=2e-3)
    assert c.s[-1] == pytest.approx(1.0, abs=2e-3)
    i0 = int(np.argmin(np.abs(c.s)))
    assert (c.x[i0], c.y[i0]) == (0.0, 0.0)
    assert c.phi[i0] == 0.5


def test_bad_integrator_input_is_rejected():
    with pytest.raises(GeometryError):
        integrate_prescribed_curvature(lambda s: 0.0, (1.0, 0.0), (0, 0), 0.0)
    with pytest.raises(GeometryError):
        integrate_prescribed_curvature(lambda s: 0.0, (0.0, 1.0), (1.2, 0), 0.0)
    with pytest.raises(GeometryError):
        integrate_prescribed_curvature(lambda s: 0.0, (0.0, 1.0), (0, 0), 0.0,
                                       step=0.0)


def test_batch_matches_single_integration():
    kgs = np.array([0.0, 1.0, circle_kg(1.0)])
    inits = np.array([[0.0, 0.0], [0.0, 0.0], [math.tanh(0.5), 0.0]])
    angles = np.array([0.0, 0.0, math.pi / 2.0])
    batch = integrate_prescribed_curvature_batch(
        lambda s: kgs, 1.2, inits, angles, step=1e-3)
    assert len(batch) == 3
    for kg, init, ang, got in zip(kgs, inits, angles, batch):
        ref = integrate_prescribed_curvature(lambda s, kg=kg: float(kg),
                                             (0.0, 1.2), tuple(init), ang,
                                             step=1e-3)
        # compare the forward endpoints at matching arclength
        s_match = min(got.s[-1], ref.s[-1])
        ig = int(np.argmin(np.abs(got.s - s_match)))
        ir = int(np.argmin(np.abs(ref.s - s_match)))
        assert math.hypot(got.x[ig] - ref.x[ir], got.y[ig] - ref.y[ir]) < 1e-9


def test_kg_critical_matches_one_minus_theta_prime():
    from ektlab.helicoid import theta_prime
    rng = np.random.default_rng(7)
    for _ in range(50):
        mu = rng.uniform(0.51, 20.0) * rng.choice([-1.0, 1.0])
        s = rng.uniform(-5.0, 5.0)
        assert kg_critical(s, mu) == pytest.approx(
            1.0 - theta_prime(s, mu), abs=1e-13)


def test_kg_critical_limits_and_domain():
    # far along the fiber every member turns horocyclic
    assert kg_critical(1e6, 3.0) == pytest.approx(1.0, abs=1e-9)
    assert kg_critical(-1e6, -3.0) == pytest.approx(1.0, abs=1e-9)
    # waist value is 1 + sigma: above 1 on the positive branch, below on the
    # negative (even below -1 for strongly curved members)
    assert kg_critical(0.0, 3.0) > 1.0 > kg_critical(0.0, -3.0)
    assert kg_critical(0.0, -3.0) == pytest.approx(1.0 + 25.0 / (4 * -3.0))
    assert kg_critical(0.0, 3.0) == pytest.approx(1.0 + 49.0 / 12.0)
    with pytest.raises(GeometryError):
        kg_critical(0.0, 0.4)
    arr = kg_critical(np.array([0.0, 1.0]), 2.0)
    assert arr.shape == (2,)


def test_conjugate_vertical_boundary_records_turning():
    # theta' = 0 and H = 1/2 integrates a horocycle and zero turning
    c = conjugate_vertical_boundary(lambda s: 0.0, 0.5, (0.0, 4.0),
                                    ((0.0, 0.0), 0.0), step=1e-3)
    assert c.total_turning == pytest.approx(0.0, abs=1e-12)
    assert np.max(np.abs(np.hypot(c.x, c.y - 0.5) - 0.5)) < 1e-7
    assert np.allclose(c.theta_prime_samples, 0.0)
    # constant theta' integrates to theta' * length
    c2 = conjugate_vertical_boundary(lambda s: 0.25, 0.5, (0.0, 2.0),
                                     ((0.0, 0.0), 0.0), step=1e-3)
    assert c2.total_turning == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(GeometryError):
        conjugate_vertical_boundary(lambda s: 0.0, 0.7, (0.0, 1.0),
                                    ((0.0, 0.0), 0.0))


def test_conjugate_horizontal_profile_extremes():
    s = np.linspace(0.0, 1.0, 11)
    flat = conjugate_horizontal_profile(np.column_stack([s, np.ones_like(s)]))
    assert np.allclose(flat.base_arclength, s)
    assert np.allclose(flat.height, 0.0)
    steep = conjugate_horizontal_profile(np.column_stack([s, np.zeros_like(s)]))
    assert np.allclose(steep.base_arclength, 0.0)
    assert np.allclose(steep.height, -s)
    with pytest.raises(GeometryError):
        conjugate_horizontal_profile(np.column_stack([s, 1.5 * np.ones_like(s)]))


def test_assemble_domain_closes_a_circle_wedge():
    """A (1/2k)-period circle arc between two mirror rays tiles to the circle.

    The chain merge tolerance is 1e-8, so the arc endpoint must land on the
    second ray well within that; step 1e-4 puts the Heun endpoint error
    around 1e-10.
    """
    k = 3
    arc = circle_arc(1.0, 1.0 / (2 * k), step=1e-4)
    asm = assemble_domain(arc, k)
    assert asm.symmetry_k == k
    assert asm.closed
    assert asm.max_gap < 1e-8
    # the dihedral orbit of the arc reassembles the full metric circle
    assert len(asm.pieces) == 1
    total = sum(p.shape[0] - 1 for p in asm.pieces)
    assert total == pytest.approx(2 * k * (arc.points.shape[0] - 1), abs=2 * k)
    radii = np.hypot(asm.pieces[0][:, 0], asm.pieces[0][:, 1])
    assert np.max(np.abs(radii - math.tanh(0.5))) < 1e-6


def test_assemble_domain_rejects_off_ray_starts():
    arc = integrate_prescribed_curvature(lambda s: 0.0, (0.0, 0.5),
                                         (0.3, 0.2), 0.3, step=1e-3)
    with pytest.raises(GeometryError):
        assemble_domain(arc, 4)
    with pytest.raises(GeometryError):
        assemble_domain(arc, 1)


def test_curve_csv_lines_schema():
    c = conjugate_vertical_boundary(lambda s: 0.1, 0.5, (0.0, 0.5),
                                    ((0.0, 0.0), 0.0), step=1e-2)
    lines = curve_csv_lines(c)
    joined = "\n".join(lines)
    assert "# total_turning=" in joined
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "s,x,y,phi,kg"
    first = next(l for l in lines if not l.startswith("#") and l != header)
    assert len(first.split(",")) == 5
    for tok in first.split(","):
        float(tok)  # every field parses as a number
