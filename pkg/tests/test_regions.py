import math

import numpy as np
import pytest

from sphere_edgelab import (Cap, GraphRegion, PreconditionError,
                            ValidationError, boundary_curve,
                            cap_area_difference, cap_harmonic_coeffs,
                            cap_region, cap_tangency_residuals, demo_region,
                            geodesic_distance, nearest_boundary_point,
                            osculating_cap, region_harmonic_coeffs,
                            region_indicator, segment_validate, sphere_point)
from sphere_edgelab.geometry import rot_y

E3 = np.array([0.0, 0.0, 1.0])


def test_demo_region_poles():
    region = demo_region()
    tilted_pole = rot_y(np.pi / 5) @ E3
    assert region_indicator(region, tilted_pole[None, :])[0] == 1.0
    assert region_indicator(region, -tilted_pole[None, :])[0] == 0.0


def test_demo_region_graph_bounds():
    region = demo_region()
    phis = np.linspace(0, 2 * np.pi, 2000)
    g = region.g(phis)
    # extreme values of the three-term series stay within the coefficient sum
    assert g.min() >= 7.0 / 500.0 * (20 * np.pi - 12) - 1e-12
    assert g.max() <= 7.0 / 500.0 * (20 * np.pi + 12) + 1e-12


def test_cap_region_indicator():
    region = cap_region(Cap(E3, np.pi / 3))
    assert region_indicator(region, sphere_point(np.pi / 2, 0.0)[None, :])[0] == 0.0
    assert region_indicator(region, E3[None, :])[0] == 1.0
    # boundary points count as outside
    assert region_indicator(region, sphere_point(np.pi / 3, 0.4)[None, :])[0] == 0.0


def test_region_requires_interior_graph():
    with pytest.raises(ValidationError):
        GraphRegion(a0=0.2, a=[0.3])       # dips to -0.1


def test_region_json_round_trip(tmp_path):
    region = demo_region()
    path = tmp_path / "region.json"
    region.save_json(path)
    back = GraphRegion.load_json(path)
    phis = np.linspace(0, 2 * np.pi, 64)
    np.testing.assert_allclose(back.g(phis), region.g(phis), atol=1e-15)
    np.testing.assert_allclose(back.rotation, region.rotation, atol=1e-12)


def test_cap_boundary_geometry():
    phi0 = np.pi / 3
    curve = boundary_curve(cap_region(Cap(E3, phi0)), samples=1024)
    assert abs(curve.length - 2 * np.pi * np.sin(phi0)) < 1e-6
    ts = np.linspace(0, curve.length, 64)
    np.testing.assert_allclose(curve.curvature(ts), 1.0 / np.sin(phi0),
                               atol=1e-6)


def test_great_circle_geometry():
    curve = boundary_curve(GraphRegion(a0=np.pi / 2), samples=1024)
    ts = np.linspace(0, curve.length, 64)
    np.testing.assert_allclose(curve.curvature(ts), 1.0, atol=1e-8)
    rep = segment_validate(curve, 0.0, curve.length, delta=1.0)
    # arcsin near 1 amplifies curvature rounding by a square root
    assert abs(rep.phi_star - np.pi / 2) < 1e-6


def test_curve_unit_speed_invariants(wiggly_curve):
    ts = np.linspace(0, wiggly_curve.length, 200)
    v = wiggly_curve.point(ts)
    v1 = wiggly_curve.deriv1(ts)
    assert np.max(np.abs(np.linalg.norm(v, axis=-1) - 1)) < 1e-8
    assert np.max(np.abs(np.linalg.norm(v1, axis=-1) - 1)) < 1e-8
    assert np.min(wiggly_curve.curvature(ts)) >= 1.0 - 1e-6


def test_curve_min_samples(wiggly_region):
    with pytest.raises(PreconditionError):
        boundary_curve(wiggly_region, samples=100)


def test_curve_csv_export(tmp_path, wiggly_curve):
    path = tmp_path / "curve.csv"
    wiggly_curve.export_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "t,x,y,z,kx,ky,kz"


def test_segment_validate_cap_segment():
    # segment short enough that the chord/tangent oscillation bounds hold
    phi0 = np.pi / 3
    curve = boundary_curve(cap_region(Cap(E3, phi0)), samples=1024)
    rep = segment_validate(curve, 0.0, 0.09, delta=0.03)
    assert abs(rep.phi_star - phi0) < 1e-6
    assert rep.eq1_ok
    assert rep.d_delta <= 0.03 / 5.0 * np.sin(rep.phi_star / 2.0) + 1e-15
    assert rep.d_delta > 0


def test_segment_validate_preconditions(wiggly_curve):
    with pytest.raises(PreconditionError):
        segment_validate(wiggly_curve, 0.0, 1.0, delta=2.0)
    with pytest.raises(PreconditionError):
        segment_validate(wiggly_curve, 0.0, 1.0, delta=0.6)


def test_nearest_point_on_curve(wiggly_curve):
    t0 = 2.0
    x = wiggly_curve.point(t0)
    res = nearest_boundary_point(wiggly_curve, x)
    assert res.distance < 1e-9
    assert abs(res.t - t0) < 1e-6


def test_nearest_point_cap_center():
    phi0 = np.pi / 3
    curve = boundary_curve(cap_region(Cap(E3, phi0)), samples=1024)
    res = nearest_boundary_point(curve, E3)
    assert abs(res.distance - phi0) < 1e-8
    assert res.inside


def test_nearest_point_normal_displacement(wiggly_curve):
    t0 = 1.1
    v = wiggly_curve.point(t0)
    v1 = wiggly_curve.deriv1(t0)
    normal = np.cross(v, v1)
    x = np.cos(0.05) * v + np.sin(0.05) * normal
    res = nearest_boundary_point(wiggly_curve, x)
    assert abs(res.distance - 0.05) < 1e-8
    assert abs(res.t - t0) < 1e-6
    assert abs(np.dot(x, wiggly_curve.deriv1(res.t))) < 1e-6
    assert res.inside          # displaced toward the region side


def test_osculating_cap_self_consistency():
    cap = Cap(sphere_point(0.8, 0.4), np.pi / 3)
    curve = boundary_curve(cap_region(cap), samples=1024)
    for p in (0.2, 1.7, 4.0):
        oc = osculating_cap(curve, p)
        assert np.linalg.norm(oc.center - cap.center) < 1e-9
        assert abs(oc.radius - cap.radius) < 1e-9


def test_osculating_cap_large_cap():
    # boundary bending away from the region: the matching cap opens wide
    cap = Cap(E3, 2.2)
    curve = boundary_curve(cap_region(cap), samples=1024)
    oc = osculating_cap(curve, 0.9)
    assert np.linalg.norm(oc.center - cap.center) < 1e-9
    assert abs(oc.radius - 2.2) < 1e-9


def test_osculating_cap_great_circle():
    curve = boundary_curve(GraphRegion(a0=np.pi / 2), samples=1024)
    oc = osculating_cap(curve, 1.0)
    assert abs(oc.radius - np.pi / 2) < 1e-9
    v, v1 = curve.point(1.0), curve.deriv1(1.0)
    np.testing.assert_allclose(oc.center, np.cross(v, v1), atol=1e-9)


def test_osculating_tangency_on_wiggly_curve(wiggly_curve):
    ts = np.linspace(0, wiggly_curve.length, 32, endpoint=False)
    for t in ts:
        oc = osculating_cap(wiggly_curve, t)
        res = cap_tangency_residuals(oc, wiggly_curve.point(t),
                                     wiggly_curve.deriv1(t),
                                     wiggly_curve.deriv2(t))
        assert max(res) < 1e-6


def test_area_difference_self_cap_vanishes():
    cap = Cap(sphere_point(0.8, 0.4), np.pi / 3)
    curve = boundary_curve(cap_region(cap), samples=1024)
    val = cap_area_difference(cap_region(cap), curve, 0.5, 0.02)
    assert abs(val) < 1e-14


def test_area_difference_quartic_ratio(wiggly_region, wiggly_curve):
    rep = segment_validate(wiggly_curve, 0.0, wiggly_curve.length, delta=1.0)
    p = 1.3
    r = rep.d_delta / 4.0
    a1 = cap_area_difference(wiggly_region, wiggly_curve, p, r,
                             d_delta=rep.d_delta)
    a2 = cap_area_difference(wiggly_region, wiggly_curve, p, r / 2.0,
                             d_delta=rep.d_delta)
    assert a1 > 0 and a2 > 0
    assert a1 / a2 >= 2.0 ** 3.5


def test_area_difference_radius_guard(wiggly_region, wiggly_curve):
    with pytest.raises(PreconditionError):
        cap_area_difference(wiggly_region, wiggly_curve, 1.0, 0.5, d_delta=0.1)


def test_cap_coeffs_closed_form_values():
    coeffs = cap_harmonic_coeffs(Cap(E3, np.pi / 3), 8)
    assert abs(coeffs.get(0, 0) - math.sqrt(math.pi) / 2.0) < 1e-12
    half = cap_harmonic_coeffs(Cap(E3, np.pi / 2), 8)
    assert abs(half.get(2, 0)) < 1e-15
    for n in range(9):
        for k in range(-n, n + 1):
            if k != 0:
                assert coeffs.get(n, k) == 0.0


def test_cap_coeffs_vs_quadrature():
    cap = Cap(sphere_point(0.8, 0.4), np.pi / 3)
    closed = cap_harmonic_coeffs(cap, 16)
    sampled, tail = region_harmonic_coeffs(cap_region(cap), 16, 256)
    assert np.max(np.abs(closed.values - sampled.values)) < 2e-3
    assert tail > 0.0          # indicators are not band-limited


def test_region_coeffs_real_symmetry(wiggly_region):
    coeffs, _ = region_harmonic_coeffs(wiggly_region, 12, 96)
    assert coeffs.real_symmetry_error() < 1e-10
