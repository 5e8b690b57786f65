import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helicoidal.surface_domain import (
    BranchPointCollision,
    DegenerateZeros,
    Params,
    SurfacePoint,
    apply_symmetry,
    base_point,
    branch_points,
    circle_samples,
    domain_point,
    domain_w,
    imaginary_plus,
    lift_path,
    marked_points,
    quartic,
    w_values,
)

rhos = st.floats(0.05, math.pi - 0.05)
unit = st.floats(0.0, 0.999)
angles = st.floats(-math.pi / 2, math.pi / 2)


def expanded_quartic(z, rho):
    return z ** 4 + 1 - 2 * z ** 2 * math.cos(rho)


@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), rhos)
def test_quartic_matches_expanded_form(z, rho):
    assert abs(quartic(z, rho) - expanded_quartic(z, rho)) <= 1e-12 * (1 + abs(z) ** 4)


def test_branch_points_are_roots():
    for rho in (0.3, 1.5, 3.0):
        for e in branch_points(rho):
            assert abs(quartic(e, rho)) < 1e-14
            assert abs(abs(e) - 1) < 1e-15


@given(unit, angles, rhos)
def test_domain_w_squares_to_quartic(r, th, rho):
    x = r * cmath.exp(1j * th)
    w = domain_w(x, rho)
    assert abs(w * w - expanded_quartic(x, rho)) < 1e-12
    # same function in the chart at infinity: omega^2 = zeta^4 + 1 - 2 zeta^2 cos rho
    p = domain_point(x, rho, outer=True)
    assert p.at_infinity and p.on_curve(rho)


@given(unit, angles, rhos)
def test_domain_w_is_continuous_from_origin(r, th, rho):
    # domain_w is the analytic branch with w(0) = 1: follow a ray with small steps
    xs = np.linspace(0, r, 200) * cmath.exp(1j * th)
    w = domain_w(xs, rho)
    assert abs(w[0] - 1) < 1e-15
    assert np.max(np.abs(np.diff(w))) < 0.1


def test_base_point_and_imaginary_points():
    rho = 1.2
    p = base_point(rho)
    assert p.z == 1 and p.on_curve(rho)
    q = imaginary_plus(0.4, rho)
    assert q.on_curve(rho) and abs(q.z - 0.4j) < 1e-15


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=5, allow_nan=False), rhos)
def test_chart_flip_is_involution(z, rho):
    w = w_values(z, rho)[0]
    p = SurfacePoint(z, w)
    q = p.flipped_chart()
    assert q.on_curve(rho, 1e-10)
    assert q.flipped_chart().close_to(p, 1e-9 * (1 + abs(w)))


@settings(max_examples=50)
@given(st.complex_numbers(min_magnitude=0.2, max_magnitude=1.9, allow_nan=False), rhos,
       st.sampled_from(["S", "S0p", "S2p"]))
def test_symmetries_are_involutions_on_curve(z, rho, sym):
    p = SurfacePoint(z, w_values(z, rho)[1])
    q = apply_symmetry(sym, p)
    assert q.on_curve(rho, 1e-10)
    assert apply_symmetry(sym, q).close_to(p, 1e-9)


def test_lift_around_one_branch_point_changes_sheet():
    rho = 1.0
    e = branch_points(rho)[0]
    pts = circle_samples(e, 0.1, 64)
    start = SurfacePoint(pts[0], w_values(pts[0], rho)[0])
    path = lift_path(pts, start, rho)
    assert abs(path.end.w + start.w) < 1e-10


def test_lift_around_two_branch_points_closes():
    rho = 1.0
    pts = circle_samples(1.0, 0.9, 128)
    start = SurfacePoint(pts[0], w_values(pts[0], rho)[0])
    path = lift_path(pts, start, rho)
    assert abs(path.end.w - start.w) < 1e-10
    for p in path.samples:
        assert p.on_curve(rho)


def test_lift_through_branch_point_raises():
    rho = 1.0
    e = branch_points(rho)[0]
    pts = [e - 0.1, e, e + 0.1]
    start = SurfacePoint(pts[0], w_values(pts[0], rho)[0])
    with pytest.raises(BranchPointCollision):
        lift_path(pts, start, rho)


def test_marked_points_on_curve_and_degenerate_case():
    rho = 2.0
    mp = marked_points(0.5, 0.3, rho)
    assert len(mp.ends) == 4 and len(mp.zeros) == 4
    for p in mp.ends + mp.zeros:
        assert p.on_curve(rho)
    with pytest.raises(DegenerateZeros):
        marked_points(0.5, 0.0, rho)
    with pytest.raises(ValueError):
        marked_points(0.5, 0.6, rho)


@pytest.mark.parametrize("kw", [dict(a=1.0, rho=1, beta=1), dict(a=0.5, rho=0, beta=1),
                                dict(a=0.5, rho=1, beta=0), dict(a=0.5, rho=1, beta=1, lam=0)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        Params(**kw)
