import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from helicoidal import builder, period_solver as ps

betas = st.floats(0.05, 1.0)
avals = st.floats(0.02, 0.98)
rhos = st.floats(0.05, math.pi - 0.05)


def ref_I(x, rho):
    return quad(lambda t: 1 / math.sqrt(t ** 4 + 1 + 2 * t * t * math.cos(rho)), 0, x,
                epsabs=1e-15, epsrel=1e-13)[0]


@settings(max_examples=40, deadline=None)
@given(avals, rhos, betas)
def test_solve_b_root_of_period_condition(a, rho, beta):
    b = ps.solve_b(a, rho, beta)
    assert 0 < b <= a
    assert abs(beta * ref_I(a, rho) - ref_I(b, rho)) < 1e-12
    assert abs(ps.F_func(a, b, rho, beta)) < 1e-13


@settings(max_examples=20, deadline=None)
@given(avals, rhos, st.floats(0.05, 0.9), st.floats(0.01, 0.09))
def test_solve_b_increasing_in_beta(a, rho, beta, step):
    assert ps.solve_b(a, rho, beta) < ps.solve_b(a, rho, beta + step)


def test_dF_db_finite_difference():
    a, b, rho, beta = 0.6, 0.3, 1.4, 0.5
    e = 1e-6
    fd = (ps.F_func(a, b + e, rho, beta) - ps.F_func(a, b - e, rho, beta)) / (2 * e)
    assert abs(fd - ps.dF_db(a, b, rho, beta)) < 1e-8


@pytest.mark.parametrize("a,rho,beta", [(0.3, 0.8, 0.4), (0.7, 2.5, 0.8), (0.95, 1.6, 0.2)])
def test_b_derivatives_against_finite_differences(a, rho, beta):
    e = 1e-5
    fr = (ps.solve_b(a, rho + e, beta) - ps.solve_b(a, rho - e, beta)) / (2 * e)
    fb = (ps.solve_b(a, rho, beta + e) - ps.solve_b(a, rho, beta - e)) / (2 * e)
    assert abs(fr - ps.b_rho_closed(a, rho, beta)) < 1e-8
    assert abs(fb - ps.b_beta_closed(a, rho, beta)) < 1e-8


@pytest.mark.parametrize("a,rho,beta", [(0.2, 0.5, 0.3), (0.5, 2.0, 0.5), (0.8, 2.9, 0.9), (0.999999, 1.0, 0.6)])
def test_h_against_quad(a, rho, beta):
    b = ps.solve_b(a, rho, beta)
    k = ps.arc_constants(a, b, rho)
    cc = k.c1 * k.c2 - 2 * math.cos(rho)

    def f(t):
        return (t ** 4 + 1 + cc * t * t) / ((t * t + a * a) * (t * t + 1 / a ** 2)
                                          * math.sqrt(t ** 4 + 1 - 2 * t * t * math.cos(rho)))

    ref = quad(f, 0, 1, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    assert abs(ps.h_func(a, rho, beta) - ref) < 1e-10 * max(1, abs(ref))


def test_h_small_a_limit_is_continuous():
    for rho, beta in ((0.7, 0.5), (2.0, 1.0)):
        assert abs(ps.h_func(1e-9, rho, beta) - ps.h_func(1e-5, rho, beta)) < 1e-3


@pytest.mark.parametrize("a,rho,beta", [(0.5, 2.0, 0.5), (0.3, 1.2, 0.8), (0.6, 0.7, 1.0)])
def test_h_and_d_against_complex_path_corners(a, rho, beta):
    # independent route: complex path integration through the chart, then read off corners
    s = ps.solved_from_params(a, rho, beta, lam=1.7)
    c = builder.corner_points(s)
    h_geo = c["inf-"][2] - c["0+"][2]
    assert abs(h_geo - 2 * 1.7 * ps.h_func(a, rho, beta)) < 1e-9
    assert abs((c["e+"][1] - c["e-"][1]) - 1.7 * ps.d_func(a, rho, beta)) < 1e-9
    assert abs(c["e+"][0] - c["e-"][0]) < 1e-9


def test_a3_formulas_agree():
    for a, rho, beta in ((0.4, 1.0, 0.3), (0.9, 2.8, 0.7), (0.1, 0.2, 0.5)):
        x, y = ps.a3_dual(a, rho, beta)
        assert abs(x - y) < 1e-10
        assert ps.compute_a3(a, rho, beta) == x


def test_beta_one_specialisation():
    for a in (0.2, 0.5, 0.8):
        assert ps.solve_b(a, 1.1, 1.0) == a
        assert ps.compute_a3(a, 1.1, 1.0) == 0.0
    d = [ps.d_func(a, 1.9, 1.0) for a in (0.1, 0.4, 0.7, 0.95)]
    assert max(d) - min(d) < 1e-9


def test_arc_log_gauss_starts_at_zero():
    assert abs(ps.arc_log_gauss(0.5, 1.5, 0.5, 0.0)[0]) < 1e-15


def test_trace_points_lie_on_height_zero_curve():
    tr = ps.trace_C1(0.5, 8, with_d=False)
    assert len(tr) >= 2
    for p in tr:
        assert abs(ps.h_func(p.a, p.rho, 0.5)) < 1e-10


def test_rho0_below_bound():
    for beta in (0.3, 0.6, 1.0):
        assert ps.C1_endpoints(beta)[1] <= math.pi / (beta + 1) + 1e-6


def test_solve_period_problem_beta_one(solved_one):
    s = solved_one
    assert s.root_count == 1
    a, rho = s.alt_route
    assert abs(a - s.params.a) < 1e-7 and abs(rho - s.params.rho) < 1e-7
    assert abs(s.residual_h) < 1e-8 and abs(s.residual_d) < 1e-8
    assert s.t_period == pytest.approx(math.pi * s.R)


def test_solve_period_problem_rejects_bad_beta():
    with pytest.raises(ValueError):
        ps.solve_period_problem(1.5)


def test_lambda_only_scales_period():
    s1 = ps.solved_from_params(0.4, 1.5, 0.5, 1.0)
    s2 = ps.solved_from_params(0.4, 1.5, 0.5, 2.5)
    assert s2.t_period == pytest.approx(2.5 * s1.t_period, rel=1e-15)
    assert s2.b == s1.b and s2.a3 == s1.a3
