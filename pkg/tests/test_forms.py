import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from helicoidal import period_solver as ps
from helicoidal.forms import (
    DerivedConstants,
    FormKind,
    NearPole,
    end_root,
    eval_form,
    eval_form_array,
    pullback_check,
    random_curve_points,
    residue_at,
)
from helicoidal.surface_domain import Params, SurfacePoint, marked_points, quartic

A, RHO, BETA = 0.45, 1.7, 0.5


@pytest.fixture(scope="module")
def setup():
    b = ps.solve_b(A, RHO, BETA)
    a3 = ps.compute_a3(A, RHO, BETA, b)
    return Params(A, RHO, BETA, 1.3), DerivedConstants.from_params(A, b, RHO, a3)


def test_end_root_matches_quartic():
    for x in (0.1, 0.5, 0.99):
        for rho in (0.2, 1.5, 3.0):
            assert abs(end_root(x, rho) ** 2 - quartic(1j * x, rho).real) < 1e-14


def test_constants_signs(setup):
    _, k = setup
    assert k.c1 > 0 and k.c2 < 0 and k.a1 > 0 and k.a2 < 0
    with pytest.raises(ValueError):
        DerivedConstants.from_params(0.3, 0.5, 1.0)


def test_coefficients_match_hand_formulas(setup):
    p, k = setup
    z = 0.3 + 0.7j
    w = cmath.sqrt(quartic(z, RHO))
    q = SurfacePoint(z, w)
    phi3 = p.lam * (w + k.c2 * 1j * z) / ((w + k.c1 * 1j * z) * w)
    eta1 = 1j * p.beta / (k.a1 * (w + k.c1 * 1j * z)) + 1j / (k.a2 * (w + k.c2 * 1j * z))
    assert eval_form(FormKind.Phi3, q, p, k) == pytest.approx(phi3, rel=1e-14)
    assert eval_form(FormKind.Eta1, q, p, k) == pytest.approx(eta1, rel=1e-14)
    assert eval_form(FormKind.DLogG, q, p, k) == pytest.approx(eta1 + k.a3 * 1j / w, rel=1e-14)
    g = 0.4 - 0.2j
    assert eval_form(FormKind.Phi1, q, p, k, g) == pytest.approx(0.5 * (1 / g - g) * phi3, rel=1e-14)
    with pytest.raises(ValueError):
        eval_form(FormKind.Phi2, q, p, k)


def test_infinity_chart_is_pullback(setup):
    # f(z) dz with z = 1/zeta must equal -f(zeta, omega) dzeta
    p, k = setup
    zeta = 0.2 + 0.35j
    om = cmath.sqrt(quartic(zeta, RHO))
    z, w = 1 / zeta, om / zeta ** 2
    for kind in (FormKind.Phi3, FormKind.Eta1, FormKind.Eta2, FormKind.DLogG):
        lhs = eval_form_array(kind, z, w, p, k) * (-1 / zeta ** 2)
        rhs = eval_form_array(kind, zeta, om, p, k, inf_chart=True)
        assert abs(lhs - rhs) < 1e-12 * max(1, abs(rhs))


def contour_residue(kind, center, p, k, r=1e-3):
    """Independent residue: scipy quad over a circle, sheet followed by nearest root."""
    def f(t, part):
        z = center.z + r * cmath.exp(1j * t)
        w = cmath.sqrt(quartic(z, RHO))
        if abs(w - center.w) > abs(w + center.w):
            w = -w
        val = eval_form_array(kind, z, w, p, k, inf_chart=center.at_infinity) * 1j * r * cmath.exp(1j * t)
        return complex(val).real if part == 0 else complex(val).imag
    re = quad(f, 0, 2 * math.pi, args=(0,), epsabs=1e-13, limit=200)[0]
    im = quad(f, 0, 2 * math.pi, args=(1,), epsabs=1e-13, limit=200)[0]
    return complex(re, im) / (2j * math.pi)


def test_residues_against_quad(setup):
    p, k = setup
    mp = marked_points(A, k.b, RHO)
    for q in mp.ends + mp.zeros:
        for kind in (FormKind.DLogG, FormKind.Phi3):
            got = residue_at(kind, q, p, k)
            assert abs(got - contour_residue(kind, q, p, k)) < 1e-9


def test_phi3_end_residue_modulus(setup):
    p, k = setup
    mp = marked_points(A, k.b, RHO)
    for q in mp.ends:
        assert abs(abs(residue_at(FormKind.Phi3, q, p, k)) - p.lam * k.R(A)) < 1e-9


def test_near_pole_detected(setup):
    p, k = setup
    e = marked_points(A, k.b, RHO).ends[0]
    with pytest.raises(NearPole):
        eval_form(FormKind.Phi3, SurfacePoint(e.z + 1e-10, e.w), p, k)
    # holomorphic form has no poles
    eval_form(FormKind.Eta2, e, p, k)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["S", "S0p", "S2p"]),
       st.sampled_from([FormKind.Phi3, FormKind.Eta1, FormKind.Eta2, FormKind.DLogG]))
def test_pullback_table(setup, seed, sym, kind):
    p, k = setup
    q = random_curve_points(RHO, 1, np.random.default_rng(seed), 0.2, 2.5)[0]
    lhs, rhs = pullback_check(sym, kind, q, p, k)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))
