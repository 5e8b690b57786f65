import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import ellipk

from helicoidal.forms import DerivedConstants, FormKind
from helicoidal.quadrature import (
    QuadratureError,
    QuadSpec,
    WeightedPiece,
    _panel_operators,
    cheb_coeffs,
    cheb_cumulative,
    cheb_definite,
    cheb_points,
    gk15,
    integrate_form,
    integrate_real,
    weighted_path_integral,
)
from helicoidal.surface_domain import Params, SurfacePoint, lift_path, quartic, w_values


def test_gk15_rules_integrate_polynomials():
    x, wk, wg = gk15()
    for deg in range(0, 23):
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        assert abs(np.dot(wk, x ** deg) - exact) < 1e-14
        if deg <= 13:
            assert abs(np.dot(wg, x ** deg) - exact) < 1e-14


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@settings(max_examples=40)
@given(st.floats(0.1, 20), st.floats(-3, 3), st.floats(0.01, 4))
def test_integrate_real_against_quad(k, lo, width):
    f = lambda x: np.cos(k * x) * np.exp(-x * x)
    ours = integrate_real(f, lo, lo + width)
    ref = quad(lambda x: math.cos(k * x) * math.exp(-x * x), lo, lo + width, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    assert abs(ours - ref) < 1e-12


def test_endpoint_singularities():
    right = QuadSpec(right_singular=True)
    left = QuadSpec(left_singular=True)
    assert abs(integrate_real(lambda x: 1 / np.sqrt(1 - x), 0, 1, right) - 2) < 1e-12
    assert abs(integrate_real(lambda x: 1 / np.sqrt(x), 0, 1, left) - 2) < 1e-12
    # complete elliptic integral: K(m) = int_0^{pi/2} dt / sqrt(1 - m sin^2 t)
    for m in (0.1, 0.9, 0.999):
        v = integrate_real(lambda t: 1 / np.sqrt(1 - m * np.sin(t) ** 2), 0, math.pi / 2)
        assert abs(v - ellipk(m)) < 1e-11 * ellipk(m)


def test_non_convergence_raises():
    with pytest.raises(QuadratureError):
        integrate_real(lambda x: np.sin(1 / x), 1e-12, 1, QuadSpec(max_depth=10))


def test_return_error_estimate():
    v, err = integrate_real(np.exp, 0, 1, return_error=True)
    assert abs(v - (math.e - 1)) < 1e-14 and err >= 0


@pytest.mark.parametrize("n", [8, 17, 32])
def test_panel_operators_match_reference_helpers(n):
    coef, cum, total = _panel_operators(n)
    x = cheb_points(n)
    rng = np.random.default_rng(n)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    c = cheb_coeffs(v)
    assert np.allclose(coef @ v, c, atol=1e-13)
    assert np.allclose(cum @ v, cheb_cumulative(c, np.append(x, 1.0)), atol=1e-13)
    assert abs(total @ v - cheb_definite(c)) < 1e-13


def test_cheb_helpers_on_polynomial():
    n = 16
    x = cheb_points(n)
    c = cheb_coeffs(3 * x ** 2 - x)
    assert abs(cheb_definite(c) - 2.0) < 1e-14
    assert np.allclose(cheb_cumulative(c, x), x ** 3 - x ** 2 / 2 + 1 + 0.5, atol=1e-14)


def test_weighted_integral_closed_form():
    # L(s) = i k s,  P = s:  Gp = int_0^1 exp(iks) s ds
    k = 7.3
    piece = weighted_path_integral(lambda s: (1j * k * np.ones_like(s), s), 0.0, 1.0)
    e = cmath.exp(1j * k)
    gp = e / (1j * k) + (e - 1) / k ** 2
    gm = (gp.conjugate())
    assert abs(piece.L - 1j * k) < 1e-13
    assert abs(piece.Gp[0] - gp) < 1e-13
    assert abs(piece.Gm[0] - gm) < 1e-13
    assert abs(piece.P[0] - 0.5) < 1e-14


def test_weighted_pieces_compose():
    fun = lambda s: (np.cos(3 * s) + 0.5j * s, np.vstack([np.exp(s), s * s]))
    whole = weighted_path_integral(fun, 0.0, 2.0)
    split = weighted_path_integral(fun, 0.0, 0.7).then(weighted_path_integral(fun, 0.7, 2.0))
    for a, b in ((whole.L, split.L), (whole.Gp, split.Gp), (whole.Gm, split.Gm), (whole.P, split.P)):
        assert np.allclose(a, b, atol=1e-13)
    z = WeightedPiece.zero(2)
    assert np.allclose(z.then(whole).Gp, whole.Gp)


def test_integrate_form_holomorphic_along_arc():
    # int i/w dz along a lifted path, checked against scipy quad on the parametrisation
    rho = 1.3
    a, b = 0.4, 0.2
    params = Params(a, rho, 0.5)
    k = DerivedConstants.from_params(a, b, rho)
    ts = np.linspace(0.2, 1.2, 40)
    zs = list(0.7 * np.exp(1j * ts))
    start = SurfacePoint(zs[0], w_values(zs[0], rho)[0])
    path = lift_path(zs, start, rho)
    got = integrate_form(FormKind.Eta2, path, params, k)

    def f(t, part):
        z = 0.7 * cmath.exp(1j * t)
        w = cmath.sqrt(quartic(z, rho))
        w0 = start.w
        # follow the sheet: the path is short and far from branch points
        if abs(w - w0) > abs(w + w0):
            w = -w
        v = 1j / w * 0.7j * cmath.exp(1j * t)
        return v.real if part == 0 else v.imag

    ref = complex(quad(f, 0.2, 1.2, args=(0,))[0], quad(f, 0.2, 1.2, args=(1,))[0])
    assert abs(got - ref) < 1e-11
    # callables are accepted as coefficients
    got2 = integrate_form(lambda z, w: 1j / w, path, None, None)
    assert abs(got2 - got) < 1e-13
