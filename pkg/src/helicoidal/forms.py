"""Meromorphic 1-forms on the torus, as coefficients against ``dz``.

All forms are written as ``f(z, w) dz`` in the finite chart.  Every one of
them changes sign under ``(z, w) -> (1/z, w/z^2)`` combined with
``dz = -dzeta/zeta^2``, so the coefficient in the chart at infinity is
``-f(zeta, omega)``.  That is what :func:`eval_form_array` returns for
points flagged ``at_infinity``.

Forms:

* ``Phi3``  = lam (w + c2 i z) / ((w + c1 i z) w) dz       height differential
* ``Eta1``  = (i beta / a1) / (w + c1 i z) + (i / a2) / (w + c2 i z)
* ``Eta2``  = i / w                                        holomorphic
* ``DLogG`` = Eta1 + a3 Eta2                               dg/g
* ``GPhi3``, ``Phi1``, ``Phi2`` need the Gauss map value ``g`` at the point.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .surface_domain import (
    Params,
    SurfacePoint,
    apply_symmetry,
    circle_samples,
    lift_path,
    quartic,
)

POLE_EPS = 1e-8


class FormKind(enum.Enum):
    Phi3 = "Phi3"
    Eta1 = "Eta1"
    Eta2 = "Eta2"
    DLogG = "DLogG"
    GPhi3 = "GPhi3"
    Phi1 = "Phi1"
    Phi2 = "Phi2"

    @property
    def needs_gauss(self) -> bool:
        return self in (FormKind.GPhi3, FormKind.Phi1, FormKind.Phi2)


class NearPole(ValueError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


def end_root(x: float, rho: float) -> float:
    """``sqrt(x^4 + 1 + 2 x^2 cos rho)``, the value of ``w`` at ``(ix)_+``."""
    c = math.cos(0.5 * rho)
    return math.sqrt(((1.0 - x) * (1.0 + x)) ** 2 + 4.0 * x * x * c * c)


@dataclass(frozen=True)
class DerivedConstants:
    c1: float
    c2: float
    a1: float
    a2: float
    b: float
    a3: float

    @classmethod
    def from_params(cls, a: float, b: float, rho: float, a3: float = 0.0) -> "DerivedConstants":
        if not (0.0 < b <= a < 1.0):
            raise ValueError("constants need 0 < b <= a < 1")
        wa = end_root(a, rho)
        wb = end_root(b, rho)
        return cls(
            c1=wa / a,
            c2=-wb / b,
            a1=a * wa / (1.0 - a ** 4),
            a2=-b * wb / (1.0 - b ** 4),
            b=b,
            a3=a3,
        )

    def R(self, a: float) -> float:
        """Modulus of the residue of ``Phi3/lam`` at the ends."""
        return a * a * (self.c1 - self.c2) / (1.0 - a ** 4)


def _coefficient(kind: FormKind, z, w, params: Params, k: DerivedConstants, g=None):
    iz = 1j * z
    if kind is FormKind.Eta2:
        return 1j / w
    if kind is FormKind.Eta1 or kind is FormKind.DLogG:
        f = (1j * params.beta / k.a1) / (w + k.c1 * iz) + (1j / k.a2) / (w + k.c2 * iz)
        if kind is FormKind.DLogG:
            f = f + k.a3 * 1j / w
        return f
    phi3 = params.lam * (w + k.c2 * iz) / ((w + k.c1 * iz) * w)
    if kind is FormKind.Phi3:
        return phi3
    if g is None:
        raise ValueError(f"{kind.value} requires the Gauss map value g")
    if kind is FormKind.GPhi3:
        return g * phi3
    if kind is FormKind.Phi1:
        return 0.5 * (1.0 / g - g) * phi3
    if kind is FormKind.Phi2:
        return 0.5j * (1.0 / g + g) * phi3
    raise ValueError(f"unknown form {kind!r}")


def eval_form_array(kind: FormKind, z, w, params: Params, consts: DerivedConstants,
                    inf_chart: bool = False, g=None):
    """Vectorised coefficient; no pole screening."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    f = _coefficient(kind, z, w, params, consts, g)
    return -f if inf_chart else f


def pole_points(kind: FormKind, params: Params, consts: DerivedConstants) -> list[SurfacePoint]:
    """Poles of the form as finite-chart points (points over infinity excluded)."""
    from .surface_domain import marked_points

    mp = marked_points(params.a, consts.b, params.rho)
    if kind is FormKind.Eta2:
        return []
    if kind is FormKind.Phi3:
        return list(mp.ends)
    return list(mp.ends) + list(mp.zeros)


def _check_poles(kind, p: SurfacePoint, params, consts):
    if kind is FormKind.Eta2:
        return
    q = p if not p.at_infinity else (p.flipped_chart() if p.z != 0 else None)
    if q is None:
        return
    for pole in pole_points(kind, params, consts):
        if abs(q.z - pole.z) < POLE_EPS and abs(q.w - pole.w) < 1e-4 * (1 + abs(pole.w)):
            raise NearPole(f"near-pole: {kind.value} at z={pole.z}", pole)


def eval_form(kind: FormKind, p: SurfacePoint, params: Params, consts: DerivedConstants,
              g=None) -> complex:
    """Coefficient of the form at ``p`` in ``p``'s own chart."""
    _check_poles(kind, p, params, consts)
    return complex(eval_form_array(kind, p.z, p.w, params, consts, p.at_infinity, g))


def residue_at(kind: FormKind, center: SurfacePoint, params: Params,
               consts: DerivedConstants, radius: float = 1e-3, n: int = 64) -> complex:
    """Residue by integrating over a lifted polygon around ``center``.

    The form is integrated exactly (adaptive Gauss-Kronrod) on each chord of
    an ``n``-gon inscribed in the circle of the given radius, so the result
    is the contour integral around the polygon, which encloses the same pole.
    """
    from .quadrature import QuadSpec, integrate_form
    from .surface_domain import LiftedPath, branch_points

    if kind.needs_gauss:
        raise ValueError("residues need a form that does not depend on g")
    if radius < 10 * POLE_EPS:
        raise ValueError("residue radius too small")
    rho = params.rho
    c = center
    # branch points are examined in the chart the centre lives in
    for bp in branch_points(rho):
        if abs(c.z - bp) < 2 * radius:
            raise ValueError("branch point inside the residue circle")
    pts = circle_samples(c.z, radius, n)
    w0 = complex(np.sqrt(quartic(pts[0], rho)))
    if abs(w0 - c.w) > abs(w0 + c.w):
        w0 = -w0
    start = SurfacePoint(pts[0], w0, c.at_infinity)
    path = lift_path(pts, start, rho)
    if abs(path.end.w - start.w) > 1e-6 * (1 + abs(start.w)):
        raise ValueError("lifted circle does not close")
    spec = QuadSpec(abs_tol=1e-14, rel_tol=1e-13)
    total = integrate_form(kind, path, params, consts, spec)
    return total / (2j * math.pi)


_PULLBACK = {
    # (symmetry, form) -> (factor, conjugate?)  for  sigma^* form = factor * (form or conj form)
    ("S", FormKind.Phi3): (-1, False),
    ("S", FormKind.Eta1): (-1, False),
    ("S", FormKind.Eta2): (-1, False),
    ("S", FormKind.DLogG): (-1, False),
    ("S0p", FormKind.Phi3): (1, True),
    ("S0p", FormKind.Eta1): (-1, True),
    ("S0p", FormKind.Eta2): (-1, True),
    ("S0p", FormKind.DLogG): (-1, True),
    ("S2p", FormKind.Phi3): (-1, True),
    ("S2p", FormKind.Eta1): (1, True),
    ("S2p", FormKind.Eta2): (1, True),
    ("S2p", FormKind.DLogG): (1, True),
}


def pullback_check(sym: str, kind: FormKind, p: SurfacePoint, params: Params,
                   consts: DerivedConstants) -> tuple[complex, complex]:
    """Both sides of the pullback identity of ``kind`` under ``sym`` at ``p``.

    ``p`` must be a finite-chart point with ``z != 0``.  The left side is the
    coefficient at the image point times the derivative of the symmetry's
    ``z``-component (with respect to ``z`` or ``conj(z)``); the right side is
    the tabulated multiple of the coefficient (or its conjugate) at ``p``.
    """
    if p.at_infinity or p.z == 0:
        raise ValueError("pullback_check expects a finite point with z != 0")
    factor, conj = _PULLBACK[(sym, kind)]
    z, w = p.z, p.w
    if sym == "S":
        zi, wi, dz = 1 / z, w / z ** 2, -1 / z ** 2
    elif sym == "S0p":
        zc = z.conjugate()
        zi, wi, dz = 1 / zc, -w.conjugate() / zc ** 2, -1 / zc ** 2
    elif sym == "S2p":
        zi, wi, dz = -z.conjugate(), w.conjugate(), -1.0
    else:
        raise ValueError(f"unknown symmetry {sym!r}")
    image = SurfacePoint(zi, wi, False)
    lhs = eval_form(kind, image, params, consts) * dz
    f = eval_form(kind, p, params, consts)
    rhs = factor * (f.conjugate() if conj else f)
    return complex(lhs), complex(rhs)


def random_curve_points(rho: float, n: int, rng: np.random.Generator,
                        rmin: float = 0.05, rmax: float = 3.0) -> list[SurfacePoint]:
    """Random finite points with random sheet, for property tests."""
    out = []
    while len(out) < n:
        r = rng.uniform(rmin, rmax)
        th = rng.uniform(-math.pi, math.pi)
        z = r * cmath.exp(1j * th)
        q = quartic(z, rho)
        if abs(q) < 1e-4:
            continue
        w = cmath.sqrt(q) * (1 if rng.random() < 0.5 else -1)
        out.append(SurfacePoint(z, w, False))
    return out
