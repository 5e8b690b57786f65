"""Scalar period machinery: F, b, a3, the offsets h and d, and the 2-D solve.

Parametrisation of the arc ``z = exp(i t / 2)``, ``t in [0, rho]``: on the
lift through ``1_+`` one has ``w = z s`` with ``s = sqrt(2 (cos t - cos rho))``.
Integrands with ``1/s`` at ``t = rho`` are smoothed by the pendulum
substitution ``sin(t/2) = k sin(phi)``, ``k = sin(rho/2)``, under which
``s = 2 k cos(phi)`` and ``dt / s = dphi / cos(t/2)``.  On the slit side
``t in [rho, pi]`` the analogue is ``cos(t/2) = m sin(psi)``, ``m = cos(rho/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .forms import DerivedConstants, end_root
from .quadrature import QuadSpec, integrate_real, weighted_path_integral
from .surface_domain import Params

EDGE = 1e-6
_SPEC = QuadSpec(abs_tol=1e-14, rel_tol=1e-13, max_depth=60)


class PeriodProblemUnsolved(RuntimeError):
    """No sign change of d along the traced height-zero curve."""


def _q(t, rho):
    """``t^4 + 1 + 2 t^2 cos rho`` written without cancellation near ``t = 1, rho = pi``."""
    t2 = t * t
    c = math.cos(0.5 * rho)
    return ((1.0 - t) * (1.0 + t)) ** 2 + 4.0 * t2 * c * c


def _qm(t, rho):
    """``t^4 + 1 - 2 t^2 cos rho``, stable near ``t = 1, rho = 0``."""
    t2 = t * t
    s = math.sin(0.5 * rho)
    return ((1.0 - t) * (1.0 + t)) ** 2 + 4.0 * t2 * s * s


def _I(x, rho):
    """int_0^x dt / sqrt(t^4 + 1 + 2 t^2 cos rho)."""
    if x == 0.0:
        return 0.0
    return integrate_real(lambda t: 1.0 / np.sqrt(_q(t, rho)), 0.0, x, _SPEC)


def F_func(a: float, b: float, rho: float, beta: float) -> float:
    """Difference of the two end-to-zero periods; vanishes at the right ``b``."""
    return beta * _I(a, rho) - _I(b, rho)


def dF_db(a: float, b: float, rho: float, beta: float) -> float:
    return -1.0 / math.sqrt(_q(b, rho))


def solve_b(a: float, rho: float, beta: float) -> float:
    """Unique root of ``F(a, ., rho, beta)`` in ``[0, a]``."""
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    if a == 0.0:
        return 0.0
    if beta == 1.0:
        return a
    target = beta * _I(a, rho)
    lo, hi = 0.0, a
    b = beta * a
    for _ in range(100):
        f = target - _I(b, rho)
        if f > 0:
            lo = b
        else:
            hi = b
        if abs(f) <= 1e-15 or hi - lo <= 4e-16 * a:
            break
        step = f * math.sqrt(_q(b, rho))
        nb = b + step
        if not lo < nb < hi:
            nb = 0.5 * (lo + hi)
        b = nb
    return b


def b_rho_closed(a: float, rho: float, beta: float, b: float | None = None) -> float:
    """Partial derivative of ``b`` in ``rho`` from differentiating ``F = 0``."""
    b = solve_b(a, rho, beta) if b is None else b
    f = lambda t: t * t / _q(t, rho) ** 1.5
    ia = integrate_real(f, 0.0, a, _SPEC)
    ib = integrate_real(f, 0.0, b, _SPEC) if b > 0 else 0.0
    return math.sin(rho) * math.sqrt(_q(b, rho)) * (beta * ia - ib)


def b_beta_closed(a: float, rho: float, beta: float, b: float | None = None) -> float:
    """Partial derivative of ``b`` in ``beta``: ``sqrt(q(b)) * int_0^a dt/sqrt(q)``."""
    b = solve_b(a, rho, beta) if b is None else b
    return math.sqrt(_q(b, rho)) * _I(a, rho)


@dataclass(frozen=True)
class ArcConstants:
    c1: float
    c2: float
    inv_a1: float
    inv_a2: float


def arc_constants(a: float, b: float, rho: float) -> ArcConstants:
    """Constants valid also at ``a = 1`` where the first residue term drops out."""
    wa, wb = end_root(a, rho), end_root(b, rho)
    inv_a1 = (1.0 - a ** 4) / (a * wa)
    inv_a2 = -(1.0 - b ** 4) / (b * wb)
    return ArcConstants(wa / a, -wb / b, inv_a1, inv_a2)


def _a3_weight(ch2, a, b, beta, k: ArcConstants):
    """Weight of the a3 integrals in terms of ``ch2 = cos(t/2)^2``.

    ``x^2 + 1/x^2 + 2 cos t = (x - 1/x)^2 + 4 cos(t/2)^2`` avoids cancellation
    when ``a`` is close to 1 and ``t`` close to ``pi``.
    """
    return (beta * k.inv_a1 / ((a - 1.0 / a) ** 2 + 4.0 * ch2)
            + k.inv_a2 / ((b - 1.0 / b) ** 2 + 4.0 * ch2))


def a3_dual(a: float, rho: float, beta: float, b: float | None = None,
            arc_only: bool = False) -> tuple[float, float]:
    """``a3`` from the unit-arc condition and from the slit condition."""
    b = solve_b(a, rho, beta) if b is None else b
    k = arc_constants(a, b, rho)
    kk = math.sin(0.5 * rho)
    mm = math.cos(0.5 * rho)

    # both integrals are written in u = pi/2 - phi (resp. pi/2 - psi) so the
    # near-singular end u = 0 is resolved without cancellation
    def num_arc(u):
        sp, cp = np.cos(u), np.sin(u)
        root = np.sqrt(cp * cp + (mm * sp) ** 2)
        return _a3_weight(root * root, a, b, beta, k) * 4.0 * kk * kk * cp * cp / root

    def den_arc(u):
        return 1.0 / np.sqrt(np.sin(u) ** 2 + (mm * np.cos(u)) ** 2)

    def num_slit(u):
        sp, cp = np.cos(u), np.sin(u)
        root = np.sqrt(cp * cp + (kk * sp) ** 2)
        return _a3_weight((mm * sp) ** 2, a, b, beta, k) * 4.0 * mm * mm * cp * cp / root

    def den_slit(u):
        return 1.0 / np.sqrt(np.sin(u) ** 2 + (kk * np.cos(u)) ** 2)

    h = 0.5 * math.pi
    a3_arc = -integrate_real(num_arc, 0.0, h, _SPEC) / integrate_real(den_arc, 0.0, h, _SPEC)
    if arc_only:
        return a3_arc, float("nan")
    a3_slit = integrate_real(num_slit, 0.0, h, _SPEC) / integrate_real(den_slit, 0.0, h, _SPEC)
    return a3_arc, a3_slit


def compute_a3(a: float, rho: float, beta: float, b: float | None = None) -> float:
    """Coefficient of the holomorphic differential in dg/g (unit-arc formula)."""
    if beta == 1.0:
        return 0.0
    return a3_dual(a, rho, beta, b, arc_only=True)[0]


def h_func(a: float, rho: float, beta: float, b: float | None = None) -> float:
    """Vertical offset between the two horizontal boundary lines (per unit lambda)."""
    if a < 1e-8:
        return -integrate_real(
            lambda t: 1.0 / np.sqrt(_qm(t, rho)),
            0.0, 1.0, _SPEC) / beta
    b = solve_b(a, rho, beta) if b is None else b
    k = arc_constants(a, b, rho)
    cc = k.c1 * k.c2 - 2.0 * math.cos(rho)
    a2 = a * a

    def f(t):
        t2 = t * t
        num = t2 * t2 + 1.0 + cc * t2
        return num / ((t2 + a2) * (t2 + 1.0 / a2) * np.sqrt(_qm(t, rho)))

    return integrate_real(f, 0.0, 1.0, _SPEC)


def _arc_integrands(a, rho, beta, b, a3):
    """Integrands per ``du`` where ``u = pi/2 - phi`` (``u = 0`` at ``t = rho``).

    Working in ``u`` keeps ``cos(phi) = sin(u)`` accurate at the branch-point
    end, where ``cos(t/2)`` becomes small as ``rho -> pi``.  The orientation
    (``u`` decreasing along the arc) is absorbed by the caller's bounds.
    """
    k = arc_constants(a, b, rho)
    kk = math.sin(0.5 * rho)
    mm = math.cos(0.5 * rho)

    def fun(u):
        cphi, sphi = np.sin(u), np.cos(u)
        ct = np.sqrt(cphi * cphi + (mm * sphi) ** 2)
        s = 2.0 * kk * cphi
        s2 = s * s
        dl = (-0.5 * beta * k.inv_a1 * (s - 1j * k.c1) * s / (s2 + k.c1 ** 2)
              - 0.5 * k.inv_a2 * (s - 1j * k.c2) * s / (s2 + k.c2 ** 2)
              - 0.5 * a3) / ct
        p = 0.5j * (s + 1j * k.c2) / ((s + 1j * k.c1) * ct)
        return -dl, -p

    return fun


def _arc_breaks(rho):
    """Geometric panel grading toward the branch-point end when rho is near pi."""
    mm = math.cos(0.5 * rho)
    out = []
    u = 0.25
    while u > 0.25 * mm and u > 1e-12:
        out.append(u)
        u *= 0.25
    return out


def arc_integrals(a: float, rho: float, beta: float, b: float | None = None,
                  a3: float | None = None, nodes: bool = False):
    """Weighted integrals of Phi3/lam along the arc from ``1_+`` to ``exp(i rho/2)``."""
    b = solve_b(a, rho, beta) if b is None else b
    a3 = compute_a3(a, rho, beta, b) if a3 is None else a3
    return weighted_path_integral(_arc_integrands(a, rho, beta, b, a3), 0.5 * math.pi, 0.0,
                                  breakpoints=_arc_breaks(rho), nodes=nodes)


def d_func(a: float, rho: float, beta: float, b: float | None = None,
           a3: float | None = None) -> float:
    """Horizontal offset between the two vertical boundary segments (per unit lambda)."""
    piece = arc_integrals(a, rho, beta, b, a3)
    return float(-(piece.Gp[0] + piece.Gm[0]).imag)


def arc_log_gauss(a: float, rho: float, beta: float, t, b: float | None = None,
                  a3: float | None = None) -> np.ndarray:
    """``log g`` at ``exp(i t/2)`` on the arc through ``1_+`` (``t`` in ``[0, rho]``)."""
    b = solve_b(a, rho, beta) if b is None else b
    a3 = compute_a3(a, rho, beta, b) if a3 is None else a3
    fun = _arc_integrands(a, rho, beta, b, a3)
    kk = math.sin(0.5 * rho)
    out = []
    for tv in np.atleast_1d(t):
        phi = math.asin(min(1.0, math.sin(0.5 * tv) / kk))
        out.append(integrate_real(lambda x: fun(x)[0], 0.5 * math.pi, 0.5 * math.pi - phi, _SPEC))
    return np.array(out, dtype=complex)


# --- the height-zero curve and the 2-D solve -------------------------------


@dataclass(frozen=True)
class CurvePoint:
    a: float
    rho: float
    h_val: float
    d_val: float


@dataclass
class C1Trace:
    beta: float
    points: list
    a0: float
    rho0: float
    skipped: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def rho_on_C1(a: float, beta: float) -> float | None:
    """The ``rho`` with ``h(a, rho, beta) = 0``, or ``None`` when no sign change."""
    lo, hi = EDGE, math.pi - EDGE
    hl, hh = h_func(a, lo, beta), h_func(a, hi, beta)
    if hl > 0 or hh < 0:
        return None
    return brentq(lambda r: h_func(a, r, beta), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def C1_endpoints(beta: float) -> tuple[float, float]:
    """``a0`` (height zero at ``rho = pi``) and ``rho0`` (height zero at ``a = 1``)."""
    a0 = brentq(lambda a: h_func(a, math.pi - EDGE, beta), 1e-8, 1.0, xtol=1e-15, rtol=1e-15)
    rho0 = brentq(lambda r: h_func(1.0, r, beta), EDGE, math.pi - EDGE, xtol=1e-15, rtol=1e-15)
    return a0, rho0


def trace_C1(beta: float, n_points: int = 64, with_d: bool = True) -> C1Trace:
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    a0, rho0 = C1_endpoints(beta)
    k = np.arange(n_points)
    x = 0.5 * (1.0 - np.cos(math.pi * (k + 0.5) / n_points))
    grid = a0 + (1.0 - a0) * x
    pts, skipped = [], []
    for a in grid:
        a = float(a)
        r = rho_on_C1(a, beta)
        if r is None:
            skipped.append(a)
            continue
        b = solve_b(a, r, beta)
        d = d_func(a, r, beta, b) if with_d else float("nan")
        pts.append(CurvePoint(a, r, h_func(a, r, beta, b), d))
    return C1Trace(beta, pts, a0, rho0, skipped)


@dataclass
class SolvedData:
    params: Params
    b: float
    a3: float
    consts: DerivedConstants
    R: float
    t_period: float
    residual_F: float
    residual_h: float
    residual_d: float
    residual_a3_cross: float
    roots: list = field(default_factory=list)
    alt_route: tuple | None = None

    @property
    def root_count(self) -> int:
        return len(self.roots)


def solved_from_params(a: float, rho: float, beta: float, lam: float = 1.0, roots=None,
                       alt_route=None) -> SolvedData:
    """Assemble all derived data at a given parameter point (no solve in a, rho)."""
    params = Params(a, rho, beta, lam)
    b = solve_b(a, rho, beta)
    if beta == 1.0:
        a3, a3x = 0.0, 0.0
    else:
        a3, alt = a3_dual(a, rho, beta, b)
        a3x = a3 - alt
    consts = DerivedConstants.from_params(a, b, rho, a3)
    R = consts.R(a)
    return SolvedData(
        params=params, b=b, a3=a3, consts=consts, R=R, t_period=math.pi * lam * R,
        residual_F=F_func(a, b, rho, beta),
        residual_h=h_func(a, rho, beta, b),
        residual_d=d_func(a, rho, beta, b, a3),
        residual_a3_cross=a3x,
        roots=list(roots or [(a, rho)]),
        alt_route=alt_route,
    )


def _d_on_C1(a, beta):
    r = rho_on_C1(a, beta)
    if r is None:
        raise PeriodProblemUnsolved(f"a={a} is off the height-zero curve")
    return d_func(a, r, beta)


def solve_period_problem(beta: float, n_points: int = 64, lam: float = 1.0,
                         trace: C1Trace | None = None) -> SolvedData:
    """Common zero of h and d: trace C1, bracket d along it, refine each root."""
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    roots = []
    for attempt in range(2):
        tr = trace if (trace is not None and attempt == 0) else trace_C1(beta, n_points * 4 ** attempt)
        pts = tr.points
        for p, q in zip(pts[:-1], pts[1:]):
            if p.d_val == 0.0:
                roots.append((p.a, p.rho))
            elif p.d_val * q.d_val < 0:
                a = brentq(lambda x: _d_on_C1(x, beta), p.a, q.a, xtol=1e-15, rtol=1e-15, maxiter=200)
                roots.append((a, rho_on_C1(a, beta)))
        if roots:
            break
    if not roots:
        raise PeriodProblemUnsolved("period problem unsolved at this resolution")
    roots.sort()
    a, rho = roots[0]
    alt = None
    if beta == 1.0:
        alt = solve_beta_one_direct()
    return solved_from_params(a, rho, beta, lam, roots, alt)


def rho1(beta: float, a: float = EDGE, n: int = 256) -> float:
    """Zero of ``rho -> d(a, rho, beta)`` (unique by the sign-count check)."""
    grid = np.linspace(EDGE, math.pi - EDGE, n)
    vals = [d_func(a, float(r), beta) for r in grid]
    for i in range(n - 1):
        if vals[i] * vals[i + 1] < 0:
            return brentq(lambda r: d_func(a, r, beta), grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
    raise PeriodProblemUnsolved("no zero of d in rho")


def solve_beta_one_direct() -> tuple[float, float]:
    """For beta = 1, d does not depend on a: find its zero in rho, then a on C1."""
    r1 = rho1(1.0, 0.5, 64)
    a = brentq(lambda x: h_func(x, r1, 1.0), 1e-8, 1.0 - 1e-12, xtol=1e-15, rtol=1e-15)
    return a, r1
