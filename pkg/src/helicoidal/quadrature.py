"""Adaptive one-dimensional quadrature.

Two engines live here:

* ``integrate_real`` -- vectorised, locally adaptive Gauss-Kronrod (G7/K15)
  with optional removal of inverse-square-root endpoint singularities.
* ``cheb_*`` helpers -- Chebyshev interpolation on first-kind points, used
  where a running (cumulative) integral is needed along a path, e.g. the
  Gauss map ``g = exp(int dg/g)`` carried alongside ``g * Phi3``.

Complex line integrals of the surface forms along lifted paths are in
``integrate_form``; it consumes the chords of a :class:`LiftedPath`.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.fft import dct

__all__ = [
    "QuadSpec",
    "QuadratureError",
    "integrate_real",
    "integrate_form",
    "gk15",
    "cheb_points",
    "cheb_coeffs",
    "cheb_cumulative",
    "cheb_definite",
]

# Kronrod 15-point abscissae (positive half) and weights, Gauss 7-point weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-node layout on [-1, 1]: negative half, centre, positive half.
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_KW = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GW = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod abscissae.
for _j, _w in zip((1, 3, 5), _WG[:3]):
    _GW[_j] = _w
    _GW[14 - _j] = _w
_GW[7] = _WG[3]


def gk15() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (nodes, kronrod_weights, gauss_weights) on [-1, 1]."""
    return _NODES.copy(), _KW.copy(), _GW.copy()


class QuadratureError(RuntimeError):
    """Adaptive refinement exhausted its depth budget."""

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-11
    max_depth: int = 40
    left_singular: bool = False
    right_singular: bool = False

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 10:
            raise ValueError("max_depth must be at least 10")


DEFAULT_SPEC = QuadSpec()
MAX_ACTIVE = 4096


def _desingularize(f, lo, hi, left, right):
    """Map [lo, hi] onto u in [0, 1] so (x - end)^(-1/2) factors become bounded."""
    L = hi - lo
    if left and right:
        def g(u):
            s = np.sin(0.5 * np.pi * u)
            c = np.cos(0.5 * np.pi * u)
            return f(lo + L * s * s) * (L * np.pi * s * c)
    elif left:
        def g(u):
            return f(lo + L * u * u) * (2.0 * L * u)
    elif right:
        def g(u):
            v = 1.0 - u
            return f(hi - L * v * v) * (2.0 * L * v)
    else:
        return f, lo, hi
    return g, 0.0, 1.0


def integrate_real(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                   spec: QuadSpec = DEFAULT_SPEC, *, return_error: bool = False):
    """Integrate a vectorised function ``f`` over ``[lo, hi]``.

    ``f`` receives a 1-D array of abscissae and must return an array of the
    same length (real or complex). Intervals are bisected wherever the
    Kronrod/Gauss discrepancy exceeds its length-proportional share of the
    tolerance, until the summed error estimate meets the tolerance; node
    placement depends only on the inputs.
    """
    lo = float(lo)
    hi = float(hi)
    if lo == hi:
        return (0.0, 0.0) if return_error else 0.0
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
        spec = QuadSpec(spec.abs_tol, spec.rel_tol, spec.max_depth,
                        spec.right_singular, spec.left_singular)
    g, a, b = _desingularize(f, lo, hi, spec.left_singular, spec.right_singular)
    total_len = b - a

    left = np.array([a])
    right = np.array([b])
    accepted = 0.0
    accepted_err = 0.0
    estimate = 0.0
    for depth in range(spec.max_depth + 1):
        mid = 0.5 * (left + right)
        half = 0.5 * (right - left)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        vals = np.asarray(g(x.ravel())).reshape(x.shape)
        k = (vals @ _KW) * half
        gq = (vals @ _GW) * half
        err = np.abs(k - gq)
        estimate = accepted + k.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(estimate))
        share = tol * (2.0 * half) / total_len
        # intervals whose discrepancy is at rounding level cannot improve
        noise = 50.0 * np.finfo(float).eps * (np.abs(vals) @ _KW) * half
        done = (err <= share) | (err <= noise)
        if accepted_err + err.sum() <= tol:
            done[:] = True
        accepted = accepted + k[done].sum()
        accepted_err += err[done].sum()
        if done.all():
            result = sign * accepted
            return (result, accepted_err) if return_error else result
        if not np.all(np.isfinite(vals[~done])):
            raise QuadratureError("non-finite integrand value", estimate, float("inf"))
        keep = ~done
        if keep.sum() > MAX_ACTIVE:
            raise QuadratureError("non-convergent: too many active intervals",
                                  sign * estimate, float(err[keep].sum()))
        l2, m2, r2 = left[keep], mid[keep], right[keep]
        left = np.concatenate([l2, m2])
        right = np.concatenate([m2, r2])
        order = np.argsort(left, kind="stable")
        left, right = left[order], right[order]
    raise QuadratureError(
        "non-convergent: depth exhausted",
        sign * estimate,
        float(accepted_err + err[~done].sum()),
    )


# --- Chebyshev machinery -------------------------------------------------


def cheb_points(n: int) -> np.ndarray:
    """First-kind Chebyshev points on [-1, 1] in increasing order."""
    k = np.arange(n)
    return -np.cos(np.pi * (k + 0.5) / n)


def cheb_coeffs(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients from samples at ``cheb_points`` (last axis).

    Returns an array whose *first* axis indexes the coefficient, ready for
    :mod:`numpy.polynomial.chebyshev` routines.
    """
    v = np.asarray(values)
    n = v.shape[-1]
    # cheb_points are increasing; DCT-II expects cos(pi (k+1/2)/n) ordering.
    v = v[..., ::-1]
    if np.iscomplexobj(v):
        c = dct(v.real, type=2, axis=-1) + 1j * dct(v.imag, type=2, axis=-1)
    else:
        c = dct(v, type=2, axis=-1)
    c = c / n
    c[..., 0] *= 0.5
    return np.moveaxis(c, -1, 0)


def cheb_definite(coeffs: np.ndarray) -> np.ndarray:
    """Integral over [-1, 1] of a Chebyshev series (first axis = degree)."""
    n = coeffs.shape[0]
    k = np.arange(n)
    w = np.zeros(n)
    even = k[k % 2 == 0].astype(float)
    w[k % 2 == 0] = 2.0 / (1.0 - even ** 2)
    return np.tensordot(w, coeffs, axes=(0, 0))


def cheb_cumulative(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Running integral from -1 to each ``x`` of a Chebyshev series.

    Output shape is ``coeffs.shape[1:] + x.shape``.
    """
    ci = np.polynomial.chebyshev.chebint(coeffs, m=1, lbnd=-1.0, axis=0)
    return np.polynomial.chebyshev.chebval(x, ci, tensor=True)


def cheb_tail(coeffs: np.ndarray, count: int = 3) -> np.ndarray:
    """Relative size of the trailing coefficients (convergence indicator)."""
    scale = np.max(np.abs(coeffs), axis=0)
    tail = np.max(np.abs(coeffs[-count:]), axis=0)
    return tail / np.where(scale > 0, scale, 1.0)


# --- complex line integrals along lifted paths ---------------------------


def integrate_form(kind, path, params, consts, spec: QuadSpec = DEFAULT_SPEC) -> complex:
    """Integrate a surface form along the chords of a lifted path.

    ``kind`` is a :class:`FormKind` or a callable ``f(z, w)`` giving the
    finite-chart coefficient of a form that is odd under the chart change.

    The integral of a holomorphic form depends only on the homotopy class,
    so the polygon through the refined samples gives the exact value of the
    curve integral as long as no pole is swept between chord and curve.
    Chords ending on a branch point (``w == 0`` at a terminal sample) are
    integrated with a quadratic change of variable to absorb the
    ``1/sqrt`` behaviour.
    """
    from .forms import eval_form_array
    from .surface_domain import continue_root

    samples = path.samples
    if len(samples) < 2:
        return 0j
    z = np.array([p.z for p in samples])
    w = np.array([p.w for p in samples])
    charts = [p.at_infinity for p in samples]
    if len(set(charts)) != 1:
        raise ValueError("path mixes coordinate charts; split it first")
    inf_chart = charts[0]
    rho = path.rho
    total = 0j
    for k in range(len(z) - 1):
        z0, z1, w0, w1 = z[k], z[k + 1], w[k], w[k + 1]
        sing0 = abs(w0) < 1e-13
        sing1 = abs(w1) < 1e-13

        def seg(u, z0=z0, z1=z1, w0=w0, w1=w1, sing0=sing0, sing1=sing1):
            if sing0 and sing1:
                s = np.sin(0.5 * np.pi * u)
                t = s * s
                dt = np.pi * s * np.cos(0.5 * np.pi * u)
            elif sing0:
                t, dt = u * u, 2.0 * u
            elif sing1:
                t, dt = 1.0 - (1.0 - u) ** 2, 2.0 * (1.0 - u)
            else:
                t, dt = u, np.ones_like(u)
            zz = z0 + (z1 - z0) * t
            guess = w0 + (w1 - w0) * t
            ww = continue_root(zz, guess, rho)
            if callable(kind):
                f = kind(zz, ww)
                f = -f if inf_chart else f
            else:
                f = eval_form_array(kind, zz, ww, params, consts, inf_chart)
            return f * (z1 - z0) * dt

        total += integrate_real(seg, 0.0, 1.0, spec)
    return complex(total)


# --- exponentially weighted path integrals --------------------------------


@dataclass
class WeightedPiece:
    """Integrals over one parameter interval, with ``L`` started at 0.

    ``L``  = int dL,   ``Gp`` = int exp(L(s)) P ds,   ``Gm`` = int exp(-L(s)) P ds,
    ``P``  = int P ds, where ``L(s)`` runs from the left end of the interval.
    ``P`` may be vector valued (trailing axis).
    """

    L: complex
    Gp: np.ndarray
    Gm: np.ndarray
    P: np.ndarray

    def then(self, other: "WeightedPiece") -> "WeightedPiece":
        e = np.exp(self.L)
        return WeightedPiece(
            self.L + other.L,
            self.Gp + e * other.Gp,
            self.Gm + other.Gm / e,
            self.P + other.P,
        )

    @classmethod
    def zero(cls, width: int = 1) -> "WeightedPiece":
        z = np.zeros(width, dtype=complex)
        return cls(0j, z.copy(), z.copy(), z.copy())


@functools.lru_cache(maxsize=8)
def _panel_operators(n: int):
    """Matrices acting on samples at ``cheb_points(n)``.

    ``coef``: samples -> Chebyshev coefficients; ``cum``: samples -> running
    integral at the nodes followed by the value at ``+1``; ``total``: the
    definite integral over [-1, 1] (a row vector).
    """
    eye = np.eye(n)
    coef = cheb_coeffs(eye)  # (degree, sample)
    x = cheb_points(n)
    cum = cheb_cumulative(coef, np.append(x, 1.0)).T  # (point, sample)
    total = cheb_definite(coef)
    return coef, cum, total


def _piece(fun, lo, hi, n):
    coef, cum, total = _panel_operators(n)
    x = cheb_points(n)
    half = 0.5 * (hi - lo)
    s = lo + half * (x + 1.0)
    dl, p = fun(s)
    dl = np.asarray(dl, dtype=complex) * half
    p = np.atleast_2d(np.asarray(p, dtype=complex)) * half  # (m, n)
    run = cum @ dl
    Lx, Ltot = run[:-1], complex(run[-1])
    ep = np.exp(Lx)
    wp = ep[None, :] * p
    wm = p / ep[None, :]
    cl = coef @ dl
    cp = coef @ wp.T
    cm = coef @ wm.T
    tail = max(float(cheb_tail(cl)), float(np.max(cheb_tail(cp))),
               float(np.max(cheb_tail(cm))))
    abs_tail = max(float(np.max(np.abs(c[-3:]))) for c in (cl, cp, cm))
    piece = WeightedPiece(Ltot, wp @ total, wm @ total, p @ total)
    return piece, tail, abs_tail, Lx, s


def weighted_path_integral(fun, lo: float, hi: float, *, n: int = 32, tol: float = 1e-13,
                           abs_tol: float = 1e-15, max_depth: int = 40, breakpoints=None,
                           nodes: bool = False):
    """Integrate ``exp(+-L) P`` along ``[lo, hi]`` where ``L' = dL``.

    ``fun(s)`` returns ``(dL(s), P(s))`` with ``P`` of shape ``(m, len(s))``
    or ``(len(s),)``.  The interval is split into Chebyshev panels of ``n``
    first-kind points, bisected until the trailing coefficients of ``dL`` and
    of the weighted integrands fall below ``tol`` (relative).  Because ``L``
    is accumulated spectrally inside each panel and carried exactly across
    panels, the Gauss-map-like factor ``exp(L)`` has no interpolation error
    beyond the panel accuracy.

    With ``nodes=True`` also returns a list of ``(s, L(s))`` arrays per panel
    (``L`` measured from ``lo``) for later interpolation.
    """
    edges = [lo] + list(breakpoints or []) + [hi]
    total = None
    samples = []
    for a, b in zip(edges[:-1], edges[1:]):
        stack = [(a, b, 0)]
        while stack:
            l, r, depth = stack.pop()
            piece, tail, abs_tail, Lx, s = _piece(fun, l, r, n)
            if abs_tail <= abs_tol:
                tail = 0.0
            if tail > tol and depth < max_depth and abs(r - l) > 1e-15 * max(1.0, abs(hi - lo)):
                m = 0.5 * (l + r)
                stack.append((m, r, depth + 1))
                stack.append((l, m, depth + 1))
                continue
            if tail > tol and depth >= max_depth:
                raise QuadratureError("non-convergent: panel depth exhausted", error=tail)
            if nodes:
                offset = 0j if total is None else total.L
                samples.append((s, offset + Lx))
            total = piece if total is None else total.then(piece)
    if nodes:
        return total, samples
    return total
