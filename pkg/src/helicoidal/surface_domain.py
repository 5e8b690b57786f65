"""The spinor torus ``w^2 = z^4 + 1 - 2 z^2 cos(rho)`` and the fundamental domain.

Points are stored in one of two affine charts.  The finite chart uses
``(z, w)``; the chart at infinity uses ``(zeta, omega) = (1/z, w/z^2)``, in
which the curve equation keeps exactly the same form.  ``SurfacePoint``
records which chart its coordinates belong to.

Sheet convention: over the imaginary axis the quartic equals
``y^4 + 1 + 2 y^2 cos(rho) > 0`` and the "+" point is the one with positive
real ``w``; everywhere else sheets are fixed by continuation from
``1_+ = (1, 2 sin(rho/2))``.

The fundamental piece ``M`` projects bijectively onto the closed right half
plane with the unit-circle arcs ``|arg z| >= rho/2`` removed.  On it ``w``
has the closed form returned by :func:`domain_w`, which is the same
expression in both charts.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

CURVE_EPS = 1e-12
BRANCH_EPS = 1e-8
# Finite chart is preferred while |z| stays below this radius.
CHART_RADIUS = 2.0

SYMMETRIES = ("S", "S0p", "S2p")


class BranchPointCollision(ValueError):
    """A path came within ``BRANCH_EPS`` of a branch point it does not end on."""


class LiftError(RuntimeError):
    """Adaptive lifting could not keep the sheet choice continuous."""


class DegenerateZeros(ValueError):
    """``b = 0``: the zeros of the height differential collapse onto the ends."""


@dataclass(frozen=True)
class Params:
    a: float
    rho: float
    beta: float
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.a < 1.0:
            raise ValueError(f"a must lie in [0, 1), got {self.a}")
        if not 0.0 < self.rho < math.pi:
            raise ValueError(f"rho must lie in (0, pi), got {self.rho}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")


def quartic(z, rho: float):
    z2 = z * z
    s = math.sin(0.5 * rho)
    return (z2 - 1.0) ** 2 + 4.0 * s * s * z2


@dataclass(frozen=True)
class SurfacePoint:
    """A point of the torus.

    When ``at_infinity`` is true, ``z`` and ``w`` hold the chart-at-infinity
    coordinates ``(zeta, omega)``.
    """

    z: complex
    w: complex
    at_infinity: bool = False

    def residual(self, rho: float) -> float:
        return abs(self.w * self.w - quartic(self.z, rho)) / (1.0 + abs(self.z) ** 4)

    def on_curve(self, rho: float, eps: float = CURVE_EPS) -> bool:
        return self.residual(rho) <= eps

    def flipped_chart(self) -> "SurfacePoint":
        """Same point expressed in the other chart (undefined at z = 0 / zeta = 0)."""
        if self.z == 0:
            raise ZeroDivisionError("point has no representative in the other chart")
        zi = 1.0 / self.z
        return SurfacePoint(zi, self.w * zi * zi, not self.at_infinity)

    def canonical(self, radius: float = CHART_RADIUS) -> "SurfacePoint":
        """Finite chart when ``|z| <= radius``, chart at infinity otherwise."""
        if self.at_infinity:
            if self.z != 0 and abs(self.z) >= 1.0 / radius:
                return self.flipped_chart()
            return self
        if abs(self.z) > radius:
            return self.flipped_chart()
        return self

    @property
    def z_value(self) -> complex:
        """The finite ``z`` coordinate (``inf`` at the points over infinity)."""
        if not self.at_infinity:
            return self.z
        return complex("inf") if self.z == 0 else 1.0 / self.z

    def close_to(self, other: "SurfacePoint", tol: float = 1e-10) -> bool:
        if self.at_infinity != other.at_infinity:
            try:
                other = other.flipped_chart()
            except ZeroDivisionError:
                return False
        return abs(self.z - other.z) <= tol and abs(self.w - other.w) <= tol


@dataclass(frozen=True)
class LiftedPath:
    samples: tuple[SurfacePoint, ...]
    rho: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))

    @property
    def start(self) -> SurfacePoint:
        return self.samples[0]

    @property
    def end(self) -> SurfacePoint:
        return self.samples[-1]

    def reversed(self) -> "LiftedPath":
        return LiftedPath(self.samples[::-1], self.rho)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class MarkedPoints:
    ends: tuple[SurfacePoint, ...]
    zeros: tuple[SurfacePoint, ...]
    branch: tuple[complex, ...]


# --- square roots ------------------------------------------------------------


def w_values(z: complex, rho: float) -> tuple[complex, complex]:
    """Both square roots of the quartic, first one with nonnegative real part."""
    r = cmath.sqrt(quartic(complex(z), rho))
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    return r, -r


def continue_root(z, guess, rho: float):
    """Root of the quartic at ``z`` nearest to ``guess`` (vectorised)."""
    r = np.sqrt(quartic(np.asarray(z, dtype=complex), rho))
    return np.where(np.abs(r - guess) <= np.abs(r + guess), r, -r)


def branch_points(rho: float) -> tuple[complex, ...]:
    e = cmath.exp(0.5j * rho)
    return (e, e.conjugate(), -e, -e.conjugate())


def domain_w(x, rho: float):
    """Sheet value on the fundamental piece, in either chart.

    ``x`` is the chart coordinate (``z`` on the inner half, ``zeta = 1/z``
    on the outer half); both are restricted to the closed unit disk.  The
    product of principal roots is analytic on the open disk and equals 1 at
    the origin, so it realises ``0_+`` and, by continuity, ``1_+``.
    """
    x = np.asarray(x, dtype=complex)
    u = x * x
    e = np.exp(1j * rho)
    return np.sqrt(1.0 - u * e) * np.sqrt(1.0 - u * np.conj(e))


def domain_point(x: complex, rho: float, outer: bool = False) -> SurfacePoint:
    """Surface point of ``M`` over chart coordinate ``x`` with ``|x| <= 1``."""
    return SurfacePoint(complex(x), complex(domain_w(x, rho)), bool(outer))


def base_point(rho: float) -> SurfacePoint:
    """The base point ``1_+``."""
    return SurfacePoint(1.0 + 0j, complex(2.0 * math.sin(0.5 * rho)), False)


def imaginary_plus(y: float, rho: float, sheet: int = 1) -> SurfacePoint:
    """``(iy)_+`` (or ``(iy)_-`` for ``sheet=-1``) in the preferred chart."""
    z = 1j * y
    c = math.cos(0.5 * rho)
    w = sheet * math.sqrt((1.0 - y * y) ** 2 + 4.0 * y * y * c * c)
    return SurfacePoint(z, complex(w)).canonical()


# --- path lifting ------------------------------------------------------------


def _near_branch(z: complex, rho: float, eps: float) -> complex | None:
    for bp in branch_points(rho):
        if abs(z - bp) < eps:
            return bp
    return None


def lift_path(z_samples: Sequence[complex], start: SurfacePoint, rho: float, *,
              at_infinity: bool | None = None, max_bisections: int = 60) -> LiftedPath:
    """Continue the sheet choice of ``start`` along a sampled ``z`` path.

    Steps are bisected until ``|dw| <= 0.1 min(|w_k|, |w_k+1|)``.  A path may
    end exactly on a branch point; touching one elsewhere is refused.
    """
    zs = [complex(v) for v in z_samples]
    if not zs:
        raise ValueError("empty path")
    chart = start.at_infinity if at_infinity is None else at_infinity
    if abs(zs[0] - start.z) > 1e-12 or chart != start.at_infinity:
        raise ValueError("first sample must coincide with the start point")
    if not start.on_curve(rho, 1e-10):
        raise ValueError("start point is not on the curve")

    out = [start]
    n = len(zs)
    for k in range(1, n):
        z_prev = out[-1].z
        w_prev = out[-1].w
        z_target = zs[k]
        terminal = k == n - 1
        bp = _near_branch(z_target, rho, BRANCH_EPS)
        if bp is not None and not terminal:
            raise BranchPointCollision(f"branch-point collision at z={z_target}")
        if bp is not None and terminal:
            # walk to the branch point, then report w = 0 there
            _advance(out, z_prev, w_prev, z_target, rho, max_bisections, allow_end_branch=True)
            last = out[-1]
            if abs(last.z - z_target) > 0 or abs(last.w) > 0:
                out[-1] = SurfacePoint(z_target, 0j, chart)
            continue
        _advance(out, z_prev, w_prev, z_target, rho, max_bisections)
    return LiftedPath(tuple(out), rho)


def _advance(out, z0, w0, z1, rho, max_bisections, allow_end_branch=False):
    chart = out[-1].at_infinity
    stack = [z1]
    depth = 0
    while stack:
        target = stack[-1]
        guess = w0
        r = complex(np.sqrt(quartic(complex(target), rho)))
        cand = r if abs(r - guess) <= abs(r + guess) else -r
        if allow_end_branch and target == z1 and abs(cand) < 1e-7:
            out.append(SurfacePoint(target, 0j, chart))
            stack.pop()
            z0, w0 = target, 0j
            continue
        ok = abs(cand - w0) <= 0.1 * min(abs(cand), abs(w0))
        if ok or abs(target - z0) < 1e-14:
            if abs(target - z0) < 1e-14 and not ok and min(abs(cand), abs(w0)) > 0:
                if not abs(cand - w0) < abs(cand + w0):
                    raise LiftError("non-convergent refinement near z=%r" % target)
            for bp in branch_points(rho):
                if abs(target - bp) < BRANCH_EPS and not (allow_end_branch and target == z1):
                    raise BranchPointCollision(f"branch-point collision at z={target}")
            out.append(SurfacePoint(target, cand, chart))
            stack.pop()
            z0, w0 = target, cand
            depth = 0
            continue
        depth += 1
        if depth > max_bisections:
            raise LiftError("non-convergent refinement near z=%r" % target)
        stack.append(0.5 * (z0 + target))


def circle_samples(center: complex, radius: float, n: int = 64, start_angle: float = 0.0) -> list[complex]:
    """Closed polygon of ``n`` chords around a circle (first point repeated)."""
    ang = start_angle + 2.0 * np.pi * np.arange(n + 1) / n
    pts = center + radius * np.exp(1j * ang)
    pts[-1] = pts[0]
    return [complex(p) for p in pts]


def arc_samples(t0: float, t1: float, n: int = 64, radius: float = 1.0) -> list[complex]:
    """Samples of ``radius * exp(i t / 2)`` for ``t`` from ``t0`` to ``t1``."""
    t = np.linspace(t0, t1, n + 1)
    return [complex(v) for v in radius * np.exp(0.5j * t)]


# --- symmetries --------------------------------------------------------------


def apply_symmetry(which: str, p: SurfacePoint) -> SurfacePoint:
    """Apply ``S``, ``S0p`` (``S_0^+``) or ``S2p`` (``S_2^+``).

    In chart terms ``S`` only swaps charts, ``S0p`` swaps charts and
    conjugates, ``S2p`` keeps the chart.  The result is returned in the
    canonical chart.
    """
    if which == "S":
        q = SurfacePoint(p.z, p.w, not p.at_infinity)
    elif which == "S0p":
        q = SurfacePoint(p.z.conjugate(), -p.w.conjugate(), not p.at_infinity)
    elif which == "S2p":
        q = SurfacePoint(-p.z.conjugate(), p.w.conjugate(), p.at_infinity)
    else:
        raise ValueError(f"unknown symmetry {which!r}")
    if q.at_infinity and q.z == 0:
        return q
    if not q.at_infinity and q.z == 0:
        return q
    return q.canonical()


# --- marked points -----------------------------------------------------------


def marked_points(a: float, b: float, rho: float) -> MarkedPoints:
    """Ends ``E`` and zeros ``V`` of the height differential, plus branch values."""
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    if b == 0.0:
        raise DegenerateZeros("degenerate V: b = 0")
    if not 0.0 < b <= a:
        raise ValueError("b must lie in (0, a]")
    ends = (
        imaginary_plus(a, rho, +1),
        imaginary_plus(-a, rho, -1),
        imaginary_plus(1.0 / a, rho, +1),
        imaginary_plus(-1.0 / a, rho, -1),
    )
    zeros = (
        imaginary_plus(-b, rho, +1),
        imaginary_plus(b, rho, -1),
        imaginary_plus(-1.0 / b, rho, +1),
        imaginary_plus(1.0 / b, rho, -1),
    )
    return MarkedPoints(ends, zeros, branch_points(rho))
