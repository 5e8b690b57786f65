"""Gauss map, immersion, meshing, assembly and export.

The fundamental piece ``M`` is covered by two closed half-disks in the chart
coordinates ``x`` (``x = z`` for ``|z| <= 1`` and ``x = 1/z`` outside), with
``Re x >= 0``.  On both, ``w`` is given in closed form by
:func:`surface_domain.domain_w`, so no lifting is needed: integrating a form
along a path in ``x`` only requires its coefficient and the chart sign.  The
two half-disks share the unit-circle arc ``|arg x| <= rho/2`` (inner point
``e^{i theta}`` is the outer point ``e^{-i theta}``); the rest of the unit
circle is the doubled boundary arc.

Every integral is accumulated with :func:`quadrature.weighted_path_integral`,
which carries ``g = exp(int dg/g)`` spectrally next to ``g Phi3`` and
``Phi3 / g``, so the immersion

    X = Re int ( (1/g - g) Phi3 / 2,  i (1/g + g) Phi3 / 2,  Phi3 )

is obtained edge by edge along a spanning tree rooted at ``1_+``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .forms import FormKind, eval_form_array
from .quadrature import WeightedPiece, weighted_path_integral
from .surface_domain import SurfacePoint, domain_w

TAGS = ("l0+", "l0-", "l1+", "l1-", "l2+", "l2-", "cut")
WELD_TOL = 1e-7


class MeshError(RuntimeError):
    pass


class AssemblyError(RuntimeError):
    pass


class OutsideDomain(ValueError):
    pass


# --- path integration in patch coordinates ------------------------------------


@dataclass(frozen=True)
class Segment:
    """A line ``x0 -> x1`` or an arc ``r e^{i theta}``, ``theta0 -> theta1``.

    ``singular="end"`` marks a line ending on a branch point.
    """

    kind: str
    x0: complex = 0j
    x1: complex = 0j
    r: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0
    singular: str | None = None

    @staticmethod
    def line(x0, x1, singular=None):
        return Segment("line", complex(x0), complex(x1), singular=singular)

    @staticmethod
    def arc(r, theta0, theta1, singular=None):
        return Segment("arc", r=float(r), theta0=float(theta0), theta1=float(theta1),
                       singular=singular)

    def position(self, tau):
        if self.kind == "line":
            return self.x0 + (self.x1 - self.x0) * tau, np.full_like(tau, self.x1 - self.x0, dtype=complex)
        th = self.theta0 + (self.theta1 - self.theta0) * tau
        x = self.r * np.exp(1j * th)
        return x, 1j * (self.theta1 - self.theta0) * x


def _w_at_branch_end(xb, delta, rho):
    """``domain_w(xb - delta)`` with the vanishing factor formed from ``delta``.

    Only valid for straight segments ending at the branch point ``xb``.
    """
    x = xb - delta
    e = np.exp(1j * rho)
    f1 = 1.0 - x * x * e
    f2 = 1.0 - x * x * np.conj(e)
    exact = (delta / xb) * (1.0 + x / xb)
    if abs(xb * xb * e - 1.0) < 1e-9:
        f1 = exact
    else:
        f2 = exact
    return np.sqrt(f1) * np.sqrt(f2)


class SurfaceData:
    """Everything needed to evaluate the Weierstrass data on ``M``."""

    def __init__(self, params, consts):
        self.params = params
        self.consts = consts
        self.a = params.a
        self.rho = params.rho
        self.beta = params.beta
        self.lam = params.lam
        self.branch = (np.exp(0.5j * params.rho), np.exp(-0.5j * params.rho))

    @classmethod
    def from_solved(cls, solved):
        return cls(solved.params, solved.consts)

    def integrand(self, seg: Segment, outer: bool):
        p, k, rho = self.params, self.consts, self.rho

        def fun(u):
            if seg.singular == "end":
                tau, jac = 1.0 - (1.0 - u) ** 2, 2.0 * (1.0 - u)
                x, dx = seg.position(tau)
                w = _w_at_branch_end(seg.x1, dx * (1.0 - u) ** 2, rho)
            else:
                tau, jac = u, 1.0
                x, dx = seg.position(tau)
                w = domain_w(x, rho)
            dx = dx * jac
            dl = eval_form_array(FormKind.DLogG, x, w, p, k, outer) * dx
            ph = eval_form_array(FormKind.Phi3, x, w, p, k, outer) * dx
            return dl, ph

        return fun

    def integrate(self, seg: Segment, outer: bool) -> WeightedPiece:
        return weighted_path_integral(self.integrand(seg, outer), 0.0, 1.0)


def advance(state, piece: WeightedPiece):
    """Move ``(logg, X)`` along an integrated piece."""
    logg, X = state
    g0 = np.exp(logg)
    gp, gm, p3 = piece.Gp[0], piece.Gm[0], piece.P[0]
    dX = np.array([
        (0.5 * (gm / g0 - g0 * gp)).real,
        (0.5j * (gm / g0 + g0 * gp)).real,
        p3.real,
    ])
    return logg + piece.L, X + dX


ROOT_STATE = (0j, np.zeros(3))


def _is_branch(x, data: SurfaceData) -> bool:
    return any(abs(x - bp) < 1e-12 for bp in data.branch)


def point_path(x: complex, data: SurfaceData) -> list[Segment]:
    """Segments from ``x = 1`` to ``x`` inside the closed half-disk.

    Route: along the real axis, around an arc of radius ``r_mid < 1``, then
    radially; ``r_mid`` keeps the radial leg off the marked points lying on
    the imaginary axis and the arc away from the branch points.
    """
    r, th = abs(x), math.atan2(x.imag, x.real) if x != 0 else 0.0
    if x.real < -1e-12 or r > 1 + 1e-12:
        raise OutsideDomain(f"x={x} outside the closed right half-disk")
    r = min(r, 1.0)
    marks = []
    if abs(th - 0.5 * math.pi) < 1e-12:
        marks.append(data.a)
    if abs(th + 0.5 * math.pi) < 1e-12:
        marks.append(data.consts.b)
    r_mid = 0.5
    if r <= 0.5:
        r_mid = r
    else:
        for m in marks:
            if 0.5 <= m <= r:
                r_mid = 0.5 * (m + r)
    segs = []
    if r_mid != 1.0:
        segs.append(Segment.line(1.0, r_mid))
    if th != 0.0 and r_mid > 0:
        segs.append(Segment.arc(r_mid, 0.0, th))
    if r != r_mid:
        end = r * np.exp(1j * th)
        segs.append(Segment.line(r_mid * np.exp(1j * th), end,
                                 "end" if _is_branch(end, data) else None))
    return segs


def patch_of(p: SurfacePoint, data: SurfaceData) -> tuple[complex, bool]:
    """Patch coordinate of a point of ``M`` and whether it is the outer patch."""
    if p.at_infinity:
        x, outer = p.z, True
        w_expected = p.w
    elif abs(p.z) <= 1.0:
        x, outer = p.z, False
        w_expected = p.w
    else:
        x, outer = 1.0 / p.z, True
        w_expected = p.w * x * x
    if abs(x) > 1.0 + 1e-12:
        x, outer = 1.0 / x, not outer
        w_expected = w_expected * x * x
    wd = complex(domain_w(x, data.rho))
    if abs(wd - w_expected) > 1e-8 * (1.0 + abs(wd)):
        raise OutsideDomain(f"point {p} is not on the fundamental piece")
    return complex(x), outer


def evaluate(x: complex, outer: bool, data: SurfaceData):
    state = ROOT_STATE
    for seg in point_path(x, data):
        state = advance(state, data.integrate(seg, outer))
    return state


def gauss_map(p: SurfacePoint, solved) -> complex:
    """Gauss map at a point of ``M`` (base point ``g(1_+) = 1``)."""
    data = solved if isinstance(solved, SurfaceData) else SurfaceData.from_solved(solved)
    x, outer = patch_of(p, data)
    return complex(np.exp(evaluate(x, outer, data)[0]))


def immerse(p: SurfacePoint, solved) -> np.ndarray:
    """Immersion at a point of ``M`` normalised by ``X(1_+) = 0``."""
    data = solved if isinstance(solved, SurfaceData) else SurfaceData.from_solved(solved)
    x, outer = patch_of(p, data)
    return evaluate(x, outer, data)[1]


def corner_points(solved) -> dict:
    """Images of ``i_+, i_-, (-i)_+, (-i)_-, 0_+, inf_-`` and of the branch points."""
    data = solved if isinstance(solved, SurfaceData) else SurfaceData.from_solved(solved)
    spots = {
        "i+": (1j, False), "i-": (-1j, True), "-i+": (-1j, False), "-i-": (1j, True),
        "0+": (0j, False), "inf-": (0j, True),
        "e+": (data.branch[0], False), "e-": (data.branch[1], False),
    }
    return {k: evaluate(x, o, data)[1] for k, (x, o) in spots.items()}


# --- mesh ---------------------------------------------------------------------


@dataclass
class MeshConfig:
    radial_res: int = 64
    angular_res: int = 64
    r_max: float | None = None
    eps_end: float | None = None
    copies: int = 1

    def resolved(self, a: float) -> "MeshConfig":
        r_max = 4.0 / a if self.r_max is None else self.r_max
        eps = 0.05 * a if self.eps_end is None else self.eps_end
        cfg = MeshConfig(self.radial_res, self.angular_res, r_max, eps, self.copies)
        cfg.validate(a)
        return cfg

    def validate(self, a: float) -> None:
        if self.radial_res < 8 or self.angular_res < 8:
            raise ValueError("resolutions must be at least 8")
        if not self.r_max > 1.0 / a:
            raise ValueError("r_max must exceed 1/a")
        if not 0.0 < self.eps_end < 0.25 * a:
            raise ValueError("eps_end must lie in (0, a/4)")
        if self.copies < 1:
            raise ValueError("copies must be positive")


@dataclass
class Mesh:
    vertices: np.ndarray
    faces: np.ndarray
    boundary_tags: dict
    chains: dict = field(default_factory=dict)
    gauss: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    @property
    def diameter(self) -> float:
        if len(self.vertices) == 0:
            return 0.0
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def edge_tags(self) -> list[tuple[int, int, str]]:
        out = []
        for tag in TAGS:
            for i, j in self.boundary_tags.get(tag, []):
                out.append((int(i), int(j), tag))
        return out


def _theta_grid(n: int, rho: float, extra=()) -> np.ndarray:
    """Symmetric grid on [-pi/2, pi/2] through 0 and +-rho/2."""
    half = 0.5 * math.pi
    b = 0.5 * rho
    n_half = max(4, n // 2)
    n1 = max(2, int(round(n_half * b / half)))
    n2 = max(2, n_half - n1)
    # clustered toward the branch point from both sides
    s1 = 0.5 * (1 - np.cos(np.linspace(0, math.pi, n1 + 1)))
    s2 = 0.5 * (1 - np.cos(np.linspace(0, math.pi, n2 + 1)))
    pos = np.concatenate([b * s1, b + (half - b) * s2[1:]])
    pos = np.concatenate([pos, [half - e for e in extra if 0 < e < half - b]])
    pos = np.unique(np.round(pos, 15))
    return np.concatenate([-pos[::-1], pos[1:]])


def _radial_grid(n: int, a: float, b: float, eps: float) -> np.ndarray:
    s = np.linspace(0.0, 1.0, n + 1)
    r = np.sin(0.5 * math.pi * s)
    refine = [a + eps * c for c in (-3, -2, -1.5, -1, -0.5, 0.5, 1, 1.5, 2, 3)]
    r = np.unique(np.concatenate([r, [x for x in refine if 0 < x < 1]]))
    # never put a vertex exactly on a zero of the height differential
    gap = np.min(np.diff(r))
    for i, v in enumerate(r):
        if abs(v - b) < 1e-9:
            r[i] = v + 0.25 * gap if v + 0.25 * gap < 1 else v - 0.25 * gap
    return np.unique(r)


def mesh_fundamental(solved, cfg: MeshConfig | None = None, *, closure: bool = True) -> Mesh:
    """Triangulated, immersed fundamental piece with tagged boundary chains."""
    data = solved if isinstance(solved, SurfaceData) else SurfaceData.from_solved(solved)
    cfg = (cfg or MeshConfig()).resolved(data.a)
    a, b, rho = data.a, data.consts.b, data.rho
    eps = cfg.eps_end
    radii = _radial_grid(cfg.radial_res, a, b, eps)
    extra = [eps / a * c for c in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0)]
    thetas = _theta_grid(cfg.angular_res, rho, extra)
    nr, nt = len(radii), len(thetas)
    j0 = int(np.argmin(np.abs(thetas)))
    jb = int(np.argmin(np.abs(thetas - 0.5 * rho)))
    jbm = int(np.argmin(np.abs(thetas + 0.5 * rho)))
    thetas[j0] = 0.0
    thetas[jb], thetas[jbm] = 0.5 * rho, -0.5 * rho

    end = 1j * a
    verts, gvals, info_patch, info_x = [], [], [], []
    index = {}  # (patch, i, j) -> vertex id
    welds = []

    def add(key, X, logg, x, outer):
        index[key] = len(verts)
        verts.append(X)
        gvals.append(np.exp(logg))
        info_patch.append(1 if outer else 0)
        info_x.append(x)

    def removed(i, j):
        return abs(radii[i] * np.exp(1j * thetas[j]) - end) < eps

    closure_defect = 0.0
    for outer in (False, True):
        pid = int(outer)
        # radial ray theta = 0 from x = 1 inward
        states = {}
        i_top = nr - 1
        states[(i_top, j0)] = ROOT_STATE
        for i in range(nr - 2, -1, -1):
            seg = Segment.line(radii[i + 1], radii[i])
            states[(i, j0)] = advance(states[(i + 1, j0)], data.integrate(seg, outer))
        # arcs at fixed radius r < 1
        for i in range(1, nr - 1):
            for direction in (1, -1):
                j = j0
                while 0 <= j + direction < nt:
                    jn = j + direction
                    if removed(i, jn):
                        break
                    seg = Segment.arc(radii[i], thetas[j], thetas[jn])
                    states[(i, jn)] = advance(states[(i, j)], data.integrate(seg, outer))
                    j = jn
        # outermost ring reached radially
        for j in range(nt):
            if j == j0 or removed(i_top, j):
                continue
            x1 = np.exp(1j * thetas[j])
            sing = "end" if j in (jb, jbm) else None
            if (i_top - 1, j) not in states:
                continue
            seg = Segment.line(radii[i_top - 1] * x1, x1, sing)
            states[(i_top, j)] = advance(states[(i_top - 1, j)], data.integrate(seg, outer))
        # closure defects on the remaining radial edges
        if closure:
            for i in range(1, nr - 2):
                for j in range(nt):
                    if j == j0 or (i, j) not in states or (i + 1, j) not in states:
                        continue
                    mark = a if j == nt - 1 else b if j == 0 else None
                    if mark is not None and radii[i] <= mark <= radii[i + 1]:
                        continue
                    seg = Segment.line(radii[i] * np.exp(1j * thetas[j]),
                                       radii[i + 1] * np.exp(1j * thetas[j]))
                    lg, X = advance(states[(i, j)], data.integrate(seg, outer))
                    closure_defect = max(closure_defect, float(np.linalg.norm(X - states[(i + 1, j)][1])))
        # register vertices
        centre = (pid, 0, 0)
        add(centre, states[(0, j0)][1], states[(0, j0)][0], 0j, outer)
        for i in range(1, nr):
            for j in range(nt):
                if (i, j) not in states:
                    continue
                if i == nr - 1 and outer and abs(thetas[j]) <= 0.5 * rho + 1e-15:
                    # shared arc: identify with the inner vertex at -theta
                    jj = nt - 1 - j
                    inner_id = index[(0, i, jj)]
                    index[(pid, i, j)] = inner_id
                    welds.append(float(np.linalg.norm(states[(i, j)][1] - verts[inner_id])))
                    continue
                add((pid, i, j), states[(i, j)][1], states[(i, j)][0],
                    radii[i] * np.exp(1j * thetas[j]), outer)
        for j in range(nt):
            index[(pid, 0, j)] = index[centre]

    faces = []
    for pid in (0, 1):
        for i in range(0, nr - 1):
            for j in range(nt - 1):
                a00 = index.get((pid, i, j))
                a10 = index.get((pid, i + 1, j))
                a11 = index.get((pid, i + 1, j + 1))
                a01 = index.get((pid, i, j + 1))
                if i == 0:
                    if None not in (a00, a10, a11):
                        faces.append((a00, a10, a11))
                    continue
                if None not in (a00, a10, a11):
                    faces.append((a00, a10, a11))
                if None not in (a00, a11, a01):
                    faces.append((a00, a11, a01))

    # boundary chains, each ordered from its corner toward its end
    def ray(pid, j, i_from, i_to):
        step = 1 if i_to >= i_from else -1
        out = []
        for i in range(i_from, i_to + step, step):
            v = index.get((pid, i, j))
            if v is None:
                break
            out.append(v)
        return out

    jt, jl = nt - 1, 0
    ia_hi = [i for i in range(nr) if radii[i] > a]
    ia_lo = [i for i in range(nr) if radii[i] < a]
    chains = {}
    chains["l1+"] = ray(0, jt, nr - 1, ia_hi[0])
    chains["l1-"] = ray(0, jl, nr - 1, 1) + [index[(0, 0, 0)]] + ray(0, jt, 1, ia_lo[-1])
    chains["l2+"] = ray(1, jl, nr - 1, 1) + [index[(1, 0, 0)]] + ray(1, jt, 1, ia_lo[-1])
    chains["l2-"] = ray(1, jt, nr - 1, ia_hi[0])
    top = nr - 1
    chains["l0+"] = ([index[(0, top, j)] for j in range(jt, jb - 1, -1)]
                     + [index[(1, top, j)] for j in range(jbm - 1, -1, -1)])
    chains["l0-"] = ([index[(0, top, j)] for j in range(0, jbm + 1)]
                     + [index[(1, top, j)] for j in range(jb + 1, nt)])
    tags = {t: [] for t in TAGS}
    tagged = set()
    for t, ch in chains.items():
        for u, v in zip(ch[:-1], ch[1:]):
            tags[t].append((u, v))
            tagged.add(frozenset((u, v)))
    # truncation cuts: boundary edges of the triangulation not on a chain
    count = {}
    orient = {}
    for f in faces:
        for u, v in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            key = frozenset((u, v))
            count[key] = count.get(key, 0) + 1
            orient[key] = (u, v)
    for key, c in count.items():
        if c == 1 and key not in tagged and len(key) == 2:
            tags["cut"].append(orient[key])

    V = np.array(verts, dtype=float)
    mesh = Mesh(
        vertices=V,
        faces=np.array(faces, dtype=np.int64).reshape(-1, 3),
        boundary_tags={t: np.array(e, dtype=np.int64).reshape(-1, 2) for t, e in tags.items()},
        chains=chains,
        gauss=np.array(gvals, dtype=complex),
        info={
            "patch": np.array(info_patch),
            "x": np.array(info_x, dtype=complex),
            "closure_defect": closure_defect,
            "weld_defect": max(welds) if welds else 0.0,
            "config": cfg,
            "beta": data.beta,
            "t_period": math.pi * data.lam * data.consts.R(data.a),
        },
    )
    if not np.all(np.isfinite(V)):
        raise MeshError("non-finite vertex coordinates")
    return mesh


# --- boundary geometry -----------------------------------------------------------


@dataclass
class FittedLine:
    point: np.ndarray
    direction: np.ndarray
    residual: float
    length: float


@dataclass
class BoundaryGeometry:
    lines: dict
    angle: float
    d_geo: float
    h_geo: float
    t_geo: float
    corners: dict
    coincidence: float
    diameter: float

    def max_relative_residual(self) -> float:
        return max(l.residual / l.length for l in self.lines.values())


def fit_line(P: np.ndarray, kind: str) -> FittedLine:
    """Best line through points; ``kind`` is 'vertical' or 'horizontal'."""
    c = P.mean(axis=0)
    length = float(np.linalg.norm(P[-1] - P[0]))
    if kind == "vertical":
        direction = np.array([0.0, 0.0, 1.0 if P[-1, 2] >= P[0, 2] else -1.0])
        res = float(np.max(np.linalg.norm(P[:, :2] - c[:2], axis=1)))
    else:
        Q = P[:, :2] - c[:2]
        _, _, vt = np.linalg.svd(Q, full_matrices=False)
        u = vt[0]
        if np.dot(P[-1, :2] - P[0, :2], u) < 0:
            u = -u
        direction = np.array([u[0], u[1], 0.0])
        perp = Q - np.outer(Q @ u, u)
        res = float(max(np.max(np.abs(P[:, 2] - c[2])), np.max(np.linalg.norm(perp, axis=1))))
    return FittedLine(c, direction, res, length)


def boundary_geometry(mesh: Mesh) -> BoundaryGeometry:
    V = mesh.vertices
    lines = {}
    for tag in ("l0+", "l0-"):
        lines[tag] = fit_line(V[mesh.chains[tag]], "vertical")
    for tag in ("l1+", "l1-", "l2+", "l2-"):
        lines[tag] = fit_line(V[mesh.chains[tag]], "horizontal")
    u1, u2 = lines["l1+"].direction[:2], lines["l1-"].direction[:2]
    angle = math.atan2(abs(u1[0] * u2[1] - u1[1] * u2[0]), float(np.dot(u1, u2)))
    d_geo = float(np.linalg.norm(lines["l0+"].point[:2] - lines["l0-"].point[:2]))
    h_geo = float(lines["l2+"].point[2] - lines["l1-"].point[2])
    t_geo = float(lines["l1+"].point[2] - lines["l1-"].point[2])
    ch = mesh.chains
    corners = {
        "q1+": V[ch["l1+"][0]], "q2+": V[ch["l2+"][0]],
        "q1-": V[ch["l1-"][0]], "q2-": V[ch["l2-"][0]],
    }
    coincidence = float(np.linalg.norm(corners["q1-"] - corners["q2+"]))
    return BoundaryGeometry(lines, angle, d_geo, h_geo, t_geo, corners, coincidence, mesh.diameter)


# --- assembly -------------------------------------------------------------------


def half_turn(line: FittedLine):
    """Affine map (A, c) of the 180-degree rotation about a fitted line."""
    u = line.direction / np.linalg.norm(line.direction)
    A = 2.0 * np.outer(u, u) - np.eye(3)
    c = 2.0 * (line.point - np.outer(u, u) @ line.point)
    return A, c


def _compose(f, g):
    """``f o g`` for affine maps stored as (A, c)."""
    return f[0] @ g[0], f[0] @ g[1] + f[1]


def _apply(f, V):
    return V @ f[0].T + f[1]


def layout_maps(geom: BoundaryGeometry, copies: int) -> list:
    """Rigid motions placing the copies: M, its half-turn images, then vertical periods."""
    ident = (np.eye(3), np.zeros(3))
    r0 = half_turn(geom.lines["l0+"])
    r2 = half_turn(geom.lines["l2-"])
    base = [ident, r0, r2, _compose(r2, r0)]
    tau = _compose(half_turn(geom.lines["l1+"]), half_turn(geom.lines["l2+"]))
    maps = []
    power = ident
    for k in range(copies):
        if k and k % 4 == 0:
            power = _compose(tau, power)
        maps.append(_compose(power, base[k % 4]))
    return maps


def weld(vertices: np.ndarray, faces: np.ndarray, tol: float):
    tree = cKDTree(vertices)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    parent = np.arange(len(vertices))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(vertices))])
    uniq, inv = np.unique(roots, return_inverse=True)
    return vertices[uniq], inv[faces], inv


def assemble_complete(mesh: Mesh, solved=None, beta=None, cfg: MeshConfig | None = None,
                      geometry: BoundaryGeometry | None = None, check: bool = True) -> Mesh:
    """Lay out ``cfg.copies`` copies of the fundamental piece and weld shared chains."""
    copies = cfg.copies if cfg is not None else 1
    geom = geometry or boundary_geometry(mesh)
    diam = max(1.0, geom.diameter)
    if check and copies > 1 and geom.coincidence > 1e-5 * diam:
        raise AssemblyError("period residual too large to assemble")
    maps = layout_maps(geom, copies)
    nv = len(mesh.vertices)
    V = np.concatenate([_apply(m, mesh.vertices) for m in maps])
    F = np.concatenate([mesh.faces + k * nv for k in range(copies)])
    Vw, Fw, inv = weld(V, F, WELD_TOL * diam)
    tags = {}
    for t, e in mesh.boundary_tags.items():
        tags[t] = np.concatenate([inv[e + k * nv] for k in range(copies)]) if len(e) else e
    merged = len(V) - len(Vw)
    if check and copies > 1:
        need = len(mesh.chains["l0+"]) + (len(mesh.chains["l2-"]) if copies > 2 else 0)
        if merged < need:
            raise AssemblyError("period residual too large to assemble")
    out = Mesh(Vw, Fw, tags, {}, None, {"merged": merged, "copies": copies,
                                       "base_faces": len(mesh.faces)})
    return out


# --- curvature ------------------------------------------------------------------


def _normals(g: np.ndarray) -> np.ndarray:
    m = np.abs(g) ** 2
    big = ~np.isfinite(m)
    with np.errstate(invalid="ignore", over="ignore"):
        N = np.stack([2 * g.real, 2 * g.imag, m - 1.0], axis=1) / (m + 1.0)[:, None]
    N[big] = [0.0, 0.0, 1.0]
    return N


def gauss_image_area(mesh: Mesh) -> dict:
    """Spherical area of the Gauss image of ``M``.

    Sum of signed spherical triangles over the mesh plus, for each excised
    end, the sector of the polar cap bounded by the image of the cut.  Near
    an end ``g`` behaves like a power of the local coordinate, and the two
    boundary rays map to meridians, so the hole's image is the set swept
    from the pole to the cut image.
    """
    N = _normals(mesh.gauss)
    f = mesh.faces
    A, B, C = N[f[:, 0]], N[f[:, 1]], N[f[:, 2]]
    num = np.einsum("ij,ij->i", A, np.cross(B, C))
    den = 1.0 + np.einsum("ij,ij->i", A, B) + np.einsum("ij,ij->i", B, C) + np.einsum("ij,ij->i", C, A)
    tri = 2.0 * np.arctan2(num, den)
    area_mesh = float(tri.sum())
    sgn = 1.0 if area_mesh >= 0 else -1.0
    cuts = mesh.boundary_tags.get("cut", np.zeros((0, 2), int))
    patch = mesh.info["patch"]
    caps = []
    for pid in (0, 1):
        sel = [e for e in cuts if patch[e[0]] == pid and patch[e[1]] == pid]
        if not sel:
            caps.append(0.0)
            continue
        e = np.array(sel)
        g0, g1 = mesh.gauss[e[:, 0]], mesh.gauss[e[:, 1]]
        zero_type = np.median(np.abs(np.concatenate([g0, g1]))) < 1.0
        if not zero_type:
            g0, g1 = 1.0 / g0, 1.0 / g1
        darg = np.angle(g1 / g0)
        S = 0.5 * (np.abs(g0) ** 2 + np.abs(g1) ** 2)
        caps.append(abs(float(np.sum(darg * 2.0 * S / (1.0 + S)))))
    total = sgn * area_mesh + sum(caps)
    return {"mesh": sgn * area_mesh, "caps": caps, "total": total}


def quotient_copies(beta: float, max_den: int = 64) -> int:
    """Number of copies of ``M`` in the quotient by the vertical translation.

    With ``beta = q/p`` in lowest terms: ``4p`` copies when ``p`` is even or
    ``q`` is even, and ``2p`` when both are odd.
    """
    fr = Fraction(beta).limit_denominator(max_den)
    p, q = fr.denominator, fr.numerator
    if p % 2 == 0 or q % 2 == 0:
        return 4 * p
    return 2 * p


def total_curvature(obj, refinement: int = 128, eps_end: float | None = None) -> float:
    """Total curvature of the quotient surface (a negative number)."""
    if isinstance(obj, Mesh):
        mesh = obj
        beta = mesh.info["beta"]
    else:
        mesh = mesh_fundamental(obj, MeshConfig(refinement, refinement, eps_end=eps_end),
                                closure=False)
        beta = obj.params.beta
    area = gauss_image_area(mesh)["total"]
    return -quotient_copies(beta) * area


# --- self-intersection spot check ----------------------------------------------


def _seg_tri(p0, p1, a, b, c, eps=1e-12):
    e1, e2 = b - a, c - a
    d = p1 - p0
    h = np.cross(d, e2)
    det = np.dot(e1, h)
    if abs(det) < eps:
        return False
    inv = 1.0 / det
    s = p0 - a
    u = inv * np.dot(s, h)
    if u < eps or u > 1 - eps:
        return False
    q = np.cross(s, e1)
    v = inv * np.dot(d, q)
    if v < eps or u + v > 1 - eps:
        return False
    t = inv * np.dot(e2, q)
    return eps < t < 1 - eps


def self_intersections(mesh: Mesh, max_pairs: int = 200000) -> int:
    """Coarse count of edge/triangle crossings between non-adjacent faces."""
    V, F = mesh.vertices, mesh.faces
    cent = V[F].mean(axis=1)
    rad = np.max(np.linalg.norm(V[F] - cent[:, None, :], axis=2), axis=1)
    tree = cKDTree(cent)
    pairs = tree.query_pairs(2.0 * float(rad.max()), output_type="ndarray")
    hits = 0
    for n, (i, j) in enumerate(pairs):
        if n >= max_pairs:
            break
        fi, fj = F[i], F[j]
        if set(fi) & set(fj):
            continue
        if np.linalg.norm(cent[i] - cent[j]) > rad[i] + rad[j]:
            continue
        A = V[fj]
        for k in range(3):
            if _seg_tri(V[fi[k]], V[fi[(k + 1) % 3]], *A):
                hits += 1
                break
    return hits


# --- export ---------------------------------------------------------------------


def export_mesh(mesh: Mesh, fmt: str, path) -> None:
    """Write ASCII OBJ (tags as comments) or ASCII PLY, deterministic order."""
    fmt = fmt.lower()
    V, F = mesh.vertices, mesh.faces
    lines = []
    if fmt == "obj":
        lines.append("# helicoidal fundamental piece")
        for v in V:
            lines.append("v %.9g %.9g %.9g" % tuple(v))
        for f in F:
            lines.append("f %d %d %d" % (f[0] + 1, f[1] + 1, f[2] + 1))
        for tag in TAGS:
            e = mesh.boundary_tags.get(tag)
            if e is None or len(e) == 0:
                continue
            lines.append("# boundary %s %s" % (tag, " ".join("%d-%d" % (i + 1, j + 1) for i, j in e)))
    elif fmt == "ply":
        lines += ["ply", "format ascii 1.0",
                  "element vertex %d" % len(V), "property double x", "property double y",
                  "property double z", "element face %d" % len(F),
                  "property list uchar int vertex_indices", "end_header"]
        for v in V:
            lines.append("%.9g %.9g %.9g" % tuple(v))
        for f in F:
            lines.append("3 %d %d %d" % tuple(f))
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_obj(path) -> tuple[np.ndarray, np.ndarray]:
    V, F = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                V.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                F.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.array(V).reshape(-1, 3), np.array(F, dtype=np.int64).reshape(-1, 3)
