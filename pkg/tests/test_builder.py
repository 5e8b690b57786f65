import cmath
import math

import numpy as np
import pytest

from helicoidal import builder, period_solver as ps
from helicoidal.builder import MeshConfig, SurfaceData, evaluate


@pytest.fixture(scope="module")
def mesh_one(solved_one):
    return builder.mesh_fundamental(solved_one, MeshConfig(32, 32))


@pytest.fixture(scope="module")
def mesh_generic(solved_generic):
    return builder.mesh_fundamental(solved_generic, MeshConfig(32, 32))


def test_base_point_normalisation(solved_generic):
    data = SurfaceData.from_solved(solved_generic)
    logg, X = evaluate(1.0 + 0j, False, data)
    assert abs(logg) < 1e-15 and np.all(np.abs(X) < 1e-15)


def test_beta_one_gauss_map_closed_form(solved_one):
    data = SurfaceData.from_solved(solved_one)
    a = solved_one.params.a
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = math.sqrt(rng.uniform(0, 0.95)) * cmath.exp(1j * rng.uniform(-1.5, 1.5))
        outer = bool(rng.integers(2))
        z = 1 / x if outer else x
        g = np.exp(evaluate(x, outer, data)[0])
        assert abs(g / ((z * z + a * a) / (a * a * z * z + 1)) - 1) < 1e-12


@pytest.mark.parametrize("x,outer", [(0.3 + 0.4j, False), (0.5 - 0.2j, True), (0.8 + 0.1j, False)])
def test_immersion_is_conformal_with_gauss_normal(solved_generic, x, outer):
    data = SurfaceData.from_solved(solved_generic)
    h = 1e-5
    Xu = (evaluate(x + h, outer, data)[1] - evaluate(x - h, outer, data)[1]) / (2 * h)
    Xv = (evaluate(x + 1j * h, outer, data)[1] - evaluate(x - 1j * h, outer, data)[1]) / (2 * h)
    assert abs(Xu @ Xv) < 1e-7 * (Xu @ Xu)
    assert abs(Xu @ Xu - Xv @ Xv) < 1e-7 * (Xu @ Xu)
    n = np.cross(Xu, Xv)
    n /= np.linalg.norm(n)
    g = np.exp(evaluate(x, outer, data)[0])
    N = builder._normals(np.array([g]))[0]
    assert min(np.linalg.norm(n - N), np.linalg.norm(n + N)) < 1e-7


def test_mesh_defects_and_tags(mesh_generic):
    m = mesh_generic
    assert m.info["closure_defect"] < 1e-10
    assert m.info["weld_defect"] < 1e-10
    assert set(m.boundary_tags) <= set(builder.TAGS)
    for tag in ("l0+", "l0-", "l1+", "l1-", "l2+", "l2-"):
        assert len(m.chains[tag]) >= 2
    # every boundary edge is tagged exactly once
    edges = {}
    for f in m.faces:
        for i in range(3):
            e = tuple(sorted((f[i], f[(i + 1) % 3])))
            edges[e] = edges.get(e, 0) + 1
    boundary = {e for e, c in edges.items() if c == 1}
    tagged = [tuple(sorted(e)) for t in m.boundary_tags.values() for e in t]
    assert len(tagged) == len(set(tagged)) and set(tagged) == boundary


def test_boundary_lines_generic(mesh_generic, solved_generic):
    geom = builder.boundary_geometry(mesh_generic)
    assert geom.max_relative_residual() < 1e-10
    assert abs(geom.angle - math.pi * solved_generic.params.beta) < 1e-8
    assert abs(geom.t_geo - solved_generic.t_period) < 1e-9
    assert abs(geom.d_geo - abs(ps.d_func(0.5, 2.0, 0.5))) < 1e-9
    assert abs(geom.h_geo - 2 * ps.h_func(0.5, 2.0, 0.5)) < 1e-9
    for p, q in (("l1+", "l2+"), ("l1-", "l2-")):
        u, v = geom.lines[p].direction, geom.lines[q].direction
        assert abs(abs(u @ v) - 1) < 1e-10


def test_boundary_lines_solution(mesh_one, solved_one):
    geom = builder.boundary_geometry(mesh_one)
    assert geom.coincidence < 1e-12 * geom.diameter
    assert geom.d_geo < 1e-10 and abs(geom.h_geo) < 1e-10


def test_gauss_image_area(mesh_generic):
    area = builder.gauss_image_area(mesh_generic)
    assert abs(area["total"] - 2 * math.pi * 1.5) < 5e-3 * 2 * math.pi * 1.5
    assert all(c >= 0 for c in area["caps"])


@pytest.mark.parametrize("beta,n", [(1.0, 2), (0.5, 8), (1 / 3, 6), (2 / 3, 12), (0.2, 10), (0.6, 10), (0.25, 16)])
def test_quotient_copies(beta, n):
    assert builder.quotient_copies(beta) == n


def test_half_turn_is_involution(mesh_one):
    geom = builder.boundary_geometry(mesh_one)
    for ln in geom.lines.values():
        f = builder.half_turn(ln)
        P = np.random.default_rng(0).normal(size=(5, 3))
        assert np.allclose(builder._apply(f, builder._apply(f, P)), P, atol=1e-12)
        on = ln.point + np.outer([0.0, 1.0, -2.0], ln.direction)
        assert np.allclose(builder._apply(f, on), on, atol=1e-12)


def test_fit_line_synthetic():
    t = np.linspace(0, 1, 10)
    P = np.stack([1 + 2 * t, 3 - t, np.full_like(t, 0.5)], axis=1)
    ln = builder.fit_line(P, "horizontal")
    assert ln.residual < 1e-14
    assert abs(abs(ln.direction[:2] @ np.array([2, -1]) / math.sqrt(5)) - 1) < 1e-14
    Q = np.stack([np.zeros(5), np.ones(5), np.arange(5.0)], axis=1)
    assert builder.fit_line(Q, "vertical").residual < 1e-15


def test_assembly_four_copies(mesh_one, solved_one):
    geom = builder.boundary_geometry(mesh_one)
    full = builder.assemble_complete(mesh_one, solved_one, cfg=MeshConfig(32, 32, copies=4), geometry=geom)
    z = full.vertices[:, 2]
    assert abs((z.max() - z.min()) - 4 * solved_one.t_period) < 1e-6
    assert full.info["merged"] >= len(mesh_one.chains["l0+"]) + len(mesh_one.chains["l2-"])
    # the copy across l2- shares that boundary line
    r2 = builder.half_turn(geom.lines["l2-"])
    chain = mesh_one.vertices[mesh_one.chains["l2-"]]
    assert np.allclose(builder._apply(r2, chain), chain, atol=1e-10)


def test_assembly_refuses_unsolved(mesh_generic, solved_generic):
    with pytest.raises(builder.AssemblyError):
        builder.assemble_complete(mesh_generic, solved_generic, cfg=MeshConfig(32, 32, copies=2))


def test_weld_merges_duplicates():
    V = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1e-12, 0, 0]], float)
    F = np.array([[0, 1, 2], [3, 2, 1]])
    Vw, Fw, inv = builder.weld(V, F, 1e-9)
    assert len(Vw) == 3 and inv[3] == inv[0]


def test_export_round_trip(tmp_path, mesh_one):
    p = tmp_path / "m.obj"
    builder.export_mesh(mesh_one, "obj", p)
    V, F = builder.read_obj(p)
    assert np.allclose(V, mesh_one.vertices, rtol=1e-8, atol=1e-8)
    assert np.array_equal(F, mesh_one.faces)
    tags = {}
    for line in p.read_text().splitlines():
        if line.startswith("# boundary "):
            _, _, tag, *edges = line.split()
            tags[tag] = np.array([[int(v) - 1 for v in e.split("-")] for e in edges])
    for tag, e in mesh_one.boundary_tags.items():
        if len(e):
            assert np.array_equal(tags[tag], e)
    q = tmp_path / "m.ply"
    builder.export_mesh(mesh_one, "ply", q)
    head = q.read_text().splitlines()[:10]
    assert head[0] == "ply" and f"element vertex {len(mesh_one.vertices)}" in head
    with pytest.raises(ValueError):
        builder.export_mesh(mesh_one, "stl", tmp_path / "m.stl")


def test_export_is_deterministic(tmp_path, mesh_one):
    a, b = tmp_path / "a.obj", tmp_path / "b.obj"
    builder.export_mesh(mesh_one, "obj", a)
    builder.export_mesh(mesh_one, "obj", b)
    assert a.read_bytes() == b.read_bytes()


def test_fundamental_piece_embedded(solved_one):
    m = builder.mesh_fundamental(solved_one, MeshConfig(12, 12))
    assert builder.self_intersections(m) == 0


@pytest.mark.parametrize("kw", [dict(radial_res=4), dict(eps_end=0.5), dict(r_max=1.0), dict(copies=0)])
def test_mesh_config_validation(kw):
    with pytest.raises(ValueError):
        MeshConfig(**kw).resolved(0.5)
