import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singtm.mesh import (DomainSpec, build_mesh, geometry_constants, kappa_constant,
                         load_mesh, refine, save_mesh)

SQUARE = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]


def test_disk_mesh_basics():
    mesh = build_mesh(DomainSpec.disk(1.0), 0.5)
    assert mesh.origin_vertex == 0
    assert np.allclose(mesh.vertices[mesh.origin_vertex], 0.0)
    r = np.linalg.norm(mesh.vertices, axis=1)
    assert np.all(r <= 1.0 + 1e-12)
    assert np.allclose(r[mesh.boundary], 1.0)
    assert mesh.inradius_d == 1.0
    assert mesh.max_edge_length() <= 2 * 0.5
    assert np.all(mesh.signed_areas() > 0)


def test_disk_mesh_respects_target_h():
    for h in (0.3, 0.1, 0.05):
        mesh = build_mesh(DomainSpec.disk(2.0), h)
        assert mesh.max_edge_length() <= 2 * h


def test_square_inradius_and_area():
    mesh = build_mesh(DomainSpec.polygon(SQUARE), 0.5)
    assert mesh.inradius_d == pytest.approx(1.0, abs=1e-14)
    assert mesh.signed_areas().sum() == pytest.approx(4.0, rel=1e-12)
    assert not mesh.boundary[mesh.origin_vertex]


def test_polygon_inradius_matches_brute_force():
    verts = [(2.0, -1.0), (1.5, 1.2), (-0.5, 1.0), (-1.2, -0.4), (0.3, -1.5)]
    mesh = build_mesh(DomainSpec.polygon(verts), 0.4)
    # brute force: min distance from origin to densely sampled boundary
    best = math.inf
    arr = np.asarray(verts)
    for i in range(len(arr)):
        a, b = arr[i], arr[(i + 1) % len(arr)]
        for t in np.linspace(0, 1, 20001):
            best = min(best, float(np.linalg.norm(a + t * (b - a))))
    assert mesh.inradius_d == pytest.approx(best, abs=1e-6)


def test_refine_counts_and_vertex_superset():
    mesh = build_mesh(DomainSpec.disk(1.0), 0.25)
    m1 = refine(mesh)
    m2 = refine(m1)
    assert m1.n_triangles == 4 * mesh.n_triangles
    assert m2.n_triangles == 16 * mesh.n_triangles
    # refinement never moves existing vertices
    assert np.array_equal(m1.vertices[:mesh.n_vertices], mesh.vertices)
    assert np.array_equal(m2.vertices[:m1.n_vertices], m1.vertices)
    assert m1.origin_vertex == mesh.origin_vertex
    assert m1.refinement_level == mesh.refinement_level + 1


def test_refine_edge_halving_polygon_exact():
    mesh = build_mesh(DomainSpec.polygon(SQUARE), 0.6)
    m1 = refine(mesh)
    assert m1.max_edge_length() <= 0.5 * mesh.max_edge_length() + 1e-12


def test_refine_edge_halving_disk_with_snap_allowance():
    # boundary/ring snapping lengthens snapped chords by 1/cos(theta/2), so
    # exact halving is relaxed to 0.52 on disks (see ledgered conflict)
    mesh = build_mesh(DomainSpec.disk(1.0), 0.25)
    for _ in range(3):
        m1 = refine(mesh)
        assert m1.max_edge_length() <= 0.52 * mesh.max_edge_length()
        mesh = m1


def test_disk_refine_keeps_boundary_on_circle():
    mesh = refine(refine(build_mesh(DomainSpec.disk(2.5), 0.5)))
    r = np.linalg.norm(mesh.vertices[mesh.boundary], axis=1)
    assert np.allclose(r, 2.5, atol=1e-12)


def test_geometry_constants_examples():
    mesh1 = build_mesh(DomainSpec.disk(1.0), 0.5)
    assert geometry_constants(mesh1, 0.0).kappa == pytest.approx(2.0, abs=1e-15)
    assert geometry_constants(mesh1, 1.0).kappa == pytest.approx(0.5, abs=1e-15)
    mesh2 = build_mesh(DomainSpec.disk(2.0), 0.5)
    assert geometry_constants(mesh2, 0.0).kappa == pytest.approx(0.5, abs=1e-15)


@given(gamma=st.floats(0.0, 1.99))
@settings(max_examples=50, deadline=None)
def test_kappa_decreasing_in_d(gamma):
    ds = np.linspace(0.3, 4.0, 12)
    ks = [kappa_constant(d, gamma) for d in ds]
    assert all(a > b for a, b in zip(ks, ks[1:]))


def test_kappa_gamma_range_errors():
    with pytest.raises(ValueError):
        kappa_constant(1.0, 2.0)
    with pytest.raises(ValueError):
        kappa_constant(1.0, -0.1)


def test_polygon_origin_on_boundary_rejected():
    # origin coincides with a polygon vertex
    with pytest.raises(ValueError):
        build_mesh(DomainSpec.polygon([(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)]), 0.3)
    # origin on an edge
    with pytest.raises(ValueError):
        build_mesh(DomainSpec.polygon([(-1.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0)]), 0.3)


def test_polygon_origin_outside_rejected():
    with pytest.raises(ValueError):
        DomainSpec.polygon([(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)])
        build_mesh(DomainSpec.polygon([(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]), 0.3)


def test_invalid_polygons_rejected():
    with pytest.raises(ValueError):  # self-intersecting (bowtie)
        DomainSpec.polygon([(-1, -1), (1, 1), (1, -1), (-1, 1)])
    with pytest.raises(ValueError):  # clockwise
        DomainSpec.polygon([(-1, -1), (-1, 1), (1, 1), (1, -1)])
    with pytest.raises(ValueError):  # repeated vertex
        DomainSpec.polygon([(-1, -1), (1, -1), (1, -1), (1, 1), (-1, 1)])


def test_nonconvex_polygon_mesh():
    lshape = [(-1, -1), (1, -1), (1, 0.2), (0.2, 0.2), (0.2, 1), (-1, 1)]
    mesh = build_mesh(DomainSpec.polygon(lshape), 0.3)
    assert np.all(mesh.signed_areas() > 0)
    area = 4.0 - 0.8 * 0.8
    assert mesh.signed_areas().sum() == pytest.approx(area, rel=1e-12)
    # nearest boundary point is the re-entrant corner (0.2, 0.2)
    assert mesh.inradius_d == pytest.approx(math.sqrt(0.08), abs=1e-12)


def test_build_mesh_invalid_target_h():
    with pytest.raises(ValueError):
        build_mesh(DomainSpec.disk(1.0), 0.0)


@given(radius=st.floats(0.2, 5.0), rel_h=st.floats(0.05, 0.6))
@settings(max_examples=15, deadline=None)
def test_disk_mesh_invariants_property(radius, rel_h):
    mesh = build_mesh(DomainSpec.disk(radius), rel_h * radius)
    assert mesh.max_edge_length() <= 2.0 * rel_h * radius
    assert np.all(mesh.signed_areas() > 0)
    assert mesh.inradius_d == radius
    r = np.linalg.norm(mesh.vertices, axis=1)
    assert np.allclose(r[mesh.boundary], radius, rtol=1e-12)
    assert np.all(r <= radius * (1 + 1e-12))
    assert int(np.sum(r < 1e-14)) == 1  # exactly one vertex at the origin


def test_load_mesh_requires_origin_vertex(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3\n1.0 0.0 1\n0.5 0.5 1\n0.25 0.25 0\n0 1 2\n")
    with pytest.raises(ValueError):
        load_mesh(path)


def test_save_load_roundtrip(tmp_path):
    mesh = refine(build_mesh(DomainSpec.disk(1.0), 0.4))
    path = tmp_path / "mesh.txt"
    save_mesh(mesh, path)
    back = load_mesh(path)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.array_equal(back.boundary, mesh.boundary)
    assert back.origin_vertex == mesh.origin_vertex
    # inradius is recomputed from boundary edges (chord polygon, slightly inside)
    assert back.inradius_d == pytest.approx(mesh.inradius_d, rel=5e-3)


def test_loaded_mesh_is_polygonal(tmp_path):
    mesh = build_mesh(DomainSpec.disk(1.0), 0.4)
    path = tmp_path / "mesh.txt"
    save_mesh(mesh, path)
    back = load_mesh(path)
    assert back.domain is None
    m1 = refine(back)  # no snapping: boundary midpoints stay on chords
    r = np.linalg.norm(m1.vertices[m1.boundary], axis=1)
    assert r.min() < 1.0 - 1e-6
