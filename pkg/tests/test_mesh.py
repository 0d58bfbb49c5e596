import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llstar.mesh import (
    LOCAL_EDGES,
    boundary_vertices,
    build_uniform_mesh,
    edge_unit_normal,
    interior_vertex_mask,
)


@pytest.mark.parametrize(
    "level, nv, ne, nt, h",
    [(0, 4, 5, 2, 1.0), (2, 25, 56, 32, 0.25), (3, 81, 208, 128, 0.125)],
)
def test_counts(level, nv, ne, nt, h):
    m = build_uniform_mesh(level)
    assert (m.n_vertices, m.n_edges, m.n_triangles) == (nv, ne, nt)
    assert m.h == h


@pytest.mark.parametrize("level", range(7))
def test_invariants(level):
    m = build_uniform_mesh(level)
    n = 2**level
    assert m.n_vertices == (n + 1) ** 2
    assert m.n_triangles == 2 * 4**level
    assert m.n_edges == 3 * 4**level + 2 * 2**level
    assert m.n_vertices - m.n_edges + m.n_triangles == 1
    np.testing.assert_allclose(m.signed_areas(), m.h**2 / 2, rtol=0, atol=1e-16)
    assert abs(m.signed_areas().sum() - 1.0) < 1e-14
    assert m.boundary_edge_flags.sum() == 4 * n
    assert np.all(m.edges[:, 0] < m.edges[:, 1])


@pytest.mark.parametrize("level", range(5))
def test_edge_sharing_and_signs(level):
    m = build_uniform_mesh(level)
    incident = m.edge_triangles()
    sign_sum = np.zeros(m.n_edges, dtype=int)
    np.add.at(sign_sum, m.triangle_edges.ravel(), m.triangle_edge_signs.ravel())
    for e, tris in enumerate(incident):
        if m.boundary_edge_flags[e]:
            assert len(tris) == 1
        else:
            assert len(tris) == 2
            assert sign_sum[e] == 0


def test_local_edges_match_global(rng):
    m = build_uniform_mesh(3)
    for t in rng.integers(0, m.n_triangles, 20):
        for k, (a, b) in enumerate(LOCAL_EDGES):
            va, vb = m.triangles[t, a], m.triangles[t, b]
            e = m.triangle_edges[t, k]
            assert {va, vb} == set(m.edges[e])
            assert m.triangle_edge_signs[t, k] == (1 if va < vb else -1)


def test_sign_means_outward_normal():
    m = build_uniform_mesh(2)
    for t, tri in enumerate(m.triangles):
        centroid = m.vertices[tri].mean(axis=0)
        for k in range(3):
            e = m.triangle_edges[t, k]
            mid = m.vertices[m.edges[e]].mean(axis=0)
            outward = np.dot(edge_unit_normal(m, e), mid - centroid) > 0
            assert outward == (m.triangle_edge_signs[t, k] > 0)


def test_diagonals_run_sw_to_ne():
    m = build_uniform_mesh(3)
    d = m.vertices[m.edges[:, 1]] - m.vertices[m.edges[:, 0]]
    diag = (d[:, 0] != 0) & (d[:, 1] != 0)
    assert diag.sum() == 4**3
    assert np.all(d[diag, 0] == d[diag, 1])


def test_edge_unit_normal_examples():
    m = build_uniform_mesh(1)
    found = set()
    for e in range(m.n_edges):
        t = m.vertices[m.edges[e, 1]] - m.vertices[m.edges[e, 0]]
        t = t / np.linalg.norm(t)
        n = edge_unit_normal(m, e)
        if np.allclose(t, (1, 0)):
            np.testing.assert_allclose(n, (0, -1))
            found.add("h")
        elif np.allclose(t, (0, 1)):
            np.testing.assert_allclose(n, (1, 0))
            found.add("v")
        else:
            np.testing.assert_allclose(t, np.array([1, 1]) / np.sqrt(2))
            np.testing.assert_allclose(n, np.array([1, -1]) / np.sqrt(2))
            found.add("d")
        np.testing.assert_array_equal(n, edge_unit_normal(m, e))
    assert found == {"h", "v", "d"}
    with pytest.raises(IndexError):
        edge_unit_normal(m, m.n_edges)


@pytest.mark.parametrize("level, nb, ni", [(0, 4, 0), (1, 8, 1), (2, 16, 9)])
def test_boundary_vertices(level, nb, ni):
    m = build_uniform_mesh(level)
    b = boundary_vertices(m)
    assert len(b) == nb
    assert interior_vertex_mask(m).sum() == ni
    for v in range(m.n_vertices):
        x, y = m.vertices[v]
        assert (v in b) == (x in (0.0, 1.0) or y in (0.0, 1.0))


@pytest.mark.parametrize("bad", [-1, 1.5, True, "2"])
def test_rejects_bad_level(bad):
    with pytest.raises((ValueError, TypeError)):
        build_uniform_mesh(bad)


def test_immutable_and_text():
    m = build_uniform_mesh(1)
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 3.0
    text = m.to_text()
    assert "vertices 9" in text and "edges 16" in text and "triangles 8" in text


@given(st.integers(min_value=0, max_value=5))
@settings(max_examples=10, deadline=None)
def test_vertex_row_major(level):
    m = build_uniform_mesh(level)
    n = 2**level
    i, j = 3 % (n + 1), n
    np.testing.assert_array_equal(m.vertices[i + j * (n + 1)], (i / n, j / n) if n else (0, 0))
