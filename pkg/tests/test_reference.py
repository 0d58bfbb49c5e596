import numpy as np
import pytest

from llstar.quadrature import edge_rule, triangle_rule
from llstar.reference import (
    CellMap,
    build_scalar_basis,
    build_vector_basis,
    edge_points,
    edge_scaled_normal,
    eval_monomials,
    map_scalar,
    map_vector_piola,
    monomial_exponents,
    shifted_legendre,
)

PTS = triangle_rule(10).points


@pytest.mark.parametrize("q, dim", [(1, 3), (2, 6), (3, 10), (4, 15)])
def test_scalar_basis_kronecker_and_unity(q, dim):
    sb = build_scalar_basis(q)
    assert sb.dim == dim == (q + 1) * (q + 2) // 2
    vals, _ = sb.evaluate(sb.nodes)
    np.testing.assert_allclose(vals, np.eye(dim), atol=1e-12)
    vals, grads = sb.evaluate(PTS)
    np.testing.assert_allclose(vals.sum(1), 1.0, atol=1e-12)
    np.testing.assert_allclose(grads.sum(1), 0.0, atol=1e-12)
    n_edge = sum(len(e) for e in sb.edge_dofs)
    assert 3 + n_edge + len(sb.interior_dofs) == dim
    assert n_edge == 3 * (q - 1)


def test_p1_basis_is_barycentric():
    sb = build_scalar_basis(1)
    vals, grads = sb.evaluate(np.array([[1 / 3, 1 / 3]]))
    np.testing.assert_allclose(vals[0], [1 / 3] * 3, atol=1e-15)
    np.testing.assert_allclose(grads[0], [[-1, -1], [1, 0], [0, 1]], atol=1e-14)


@pytest.mark.parametrize("q", range(1, 5))
def test_scalar_interpolation_exact(q, rng):
    sb = build_scalar_basis(q)
    exps = monomial_exponents(q)
    c = rng.standard_normal(len(exps))
    poly = lambda pts: eval_monomials(exps, pts)[0] @ c
    vals, _ = sb.evaluate(PTS)
    assert np.abs(vals @ poly(sb.nodes) - poly(PTS)).max() <= 1e-10


def test_edge_nodes_follow_traversal():
    sb = build_scalar_basis(3)
    for k, dofs in enumerate(sb.edge_dofs):
        np.testing.assert_allclose(sb.nodes[list(dofs)], edge_points(k, [1 / 3, 2 / 3]))


@pytest.mark.parametrize("p, dim", [(0, 3), (1, 8), (2, 15), (3, 24)])
def test_vector_basis_dims(p, dim):
    vb = build_vector_basis(p)
    assert vb.dim == dim == (p + 1) * (p + 3)
    assert sum(len(e) for e in vb.edge_dofs) == 3 * (p + 1)
    assert len(vb.interior_dofs) == p * (p + 1)
    assert vb.vandermonde_cond < 1e8


@pytest.mark.parametrize("p", range(4))
def test_vector_basis_duality(p):
    vb = build_vector_basis(p)
    dual = vb.apply_dofs(lambda q: np.moveaxis(vb.evaluate(q)[0], 1, 0))
    np.testing.assert_allclose(dual, np.eye(vb.dim), atol=1e-10)


def normal_traces(vb, k, t):
    vals, _ = vb.evaluate(edge_points(k, t))
    return vals @ edge_scaled_normal(k)  # (npts, dim)


@pytest.mark.parametrize("p", range(4))
def test_normal_trace_degree(p):
    vb = build_vector_basis(p)
    t = edge_rule(8).points
    V = np.vander(t, p + 1)
    for k in range(3):
        tr = normal_traces(vb, k, t)
        coef, *_ = np.linalg.lstsq(V, tr, rcond=None)
        assert np.abs(V @ coef - tr).max() <= 1e-10
        # interior members and other edges' members carry no flux here
        others = [i for i in range(vb.dim) if i not in vb.edge_dofs[k]]
        assert np.abs(tr[:, others]).max() <= 1e-12


@pytest.mark.parametrize("p", range(4))
def test_edge_moments_against_legendre(p):
    vb = build_vector_basis(p)
    er = edge_rule(p + 2)
    for k in range(3):
        tr = normal_traces(vb, k, er.points)
        for j, dof in enumerate(vb.edge_dofs[k]):
            for i in range(p + 1):
                m = er.weights @ (shifted_legendre(i, er.points) * tr[:, dof])
                assert abs(m - (i == j)) < 1e-12


@pytest.mark.parametrize("p", range(4))
def test_divergence_space_is_pp(p):
    vb = build_vector_basis(p)
    _, divs = vb.evaluate(PTS)
    mono, _, _ = eval_monomials(monomial_exponents(p), PTS)
    coef, *_ = np.linalg.lstsq(mono, divs, rcond=None)
    assert np.abs(mono @ coef - divs).max() <= 1e-10
    # and the divergence is onto P_p
    assert np.linalg.matrix_rank(coef, tol=1e-8) == len(monomial_exponents(p))


@pytest.mark.parametrize("p", range(4))
def test_rt_interpolation_reproduces_rt(p, rng):
    vb = build_vector_basis(p)
    c = rng.standard_normal(vb.dim)
    field = lambda q: np.einsum("qia,i->qa", vb.evaluate(q)[0], c)
    np.testing.assert_allclose(vb.apply_dofs(field), c, atol=1e-10)


def test_rt0_constant_divergence():
    vb = build_vector_basis(0)
    _, divs = vb.evaluate(PTS)
    np.testing.assert_allclose(divs, np.broadcast_to(divs[0], divs.shape), atol=1e-13)


@pytest.mark.parametrize("bad", [-1, 4])
def test_vector_rejects(bad):
    with pytest.raises(ValueError):
        build_vector_basis(bad)


@pytest.mark.parametrize("bad", [0, 5])
def test_scalar_rejects(bad):
    with pytest.raises(ValueError):
        build_scalar_basis(bad)


def test_cellmap_geometry():
    v = np.array([[0.25, 0.5], [0.5, 0.5], [0.5, 0.75]])
    cm = CellMap.from_vertices(v)
    assert cm.det[0] == pytest.approx(2 * 0.5 * 0.25**2)
    np.testing.assert_allclose(cm.inv_t[0], np.linalg.inv(cm.jac[0]).T)
    np.testing.assert_allclose(cm.to_physical(np.eye(2))[0], v[1:])
    with pytest.raises(ValueError):
        CellMap.from_vertices(v[::-1])
    with pytest.raises(ValueError):
        CellMap.from_vertices([[0, 0], [1, 1], [2, 2]])


def test_map_scalar():
    sb = build_scalar_basis(2)
    vals, grads = sb.evaluate(PTS[:5])
    v1, g1 = map_scalar(CellMap.from_jacobian(np.eye(2)), vals, grads)
    np.testing.assert_allclose(g1[0], grads)
    h = 0.125
    v2, g2 = map_scalar(CellMap.from_jacobian(h * np.eye(2)), vals, grads)
    np.testing.assert_allclose(v2[0], vals)
    np.testing.assert_allclose(g2[0], grads / h)
    const = vals.sum(1)
    _, gc = map_scalar(CellMap.from_jacobian([[1.0, 0.3], [-0.2, 0.7]]), const, grads.sum(1)[:, None])
    np.testing.assert_allclose(gc, 0.0, atol=1e-12)


def test_map_vector_piola_scaling():
    vb = build_vector_basis(1)
    vals, divs = vb.evaluate(PTS[:5])
    v1, d1 = map_vector_piola(CellMap.from_jacobian(np.eye(2)), vals, divs)
    np.testing.assert_allclose(v1[0], vals)
    np.testing.assert_allclose(d1[0], divs)
    v2, d2 = map_vector_piola(CellMap.from_jacobian(2 * np.eye(2)), vals, divs)
    np.testing.assert_allclose(v2[0], vals / 2)
    np.testing.assert_allclose(d2[0], divs / 4)


def test_piola_preserves_edge_flux():
    vb = build_vector_basis(0)
    cm = CellMap.from_vertices([[0.1, 0.2], [0.6, 0.3], [0.3, 0.9]])
    er = edge_rule(4)
    phys = cm.vertices[0]
    for k, (a, b) in enumerate(((1, 2), (2, 0), (0, 1))):
        ref_vals, ref_divs = vb.evaluate(edge_points(k, er.points))
        ref_flux = er.weights @ (ref_vals @ edge_scaled_normal(k))
        vals, _ = map_vector_piola(cm, ref_vals, ref_divs)
        t = phys[b] - phys[a]
        # |e| ds-weights times the unit normal equals the rotated tangent
        phys_flux = er.weights @ (vals[0] @ np.array([t[1], -t[0]]))
        np.testing.assert_allclose(phys_flux, ref_flux, atol=1e-12)
