"""Reference-triangle bases: Lagrange P_q and Raviart-Thomas RT_p.

Both families are built the same way: apply the degree-of-freedom functionals
to a monomial spanning set and invert the resulting generalized Vandermonde
matrix.  The reference triangle is (0,0), (1,0), (0,1); local edge k is opposite
vertex k and traversed counterclockwise, so rotating its tangent by -90 degrees
gives the outward normal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

from .mesh import LOCAL_EDGES
from .quadrature import edge_rule, triangle_rule

REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
MAX_RT_ORDER = 3
VANDERMONDE_COND_LIMIT = 1e8


class SingularBasisError(RuntimeError):
    """The degree-of-freedom functionals do not determine a basis."""


def monomial_exponents(degree: int) -> list[tuple[int, int]]:
    """Exponents (a, b) of x^a y^b with a + b <= degree, graded order."""
    return [(t - b, b) for t in range(degree + 1) for b in range(t + 1)]


def eval_monomials(exps, points):
    """Values and first derivatives of monomials at points.

    Returns arrays of shape (npts, nmono) for the values, d/dx and d/dy.
    """
    pts = np.atleast_2d(points)
    x = pts[:, 0:1]
    y = pts[:, 1:2]
    a = np.array([e[0] for e in exps])
    b = np.array([e[1] for e in exps])
    val = x**a * y**b
    dx = np.where(a > 0, a * x ** np.maximum(a - 1, 0), 0.0) * y**b
    dy = x**a * np.where(b > 0, b * y ** np.maximum(b - 1, 0), 0.0)
    return val, dx, dy


def edge_points(k: int, t) -> np.ndarray:
    """Points of local edge k at parameter t in [0, 1] (counterclockwise)."""
    a, b = LOCAL_EDGES[k]
    t = np.asarray(t, dtype=float)[:, None]
    return REF_VERTICES[a] + t * (REF_VERTICES[b] - REF_VERTICES[a])


def edge_scaled_normal(k: int) -> np.ndarray:
    """Outward normal of local edge k scaled by the edge length."""
    a, b = LOCAL_EDGES[k]
    t = REF_VERTICES[b] - REF_VERTICES[a]
    return np.array([t[1], -t[0]])


def shifted_legendre(k: int, t) -> np.ndarray:
    """Legendre polynomial of degree k on [0, 1], normalized in L2(0, 1)."""
    c = np.zeros(k + 1)
    c[k] = np.sqrt(2 * k + 1)
    return legendre.legval(2.0 * np.asarray(t) - 1.0, c)


@lru_cache(maxsize=None)
def orthonormal_weights(degree: int) -> np.ndarray:
    """Coefficients W with (monomials @ W) orthonormal in L2 of the reference cell.

    Same span as the monomials of degree <= ``degree``; keeps the dual RT
    basis well scaled.
    """
    rule = triangle_rule(max(1, 2 * degree))
    mono, _, _ = eval_monomials(monomial_exponents(degree), rule.points)
    gram = (mono * rule.weights[:, None]).T @ mono
    chol = np.linalg.cholesky(gram)
    w = np.linalg.inv(chol).T
    w.setflags(write=False)
    return w


@dataclass(frozen=True, eq=False)
class ScalarBasis:
    """Nodal Lagrange basis of degree ``degree`` on the reference triangle.

    Nodes are the equispaced lattice, ordered as: the three vertices, then the
    ``degree - 1`` interior nodes of each local edge in traversal order, then
    the cell-interior nodes.
    """

    degree: int
    nodes: np.ndarray
    vertex_dofs: tuple[int, ...]
    edge_dofs: tuple[tuple[int, ...], ...]
    interior_dofs: tuple[int, ...]
    coeffs: np.ndarray  # (nmono, dim): basis_i = sum_m coeffs[m, i] * mono_m

    @property
    def dim(self) -> int:
        return len(self.nodes)

    def evaluate(self, points):
        """Return values (npts, dim) and gradients (npts, dim, 2)."""
        val, dx, dy = eval_monomials(monomial_exponents(self.degree), points)
        grads = np.stack([dx @ self.coeffs, dy @ self.coeffs], axis=-1)
        return val @ self.coeffs, grads


@dataclass(frozen=True, eq=False)
class VectorBasis:
    """Raviart-Thomas basis RT_p = P_p^2 + x P_p dual to moment functionals.

    Edge dof (k, j) is the normal flux on local edge k weighted by the shifted
    Legendre polynomial of degree j in the traversal parameter.  Interior dofs
    are moments against (q, 0) and (0, q), with q running over an orthonormal
    basis of P_{p-1} obtained from the monomials.
    """

    order: int
    edge_dofs: tuple[tuple[int, ...], ...]
    interior_dofs: tuple[int, ...]
    coeffs_x: np.ndarray  # (nmono of degree p+1, dim)
    coeffs_y: np.ndarray
    vandermonde_cond: float

    @property
    def dim(self) -> int:
        return self.coeffs_x.shape[1]

    def evaluate(self, points):
        """Return values (npts, dim, 2) and divergences (npts, dim)."""
        val, dx, dy = eval_monomials(monomial_exponents(self.order + 1), points)
        vals = np.stack([val @ self.coeffs_x, val @ self.coeffs_y], axis=-1)
        divs = dx @ self.coeffs_x + dy @ self.coeffs_y
        return vals, divs

    def apply_dofs(self, field) -> np.ndarray:
        """Apply every dof functional to a vector field given on the reference cell.

        ``field(points)`` must return an array of shape (..., npts, 2); leading
        axes (for instance one per cell) are carried through.
        """
        return _rt_functionals(self.order, field)


def _rt_functionals(p: int, field) -> np.ndarray:
    er = edge_rule(p + 2)
    out = []
    for k in range(3):
        vals = field(edge_points(k, er.points))
        flux = vals @ edge_scaled_normal(k)
        for j in range(p + 1):
            out.append(flux @ (er.weights * shifted_legendre(j, er.points)))
    if p > 0:
        tr = triangle_rule(max(1, 2 * p))
        vals = field(tr.points)
        mono, _, _ = eval_monomials(monomial_exponents(p - 1), tr.points)
        wm = (mono @ orthonormal_weights(p - 1)) * tr.weights[:, None]
        out.extend(np.moveaxis(vals[..., 0] @ wm, -1, 0))
        out.extend(np.moveaxis(vals[..., 1] @ wm, -1, 0))
    return np.stack(out, axis=-1)


@lru_cache(maxsize=None)
def build_scalar_basis(degree: int) -> ScalarBasis:
    if not 1 <= degree <= MAX_RT_ORDER + 1:
        raise ValueError(f"Lagrange degree must lie in [1, {MAX_RT_ORDER + 1}], got {degree}")
    q = degree
    nodes = [REF_VERTICES[i] for i in range(3)]
    edge_dofs = []
    t = np.arange(1, q) / q
    for k in range(3):
        start = len(nodes)
        nodes.extend(edge_points(k, t))
        edge_dofs.append(tuple(range(start, len(nodes))))
    start = len(nodes)
    for j in range(1, q):
        for i in range(1, q - j):
            nodes.append(np.array([i / q, j / q]))
    interior = tuple(range(start, len(nodes)))
    nodes = np.array(nodes)

    vdm, _, _ = eval_monomials(monomial_exponents(q), nodes)
    cond = np.linalg.cond(vdm)
    if cond > VANDERMONDE_COND_LIMIT:
        raise SingularBasisError(f"Lagrange Vandermonde of degree {q} has condition {cond:.3e}")
    coeffs = np.linalg.inv(vdm)
    for a in (nodes, coeffs):
        a.setflags(write=False)
    return ScalarBasis(q, nodes, (0, 1, 2), tuple(edge_dofs), interior, coeffs)


def _rt_spanning_set(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Monomial coefficients (nmono_{p+1}, dim) of a spanning set of RT_p."""
    exps = monomial_exponents(p + 1)
    index = {e: i for i, e in enumerate(exps)}
    cols_x, cols_y = [], []
    for a, b in monomial_exponents(p):
        e = np.zeros(len(exps))
        e[index[(a, b)]] = 1.0
        cols_x.append(e)
        cols_y.append(np.zeros(len(exps)))
    for a, b in monomial_exponents(p):
        e = np.zeros(len(exps))
        e[index[(a, b)]] = 1.0
        cols_x.append(np.zeros(len(exps)))
        cols_y.append(e)
    # x * (homogeneous degree-p monomial)
    for a, b in monomial_exponents(p):
        if a + b != p:
            continue
        ex = np.zeros(len(exps))
        ey = np.zeros(len(exps))
        ex[index[(a + 1, b)]] = 1.0
        ey[index[(a, b + 1)]] = 1.0
        cols_x.append(ex)
        cols_y.append(ey)
    return np.array(cols_x).T, np.array(cols_y).T


@lru_cache(maxsize=None)
def build_vector_basis(p: int) -> VectorBasis:
    if not 0 <= p <= MAX_RT_ORDER:
        raise ValueError(f"Raviart-Thomas order must lie in [0, {MAX_RT_ORDER}], got {p}")
    span_x, span_y = _rt_spanning_set(p)
    exps = monomial_exponents(p + 1)

    def span_field(points):
        val, _, _ = eval_monomials(exps, points)
        return np.stack([(val @ span_x).T, (val @ span_y).T], axis=-1)

    vdm = _rt_functionals(p, span_field)  # (nspan, ndof)
    vdm = vdm.T  # rows: functionals, columns: spanning members
    cond = np.linalg.cond(vdm)
    if not np.isfinite(cond) or cond > VANDERMONDE_COND_LIMIT:
        raise SingularBasisError(f"RT_{p} Vandermonde has condition {cond:.3e}")
    inv = np.linalg.inv(vdm)
    coeffs_x = span_x @ inv
    coeffs_y = span_y @ inv
    for a in (coeffs_x, coeffs_y):
        a.setflags(write=False)

    n_edge = p + 1
    edge_dofs = tuple(tuple(range(k * n_edge, (k + 1) * n_edge)) for k in range(3))
    interior = tuple(range(3 * n_edge, coeffs_x.shape[1]))
    return VectorBasis(p, edge_dofs, interior, coeffs_x, coeffs_y, float(cond))


@dataclass(frozen=True, eq=False)
class CellMap:
    """Affine maps x = v0 + J x_hat for a batch of triangles.

    Every array has a leading cell axis, so a single triangle is a batch of 1.
    """

    vertices: np.ndarray  # (ncell, 3, 2)
    jac: np.ndarray  # (ncell, 2, 2), columns v1 - v0 and v2 - v0
    det: np.ndarray  # (ncell,)
    inv_t: np.ndarray  # (ncell, 2, 2)

    @classmethod
    def from_vertices(cls, vertices) -> CellMap:
        v = np.asarray(vertices, dtype=float)
        if v.ndim == 2:
            v = v[None]
        jac = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=-1)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        if np.any(det <= 0.0):
            raise ValueError("degenerate or clockwise cell (det J <= 0)")
        inv_t = np.empty_like(jac)
        inv_t[:, 0, 0] = jac[:, 1, 1]
        inv_t[:, 0, 1] = -jac[:, 1, 0]
        inv_t[:, 1, 0] = -jac[:, 0, 1]
        inv_t[:, 1, 1] = jac[:, 0, 0]
        inv_t /= det[:, None, None]
        return cls(v, jac, det, inv_t)

    @classmethod
    def from_jacobian(cls, jac, origin=(0.0, 0.0)) -> CellMap:
        jac = np.asarray(jac, dtype=float)
        o = np.asarray(origin, dtype=float)
        return cls.from_vertices(np.array([o, o + jac[:, 0], o + jac[:, 1]]))

    def __len__(self) -> int:
        return len(self.det)

    def to_physical(self, ref_points) -> np.ndarray:
        """(ncell, npts, 2) physical images of reference points."""
        return self.vertices[:, None, 0, :] + np.einsum("cij,qj->cqi", self.jac, ref_points)


def map_scalar(cell: CellMap, ref_vals, ref_grads):
    """Affine pushforward: values unchanged, gradients J^{-T} grad_hat.

    ``ref_grads`` has shape (npts, dim, 2); results gain a leading cell axis.
    """
    vals = np.broadcast_to(ref_vals, (len(cell),) + np.shape(ref_vals))
    grads = np.einsum("cij,qnj->cqni", cell.inv_t, ref_grads)
    return vals, grads


def map_vector_piola(cell: CellMap, ref_vals, ref_divs):
    """Contravariant Piola pushforward: J v_hat / det J and div_hat / det J."""
    inv_det = 1.0 / cell.det
    vals = np.einsum("cij,qnj->cqni", cell.jac, ref_vals) * inv_det[:, None, None, None]
    divs = np.asarray(ref_divs)[None] * inv_det[:, None, None]
    return vals, divs
