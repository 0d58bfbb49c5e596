"""Stiffness matrix and load vector of the discrete LL* problem.

For a trial/test pair Lambda = (zeta, lam), V = (tau, v) the bilinear form is
(L* Lambda, L* V) with the pointwise adjoint

    L*(tau, v) = (A^{-1} tau - A^{-1} b v - grad v,  c v - div tau).

The load is (f, v) minus the boundary flux of the Dirichlet data,

    F(V) = (f, v) - \\oint u0 (tau . n) ds,

which comes from integrating (L u, V) by parts with u = u0 on the boundary
and v = 0 there.  Dropping the boundary integral makes every case with
u0 != 0 converge to the wrong solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sps
from scipy.io import mmwrite

from .dofs import BOUNDARY, DofSpace, Tabulation, tabulate_rule
from .mesh import Mesh
from .quadrature import edge_rule_for_degree, load_degree, stiffness_degree, triangle_rule
from .reference import build_vector_basis, edge_points, edge_scaled_normal

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ProblemCase:
    """Constant-coefficient problem -div(A grad u) + b.grad u + c u = f, u = u0.

    Vector-valued callables return a trailing axis of length 2.  Exact fields
    are optional and only used for error measurement.
    """

    A: np.ndarray
    b: np.ndarray
    c: float
    f: Field
    u0: Field
    name: str = "custom"
    u_exact: Optional[Field] = None
    sigma_exact: Optional[Field] = None
    lambda_exact: Optional[Field] = None
    lambda_grad_exact: Optional[Field] = None
    zeta_exact: Optional[Field] = None
    zeta_div_exact: Optional[Field] = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.shape != (2, 2) or not np.allclose(A, A.T, rtol=0, atol=1e-14):
            raise ValueError("A must be a symmetric 2x2 matrix")
        if np.any(np.linalg.eigvalsh(A) <= 0):
            raise ValueError("A must be positive definite")
        if b.shape != (2,):
            raise ValueError("b must be a 2-vector")
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def A_inv(self) -> np.ndarray:
        return np.linalg.inv(self.A)


def zero_field(x, y):
    return np.zeros_like(np.asarray(x, dtype=float))


def adjoint_apply(case: ProblemCase, tau, div_tau, v, grad_v):
    """Pointwise L*(tau, v); arrays broadcast, vectors on the trailing axis."""
    Ainv = case.A_inv
    tau = np.asarray(tau, dtype=float)
    grad_v = np.asarray(grad_v, dtype=float)
    v = np.asarray(v, dtype=float)
    vec = tau @ Ainv.T - v[..., None] * (Ainv @ case.b) - grad_v
    scal = case.c * v - np.asarray(div_tau, dtype=float)
    return vec, scal


def adjoint_images(case: ProblemCase, tab: Tabulation) -> np.ndarray:
    """L* of every local basis function: (T, nq, nrt + nlag, 3).

    Components are (vector x, vector y, scalar); RT columns come first.
    """
    Ainv = case.A_inv
    T, nq, nrt, _ = tab.zeta.shape
    nlag = tab.lam.shape[-1]
    out = np.empty((T, nq, nrt + nlag, 3))
    out[..., :nrt, :2] = tab.zeta @ Ainv.T
    out[..., :nrt, 2] = -tab.div
    out[..., nrt:, :2] = -tab.lam[..., None] * (Ainv @ case.b) - tab.grad
    out[..., nrt:, 2] = case.c * tab.lam
    return out


def local_to_global(space: DofSpace) -> np.ndarray:
    return np.concatenate([space.rt_gather, space.lag_gather], axis=1)


def assemble_stiffness(
    mesh: Mesh, space: DofSpace, case: ProblemCase, quad_degree: Optional[int] = None
) -> sps.csr_matrix:
    """Sparse SPD matrix with entries (L* Phi_j, L* Phi_i)."""
    if space.mesh is not mesh:
        raise ValueError("dof space was built on a different mesh")
    degree = stiffness_degree(space.p) if quad_degree is None else quad_degree
    # basis functions have degree <= p + 1, so the integrand has degree <= 2p + 2
    assert degree >= 2 * space.p + 2, "stiffness quadrature below integrand degree"
    tab = tabulate_rule(space, triangle_rule(degree))
    B = adjoint_images(case, tab)
    K = np.einsum("cqia,cqja,cq->cij", B, B, tab.wdet, optimize=True)
    return _scatter(space, K)


def _scatter(space: DofSpace, K: np.ndarray) -> sps.csr_matrix:
    gmap = local_to_global(space)
    rows = np.broadcast_to(gmap[:, :, None], K.shape)
    cols = np.broadcast_to(gmap[:, None, :], K.shape)
    keep = (rows != BOUNDARY) & (cols != BOUNDARY)
    n = space.n_total
    M = sps.coo_matrix((K[keep], (rows[keep], cols[keep])), shape=(n, n)).tocsr()
    M.sum_duplicates()
    M.sort_indices()
    return M


def assemble_load(
    mesh: Mesh,
    space: DofSpace,
    case: ProblemCase,
    quad_degree: Optional[int] = None,
    boundary_term: bool = True,
) -> np.ndarray:
    """Right-hand side F(V_i) = (f, v_i) - oint u0 (tau_i . n) ds.

    ``boundary_term=False`` drops the Dirichlet flux term; it exists only as a
    negative control.
    """
    if space.mesh is not mesh:
        raise ValueError("dof space was built on a different mesh")
    degree = load_degree(space.p) if quad_degree is None else quad_degree
    rhs = np.zeros(space.n_total)

    tab = tabulate_rule(space, triangle_rule(degree))
    fvals = np.asarray(case.f(tab.points[..., 0], tab.points[..., 1]), dtype=float)
    local = np.einsum("cq,cqi->ci", fvals * tab.wdet, tab.lam)
    keep = space.lag_gather != BOUNDARY
    np.add.at(rhs, space.lag_gather[keep], local[keep])

    if boundary_term:
        rhs += boundary_flux_load(space, case.u0, degree)
    return rhs


def boundary_flux_load(space: DofSpace, u0: Field, degree: int) -> np.ndarray:
    """Vector of -oint u0 (tau_i . n) ds over the boundary edges."""
    mesh = space.mesh
    vb = build_vector_basis(space.p)
    er = edge_rule_for_degree(degree)
    out = np.zeros(space.n_total)
    cm = space.cells
    for k in range(3):
        edges = mesh.triangle_edges[:, k]
        cells = np.flatnonzero(mesh.boundary_edge_flags[edges])
        if len(cells) == 0:
            continue
        ref = edge_points(k, er.points)
        vals, _ = vb.evaluate(ref)  # (nq, nrt, 2)
        # Piola: tau . n ds on the physical edge equals tau_hat . n_hat ds_hat
        flux = vals @ edge_scaled_normal(k)  # (nq, nrt)
        x = cm.vertices[cells, None, 0, :] + np.einsum("cij,qj->cqi", cm.jac[cells], ref)
        g = np.asarray(u0(x[..., 0], x[..., 1]), dtype=float)
        local = -np.einsum("cq,q,qi->ci", g, er.weights, flux)
        local *= space.rt_factor[cells]
        np.add.at(out, space.rt_gather[cells], local)
    return out


def to_matrix_market(path, matrix) -> None:
    mmwrite(str(path), sps.coo_matrix(matrix), precision=16)
