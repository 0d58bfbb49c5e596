"""Linear solve, reconstruction (sigma, u) = L* Lambda, and error norms."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .assembly import ProblemCase, adjoint_apply, adjoint_images, local_to_global
from .dofs import BOUNDARY, DofSpace, evaluate_field, tabulate_rule
from .quadrature import load_degree, triangle_rule

log = logging.getLogger(__name__)

CG_RTOL = 1e-13
RESIDUAL_TOL = 1e-10
REFINEMENT_SWEEPS = 4


class SolverError(RuntimeError):
    """The system could not be solved; usually a loss of definiteness."""


class IndefiniteError(np.linalg.LinAlgError):
    """Symmetric elimination met a non-positive pivot."""


@dataclass(frozen=True, eq=False)
class SparseSystem:
    matrix: sps.spmatrix
    rhs: np.ndarray
    label: str = ""


@dataclass(frozen=True, eq=False)
class DiscreteSolution:
    coeffs: np.ndarray
    residual: float  # relative 2-norm residual (absolute when rhs == 0)
    method: str
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ErrorNorms:
    err_u: float
    err_sigma: float
    err_lambda_h1: Optional[float] = None
    err_zeta_hdiv: Optional[float] = None

    @property
    def err_solution(self) -> float:
        """L2 error of the full pair (sigma, u)."""
        return float(np.hypot(self.err_u, self.err_sigma))


def _cholesky(M: sps.csc_matrix):
    """Symmetric elimination without pivoting; fails unless every pivot is positive.

    With a symmetric fill-reducing ordering and pivoting disabled, the U
    factor of SuperLU holds the LDL^T pivots on its diagonal, which are the
    squared Cholesky pivots.
    """
    lu = spla.splu(
        M,
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=0.0,
        options={"SymmetricMode": True},
    )
    if not np.array_equal(lu.perm_r, lu.perm_c):
        raise np.linalg.LinAlgError("row pivoting occurred")
    pivots = lu.U.diagonal()
    if not np.all(pivots > 0):
        raise IndefiniteError(f"non-positive pivot {pivots.min():.3e}")
    return lu, float(pivots.min()), float(pivots.max())


def solve(system: SparseSystem) -> DiscreteSolution:
    """Direct sparse factorization, falling back to Jacobi-preconditioned CG."""
    M = sps.csc_matrix(system.matrix)
    rhs = np.asarray(system.rhs, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or rhs.shape != (n,):
        raise ValueError(f"shape mismatch: matrix {M.shape}, rhs {rhs.shape}")
    if n == 0:
        return DiscreteSolution(np.zeros(0), 0.0, "empty")

    rnorm = np.linalg.norm(rhs)
    scale = rnorm if rnorm > 0 else 1.0
    info: dict = {}
    try:
        lu, pmin, pmax = _cholesky(M)
    except IndefiniteError as exc:
        raise SolverError(f"system {system.label!r} is not positive definite: {exc}") from exc
    except (RuntimeError, MemoryError, np.linalg.LinAlgError) as exc:
        lu, fallback_reason = None, exc
    if lu is not None:
        x = lu.solve(rhs)
        # a few refinement sweeps recover digits lost to the h^-2 conditioning
        for sweep in range(REFINEMENT_SWEEPS):
            r = rhs - M @ x
            if np.linalg.norm(r) <= 1e-3 * RESIDUAL_TOL * scale:
                break
            x = x + lu.solve(r)
        info["refinement_sweeps"] = sweep
        method = "cholesky"
        info.update(pivot_min=pmin, pivot_max=pmax, nnz_factor=lu.L.nnz + lu.U.nnz)
    else:
        exc = fallback_reason
        log.warning("factorization failed for %s (%s); falling back to CG", system.label, exc)
        d = M.diagonal()
        if np.any(d <= 0):
            raise SolverError(f"non-positive diagonal in system {system.label!r}") from exc
        jacobi = spla.LinearOperator((n, n), matvec=lambda r: r / d, dtype=float)
        x, flag = spla.cg(M, rhs, rtol=CG_RTOL, atol=0.0, maxiter=20 * n, M=jacobi)
        if flag != 0:
            raise SolverError(
                f"CG did not converge for system {system.label!r} (flag {flag})"
            ) from exc
        method = "cg"
        info["fallback_reason"] = str(exc)

    res = float(np.linalg.norm(rhs - M @ x) / scale)
    if res > RESIDUAL_TOL:
        raise SolverError(f"residual {res:.3e} too large for system {system.label!r}")
    return DiscreteSolution(x, res, method, info)


def reconstruct(case: ProblemCase, space: DofSpace, sol, cell, ref_point):
    """(sigma, u) = L* (zeta_hp, lambda_hp) at reference points of cells."""
    coeffs = sol.coeffs if isinstance(sol, DiscreteSolution) else sol
    zeta, div, lam, grad = evaluate_field(space, coeffs, cell, ref_point)
    return adjoint_apply(case, zeta, div, lam, grad)


def _discrete_fields(space: DofSpace, coeffs, degree: int):
    rule = triangle_rule(degree)
    tab = tabulate_rule(space, rule)
    rt, lag = space.local_coefficients(coeffs)
    zeta = np.einsum("cqia,ci->cqa", tab.zeta, rt)
    div = np.einsum("cqi,ci->cq", tab.div, rt)
    lam = np.einsum("cqi,ci->cq", tab.lam, lag)
    grad = np.einsum("cqia,ci->cqa", tab.grad, lag)
    return tab, zeta, div, lam, grad


def _l2(diff, wdet) -> float:
    sq = diff**2 if diff.ndim == wdet.ndim else np.sum(diff**2, axis=-1)
    # cellwise sums, then a fixed-order reduction over cells
    return float(np.sqrt(np.sum(np.sum(sq * wdet, axis=1))))


def error_norms(
    case: ProblemCase, space: DofSpace, sol, quad_degree: Optional[int] = None
) -> ErrorNorms:
    if case.u_exact is None or case.sigma_exact is None:
        raise ValueError(f"case {case.name!r} lacks u_exact / sigma_exact")
    coeffs = sol.coeffs if isinstance(sol, DiscreteSolution) else sol
    degree = load_degree(space.p) if quad_degree is None else quad_degree
    tab, zeta, div, lam, grad = _discrete_fields(space, coeffs, degree)
    x, y = tab.points[..., 0], tab.points[..., 1]
    sigma_h, u_h = adjoint_apply(case, zeta, div, lam, grad)

    err_u = _l2(case.u_exact(x, y) - u_h, tab.wdet)
    err_sigma = _l2(case.sigma_exact(x, y) - sigma_h, tab.wdet)

    err_lam = None
    if case.lambda_exact is not None and case.lambda_grad_exact is not None:
        e0 = _l2(case.lambda_exact(x, y) - lam, tab.wdet)
        e1 = _l2(case.lambda_grad_exact(x, y) - grad, tab.wdet)
        err_lam = float(np.hypot(e0, e1))
    err_zeta = None
    if case.zeta_exact is not None and case.zeta_div_exact is not None:
        e0 = _l2(case.zeta_exact(x, y) - zeta, tab.wdet)
        e1 = _l2(case.zeta_div_exact(x, y) - div, tab.wdet)
        err_zeta = float(np.hypot(e0, e1))
    return ErrorNorms(err_u, err_sigma, err_lam, err_zeta)


def energy_error(
    case: ProblemCase, space: DofSpace, coeffs, quad_degree: Optional[int] = None
) -> float:
    """||L*(Lambda_exact - Lambda_h)||_{L2} for cases with a known multiplier."""
    fields = (case.zeta_exact, case.zeta_div_exact, case.lambda_exact, case.lambda_grad_exact)
    if any(f is None for f in fields):
        raise ValueError(f"case {case.name!r} has no closed-form multiplier")
    degree = load_degree(space.p) if quad_degree is None else quad_degree
    tab, zeta, div, lam, grad = _discrete_fields(space, coeffs, degree)
    x, y = tab.points[..., 0], tab.points[..., 1]
    dvec, dscal = adjoint_apply(
        case,
        case.zeta_exact(x, y) - zeta,
        case.zeta_div_exact(x, y) - div,
        case.lambda_exact(x, y) - lam,
        case.lambda_grad_exact(x, y) - grad,
    )
    return float(np.hypot(_l2(dvec, tab.wdet), _l2(dscal, tab.wdet)))


def mixed_residual(
    case: ProblemCase, space: DofSpace, sol, rhs, quad_degree: Optional[int] = None
) -> np.ndarray:
    """Vector ((sigma_hp, u_hp), L* V_i) - F(V_i) over the global basis.

    Evaluated matrix-free from the reconstructed pair, so it checks the
    second equation of the discrete mixed system independently of the
    assembled matrix.
    """
    coeffs = sol.coeffs if isinstance(sol, DiscreteSolution) else sol
    degree = load_degree(space.p) if quad_degree is None else quad_degree
    tab, zeta, div, lam, grad = _discrete_fields(space, coeffs, degree)
    sigma_h, u_h = adjoint_apply(case, zeta, div, lam, grad)
    U = np.concatenate([sigma_h, u_h[..., None]], axis=-1)  # (T, nq, 3)
    B = adjoint_images(case, tab)
    local = np.einsum("cqa,cqia,cq->ci", U, B, tab.wdet)
    gmap = local_to_global(space)
    keep = gmap != BOUNDARY
    out = np.zeros(space.n_total)
    np.add.at(out, gmap[keep], local[keep])
    return out - np.asarray(rhs)
