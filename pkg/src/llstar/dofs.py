"""Global numbering for the product space Sigma_p x V_{p+1}.

The coefficient vector stores the Raviart-Thomas block first (edge moments,
then cell-interior moments) followed by the constrained Lagrange block.
Global RT functions are scaled to unit mean normal trace (edge dofs by the
edge length, interior dofs by sqrt(det J)); this keeps both blocks of the
stiffness matrix O(1) under refinement without changing the discrete space.
Lagrange nodes on the boundary are never numbered, which makes lambda = 0 on
the boundary an exact property of the space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .mesh import Mesh, interior_vertex_mask
from .quadrature import QuadRule
from .reference import (
    MAX_RT_ORDER,
    CellMap,
    ScalarBasis,
    VectorBasis,
    build_scalar_basis,
    build_vector_basis,
    map_scalar,
    map_vector_piola,
)

BOUNDARY = -1


@dataclass(frozen=True, eq=False)
class DofSpace:
    p: int
    mesh: Mesh
    n_rt: int
    n_lag: int
    rt_gather: np.ndarray  # (T, dim RT_p) global index
    rt_sign: np.ndarray  # (T, dim RT_p) +1 / -1
    rt_scale: np.ndarray  # (T, dim RT_p) size factor of the global function
    lag_gather: np.ndarray  # (T, dim P_{p+1}) global index or BOUNDARY
    vector_basis: VectorBasis = field(repr=False)
    scalar_basis: ScalarBasis = field(repr=False)

    @property
    def n_total(self) -> int:
        return self.n_rt + self.n_lag

    @cached_property
    def rt_factor(self) -> np.ndarray:
        """Global RT function restricted to a cell = rt_factor * local function."""
        return self.rt_sign * self.rt_scale

    @cached_property
    def cells(self) -> CellMap:
        return CellMap.from_vertices(self.mesh.vertices[self.mesh.triangles])

    def local_coefficients(self, coeffs):
        """Per-cell coefficients matching the columns of a :class:`Tabulation`."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.n_total,):
            raise ValueError(f"expected {self.n_total} coefficients, got shape {coeffs.shape}")
        rt = coeffs[self.rt_gather]
        padded = np.append(coeffs, 0.0)  # BOUNDARY = -1 picks the trailing zero
        lag = padded[self.lag_gather]
        return rt, lag


def build_dof_space(mesh: Mesh, p: int) -> DofSpace:
    if not 0 <= p <= MAX_RT_ORDER:
        raise ValueError(f"p must lie in [0, {MAX_RT_ORDER}], got {p}")
    vb = build_vector_basis(p)
    sb = build_scalar_basis(p + 1)
    T = mesh.n_triangles
    E = mesh.n_edges
    te = mesh.triangle_edges
    ts = mesh.triangle_edge_signs

    # Raviart-Thomas block.  A local edge traversed against the canonical
    # direction flips the normal (-1) and reverses the Legendre parameter,
    # which multiplies moment j by (-1)**j.
    n_edge_rt = p + 1
    n_int_rt = p * (p + 1)
    rt_gather = np.empty((T, vb.dim), dtype=np.int64)
    rt_sign = np.empty((T, vb.dim), dtype=np.int64)
    rt_scale = np.empty((T, vb.dim))
    ev = mesh.vertices[mesh.edges]
    edge_len = np.hypot(*(ev[:, 1] - ev[:, 0]).T)
    for k in range(3):
        for j, loc in enumerate(vb.edge_dofs[k]):
            rt_gather[:, loc] = te[:, k] * n_edge_rt + j
            rt_sign[:, loc] = ts[:, k] ** (j + 1)
            rt_scale[:, loc] = edge_len[te[:, k]]
    base = E * n_edge_rt
    cell_size = np.sqrt(2.0 * mesh.signed_areas())
    for i, loc in enumerate(vb.interior_dofs):
        rt_gather[:, loc] = base + np.arange(T) * n_int_rt + i
        rt_sign[:, loc] = 1
        rt_scale[:, loc] = cell_size
    n_rt = base + T * n_int_rt

    # Lagrange block, numbered vertices -> edges -> cells.
    n_edge_lag = p
    n_int_lag = p * (p - 1) // 2
    vmask = interior_vertex_mask(mesh)
    vid = np.full(mesh.n_vertices, BOUNDARY, dtype=np.int64)
    vid[vmask] = np.arange(vmask.sum())
    offset = int(vmask.sum())
    emask = ~mesh.boundary_edge_flags
    eid = np.full(E, BOUNDARY, dtype=np.int64)
    eid[emask] = offset + np.arange(emask.sum()) * n_edge_lag
    offset += int(emask.sum()) * n_edge_lag

    lag_gather = np.empty((T, sb.dim), dtype=np.int64)
    for k, loc in enumerate(sb.vertex_dofs):
        lag_gather[:, loc] = vid[mesh.triangles[:, k]]
    for k in range(3):
        first = eid[te[:, k]]
        forward = ts[:, k] > 0
        for i, loc in enumerate(sb.edge_dofs[k]):
            pos = np.where(forward, i, n_edge_lag - 1 - i)
            lag_gather[:, loc] = np.where(first == BOUNDARY, BOUNDARY, first + pos)
    for i, loc in enumerate(sb.interior_dofs):
        lag_gather[:, loc] = offset + np.arange(T) * n_int_lag + i
    n_lag = offset + T * n_int_lag

    lag_gather = np.where(lag_gather == BOUNDARY, BOUNDARY, lag_gather + n_rt)
    for a in (rt_gather, rt_sign, rt_scale, lag_gather):
        a.setflags(write=False)
    return DofSpace(p, mesh, n_rt, n_lag, rt_gather, rt_sign, rt_scale, lag_gather, vb, sb)


@dataclass(frozen=True, eq=False)
class Tabulation:
    """Physical basis values at quadrature points of every cell.

    RT values already include the global orientation sign and scale, so
    column i of a cell is the restriction of global basis member
    ``rt_gather[cell, i]``.
    """

    points: np.ndarray  # (T, nq, 2)
    wdet: np.ndarray  # (T, nq) quadrature weight times |det J|
    zeta: np.ndarray  # (T, nq, nrt, 2)
    div: np.ndarray  # (T, nq, nrt)
    lam: np.ndarray  # (T, nq, nlag)
    grad: np.ndarray  # (T, nq, nlag, 2)


def tabulate(space: DofSpace, ref_points, weights=None, cells=None) -> Tabulation:
    cm = space.cells
    sel = slice(None) if cells is None else np.asarray(cells)
    if cells is not None:
        cm = CellMap(cm.vertices[sel], cm.jac[sel], cm.det[sel], cm.inv_t[sel])
    ref_points = np.atleast_2d(ref_points)
    rv, rd = space.vector_basis.evaluate(ref_points)
    sv, sg = space.scalar_basis.evaluate(ref_points)
    zeta, div = map_vector_piola(cm, rv, rd)
    lam, grad = map_scalar(cm, sv, sg)
    factor = space.rt_factor[sel]
    zeta = zeta * factor[:, None, :, None]
    div = div * factor[:, None, :]
    w = np.ones(len(ref_points)) if weights is None else np.asarray(weights)
    wdet = cm.det[:, None] * w[None, :]
    return Tabulation(cm.to_physical(ref_points), wdet, zeta, div, lam, grad)


def tabulate_rule(space: DofSpace, rule: QuadRule) -> Tabulation:
    return tabulate(space, rule.points, rule.weights)


def evaluate_field(space: DofSpace, coeffs, cell, ref_point):
    """Evaluate (zeta, div zeta, lambda, grad lambda) of a discrete pair.

    ``cell`` may be an index or an array of indices and ``ref_point`` a single
    reference point or an (npts, 2) array; outputs have shape
    (ncell, npts, ...), with scalar inputs squeezed away.
    """
    scalar_cell = np.ndim(cell) == 0
    scalar_point = np.ndim(ref_point) == 1
    cells = np.atleast_1d(cell)
    if np.any((cells < 0) | (cells >= space.mesh.n_triangles)):
        raise IndexError("cell index out of range")
    rt, lag = space.local_coefficients(coeffs)
    tab = tabulate(space, np.atleast_2d(ref_point), cells=cells)
    zeta = np.einsum("cqia,ci->cqa", tab.zeta, rt[cells])
    div = np.einsum("cqi,ci->cq", tab.div, rt[cells])
    lam = np.einsum("cqi,ci->cq", tab.lam, lag[cells])
    grad = np.einsum("cqia,ci->cqa", tab.grad, lag[cells])
    out = [zeta, div, lam, grad]
    if scalar_point:
        out = [a[:, 0] for a in out]
    if scalar_cell:
        out = [a[0] for a in out]
    return tuple(out)


def interpolate(space: DofSpace, zeta=None, lam=None) -> np.ndarray:
    """Moment interpolant of ``zeta`` and nodal interpolant of ``lam``.

    Field callables take coordinate arrays ``(x, y)``; ``zeta`` returns a
    trailing axis of length 2.  Lagrange values at boundary nodes are dropped.
    """
    coeffs = np.zeros(space.n_total)
    cm = space.cells
    if zeta is not None:
        adj_t = cm.inv_t * cm.det[:, None, None]  # (det J) J^{-T}

        def pulled_back(ref_points):
            x = cm.to_physical(ref_points)
            tau = np.asarray(zeta(x[..., 0], x[..., 1]))
            return np.einsum("cji,cqj->cqi", adj_t, tau)

        local = space.vector_basis.apply_dofs(pulled_back)
        coeffs[space.rt_gather] = local / space.rt_factor
    if lam is not None:
        x = cm.to_physical(space.scalar_basis.nodes)
        vals = np.asarray(lam(x[..., 0], x[..., 1]), dtype=float)
        keep = space.lag_gather != BOUNDARY
        coeffs[space.lag_gather[keep]] = vals[keep]
    return coeffs
