"""Invariant checks run by ``llstar verify``.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
invariant, so the whole suite always reports.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import factorial

import numpy as np

from .assembly import assemble_load, assemble_stiffness
from .dofs import build_dof_space, evaluate_field
from .mesh import build_uniform_mesh
from .quadrature import MAX_EDGE_POINTS, MAX_TRIANGLE_DEGREE, edge_rule, stiffness_degree, triangle_rule
from .reference import (
    build_scalar_basis,
    build_vector_basis,
    edge_points,
    monomial_exponents,
)
from .solve import SolverError, SparseSystem, _cholesky, mixed_residual, solve
from .study import builtin_case


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def triangle_moment(a: int, b: int) -> float:
    """Exact integral of x^a y^b over the reference triangle."""
    return factorial(a) * factorial(b) / factorial(a + b + 2)


def check_mesh(levels=range(0, 6)) -> CheckResult:
    bad = []
    for n in levels:
        m = build_uniform_mesh(n)
        V, E, T = m.n_vertices, m.n_edges, m.n_triangles
        counts_ok = (V, E, T) == ((2**n + 1) ** 2, 3 * 4**n + 2 * 2**n, 2 * 4**n)
        euler_ok = V - E + T == 1
        area_ok = np.allclose(m.signed_areas(), m.h**2 / 2, rtol=0, atol=1e-15)
        bdry_ok = m.boundary_edge_flags.sum() == 4 * 2**n
        if not (counts_ok and euler_ok and area_ok and bdry_ok):
            bad.append(n)
    return CheckResult("mesh counts / Euler", not bad, f"levels {list(levels)}, failing {bad}")


def check_quadrature(tol=1e-13) -> CheckResult:
    worst = 0.0
    for d in range(1, MAX_TRIANGLE_DEGREE + 1):
        r = triangle_rule(d)
        x, y = r.points[:, 0], r.points[:, 1]
        for a, b in monomial_exponents(r.degree):
            worst = max(worst, abs(r.weights @ (x**a * y**b) - triangle_moment(a, b)))
    for n in range(1, MAX_EDGE_POINTS + 1):
        r = edge_rule(n)
        for k in range(r.degree + 1):
            worst = max(worst, abs(r.weights @ r.points**k - 1.0 / (k + 1)))
    return CheckResult("quadrature exactness", worst <= tol, f"max error {worst:.2e} (tol {tol:g})")


def check_bases(tol=1e-10) -> CheckResult:
    worst = 0.0
    pts = triangle_rule(8).points
    for p in range(4):
        vb = build_vector_basis(p)
        dual = vb.apply_dofs(lambda q: np.moveaxis(vb.evaluate(q)[0], 1, 0))
        worst = max(worst, np.abs(dual - np.eye(vb.dim)).max())
        sb = build_scalar_basis(p + 1)
        vals, grads = sb.evaluate(sb.nodes)
        worst = max(worst, np.abs(vals - np.eye(sb.dim)).max())
        vals, grads = sb.evaluate(pts)
        worst = max(worst, np.abs(vals.sum(1) - 1).max(), np.abs(grads.sum(1)).max())
    return CheckResult("basis duality / partition of unity", worst <= tol, f"max error {worst:.2e}")


def trace_jumps(space, coeffs, npts=4):
    """Max jumps of the normal RT trace, the Lagrange value and the RT tangent."""
    mesh = space.mesh
    t = (np.arange(npts) + 0.5) / npts
    normal = scalar = tangent = 0.0
    for e, tris in enumerate(mesh.edge_triangles()):
        if len(tris) != 2:
            continue
        a, b = mesh.edges[e]
        tv = mesh.vertices[b] - mesh.vertices[a]
        nv = np.array([tv[1], -tv[0]])
        side = []
        for tr in tris:
            k = int(np.flatnonzero(mesh.triangle_edges[tr] == e)[0])
            tt = t if mesh.triangle_edge_signs[tr, k] > 0 else 1.0 - t
            z, _, lam, _ = evaluate_field(space, coeffs, tr, edge_points(k, tt))
            side.append((z, lam))
        (z0, l0), (z1, l1) = side
        normal = max(normal, np.abs((z0 - z1) @ nv).max())
        scalar = max(scalar, np.abs(l0 - l1).max())
        tangent = max(tangent, np.abs((z0 - z1) @ tv).max())
    return normal, scalar, tangent


def check_continuity(tol=1e-10, seed=0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    tangent_min = np.inf
    for p in range(4):
        space = build_dof_space(build_uniform_mesh(2), p)
        c = rng.standard_normal(space.n_total)
        n, s, t = trace_jumps(space, c)
        worst = max(worst, n, s)
        tangent_min = min(tangent_min, t)
    ok = worst <= tol and tangent_min > 1e-3
    return CheckResult(
        "H(div) / C0 trace continuity",
        ok,
        f"max jump {worst:.2e}, min tangential jump {tangent_min:.2e}",
    )


def check_systems(sym_tol=1e-13, res_tol=1e-10, mixed_tol=1e-9) -> list[CheckResult]:
    sym = chol = res = mixed = 0.0
    chol_ok = True
    for case_id in ("case_i", "case_ii", "case_general"):
        case = builtin_case(case_id)
        for p in range(4):
            mesh = build_uniform_mesh(2)
            space = build_dof_space(mesh, p)
            M = assemble_stiffness(mesh, space, case)
            rhs = assemble_load(mesh, space, case)
            sym = max(sym, abs(M - M.T).max() / abs(M).max())
            try:
                _, pmin, _ = _cholesky(M.tocsc())
                chol = min(chol, pmin) if chol else pmin
            except (RuntimeError, np.linalg.LinAlgError):
                chol_ok = False
            try:
                sol = solve(SparseSystem(M, rhs, f"{case_id} p={p}"))
            except SolverError:
                res = np.inf
                continue
            res = max(res, sol.residual)
            r = mixed_residual(case, space, sol, rhs)
            mixed = max(mixed, np.linalg.norm(r) / np.linalg.norm(rhs))
    return [
        CheckResult("matrix symmetry", sym <= sym_tol, f"max relative asymmetry {sym:.2e}"),
        CheckResult("Cholesky", chol_ok, f"smallest pivot {chol:.3e}"),
        CheckResult("algebraic residual", res <= res_tol, f"max relative residual {res:.2e}"),
        CheckResult(
            "mixed-system residual", mixed <= mixed_tol, f"max relative residual {mixed:.2e}"
        ),
    ]


def check_quadrature_independence(tol=1e-12) -> CheckResult:
    worst = 0.0
    case = builtin_case("case_i")
    for p in range(4):
        mesh = build_uniform_mesh(0)
        space = build_dof_space(mesh, p)
        a = assemble_stiffness(mesh, space, case).toarray()
        b = assemble_stiffness(mesh, space, case, quad_degree=stiffness_degree(p) + 8).toarray()
        worst = max(worst, np.abs(a - b).max() / np.abs(a).max())
    return CheckResult("two-degree assembly agreement", worst <= tol, f"max difference {worst:.2e}")


def run_all() -> list[CheckResult]:
    results = [
        check_mesh(),
        check_quadrature(),
        check_bases(),
        check_continuity(),
        *check_systems(),
        check_quadrature_independence(),
    ]
    return results


def main() -> int:
    t0 = time.perf_counter()
    results = run_all()
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed "
          f"in {time.perf_counter() - t0:.1f}s")
    return 0 if ok else 2
