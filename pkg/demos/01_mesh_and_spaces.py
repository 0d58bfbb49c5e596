"""Mesh, orientation and the discrete product space.

Builds the h = 1/4 mesh, prints entity counts, shows how a shared edge is
seen from its two triangles, and counts degrees of freedom of
RT_p x P_{p+1} for every supported p.

    python demos/01_mesh_and_spaces.py
"""

import numpy as np

from llstar import build_dof_space, build_uniform_mesh, edge_unit_normal, evaluate_field
from llstar.reference import edge_points

mesh = build_uniform_mesh(2)
print(f"level 2: h = {mesh.h}, V = {mesh.n_vertices}, E = {mesh.n_edges}, T = {mesh.n_triangles}")
print(f"Euler: V - E + T = {mesh.n_vertices - mesh.n_edges + mesh.n_triangles}")
print(f"boundary edges: {mesh.boundary_edge_flags.sum()}")

# An interior diagonal: one neighbour sees the canonical normal as outward, the other inward.
e = next(i for i, tris in enumerate(mesh.edge_triangles()) if len(tris) == 2
         and np.all(np.diff(mesh.vertices[mesh.edges[i]], axis=0) != 0))
a, b = mesh.edges[e]
print(f"\nedge {e}: vertices {a} -> {b}, unit normal {edge_unit_normal(mesh, e)}")
for t in mesh.edge_triangles()[e]:
    k = int(np.flatnonzero(mesh.triangle_edges[t] == e)[0])
    print(f"  triangle {t} {mesh.triangles[t]}: local edge {k}, sign {mesh.triangle_edge_signs[t, k]:+d}")

print("\n p   n_rt  n_lag  n_total")
for p in range(4):
    s = build_dof_space(mesh, p)
    print(f"{p:2d} {s.n_rt:6d} {s.n_lag:6d} {s.n_total:8d}")

# A random coefficient vector still has a single-valued normal flux across e.
space = build_dof_space(mesh, 2)
coeffs = np.random.default_rng(1).standard_normal(space.n_total)
n = edge_unit_normal(mesh, e)
t = np.array([0.2, 0.5, 0.9])
fluxes = []
for tri in mesh.edge_triangles()[e]:
    k = int(np.flatnonzero(mesh.triangle_edges[tri] == e)[0])
    tt = t if mesh.triangle_edge_signs[tri, k] > 0 else 1 - t
    zeta = evaluate_field(space, coeffs, tri, edge_points(k, tt))[0]
    fluxes.append(zeta @ n)
print("\nnormal component from both sides (p=2, random coefficients):")
print(np.array(fluxes))
