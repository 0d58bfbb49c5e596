"""Structured triangulations of the unit square.

Each of the ``4**level`` squares is cut along its SW-NE diagonal into two
counterclockwise right triangles.  Edges carry a canonical direction from the
lower to the higher global vertex index; every H(div) sign in the package is
derived from that single rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Local edge k is opposite local vertex k and is traversed counterclockwise.
LOCAL_EDGES = ((1, 2), (2, 0), (0, 1))


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation with edge connectivity.

    Attributes
    ----------
    level : int
        Refinement level ``n``; the mesh has ``2**n`` squares per side.
    vertices : (V, 2) float array
        Coordinates, row-major ``i + j*(2**n + 1)``.
    edges : (E, 2) int array
        Vertex pairs sorted low -> high.
    triangles : (T, 3) int array
        Counterclockwise vertex triples.
    triangle_edges : (T, 3) int array
        Global edge index of local edge k (opposite local vertex k).
    triangle_edge_signs : (T, 3) int array
        +1 when the canonical edge normal points out of the triangle, else -1.
    boundary_edge_flags : (E,) bool array
    """

    level: int
    vertices: np.ndarray
    edges: np.ndarray
    triangles: np.ndarray
    triangle_edges: np.ndarray
    triangle_edge_signs: np.ndarray
    boundary_edge_flags: np.ndarray

    @property
    def h(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_triangles(self) -> list[list[int]]:
        """Incident triangles of every edge, in increasing triangle order."""
        out: list[list[int]] = [[] for _ in range(self.n_edges)]
        for t, row in enumerate(self.triangle_edges):
            for e in row:
                out[e].append(t)
        return out

    def to_text(self) -> str:
        """Plain-text listing of the vertex, edge and triangle tables."""
        lines = [f"# level {self.level}  h {self.h:.16g}", f"vertices {self.n_vertices}"]
        lines += [f"{i} {x:.16g} {y:.16g}" for i, (x, y) in enumerate(self.vertices)]
        lines.append(f"edges {self.n_edges}")
        lines += [
            f"{i} {a} {b} {int(bd)}"
            for i, ((a, b), bd) in enumerate(zip(self.edges, self.boundary_edge_flags))
        ]
        lines.append(f"triangles {self.n_triangles}")
        for i, (tri, te, ts) in enumerate(
            zip(self.triangles, self.triangle_edges, self.triangle_edge_signs)
        ):
            edge_str = " ".join(f"{e}{'+' if s > 0 else '-'}" for e, s in zip(te, ts))
            lines.append(f"{i} {tri[0]} {tri[1]} {tri[2]} | {edge_str}")
        return "\n".join(lines) + "\n"


def build_uniform_mesh(level: int) -> Mesh:
    """Uniform SW-NE diagonal triangulation of [0, 1]^2 with ``h = 2**-level``."""
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)):
        raise TypeError(f"level must be an integer, got {level!r}")
    if level < 0:
        raise ValueError(f"level must be nonnegative, got {level}")
    level = int(level)
    n = 2**level
    m = n + 1

    # Dyadic coordinates i / n are exact in double precision.
    coords = np.arange(m, dtype=float) / n
    xx, yy = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    sw = (i + j * m).ravel()
    se = sw + 1
    nw = sw + m
    ne = nw + 1
    lower = np.column_stack([sw, se, ne])
    upper = np.column_stack([sw, ne, nw])
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)

    local = np.array(LOCAL_EDGES)
    starts = triangles[:, local[:, 0]]
    ends = triangles[:, local[:, 1]]
    pairs = np.stack([np.minimum(starts, ends), np.maximum(starts, ends)], axis=-1)
    edges, inverse, counts = np.unique(
        pairs.reshape(-1, 2), axis=0, return_inverse=True, return_counts=True
    )
    triangle_edges = inverse.reshape(-1, 3)
    signs = np.where(starts < ends, 1, -1)

    return Mesh(
        level=level,
        vertices=_frozen(vertices),
        edges=_frozen(edges.astype(np.int64)),
        triangles=_frozen(triangles.astype(np.int64)),
        triangle_edges=_frozen(triangle_edges.astype(np.int64)),
        triangle_edge_signs=_frozen(signs.astype(np.int64)),
        boundary_edge_flags=_frozen(counts == 1),
    )


def edge_unit_normal(mesh: Mesh, edge: int) -> np.ndarray:
    """Unit tangent of ``edge`` (low -> high vertex) rotated by -90 degrees."""
    if not 0 <= edge < mesh.n_edges:
        raise IndexError(f"edge {edge} out of range for mesh with {mesh.n_edges} edges")
    a, b = mesh.edges[edge]
    t = mesh.vertices[b] - mesh.vertices[a]
    t = t / np.hypot(t[0], t[1])
    return np.array([t[1], -t[0]])


def boundary_vertices(mesh: Mesh) -> set[int]:
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    on = (x == 0.0) | (x == 1.0) | (y == 0.0) | (y == 1.0)
    return set(np.flatnonzero(on).tolist())


def interior_vertex_mask(mesh: Mesh) -> np.ndarray:
    mask = np.ones(mesh.n_vertices, dtype=bool)
    mask[list(boundary_vertices(mesh))] = False
    return mask
