"""Gauss rules on the reference triangle and on the unit interval."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

MAX_TRIANGLE_DEGREE = 20
MAX_EDGE_POINTS = 10


@dataclass(frozen=True, eq=False)
class QuadRule:
    points: np.ndarray  # (nq, 2) on the triangle, (nq,) on the interval
    weights: np.ndarray
    degree: int

    def __len__(self) -> int:
        return len(self.weights)


def _gauss01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def triangle_rule(min_degree: int) -> QuadRule:
    """Collapsed-coordinate Gauss rule on (0,0), (1,0), (0,1).

    The Duffy map ``x = u, y = v (1 - u)`` turns a degree-k integrand into a
    polynomial of degree k + 1 in ``u`` (Jacobian ``1 - u``) and k in ``v``.
    """
    if not 1 <= min_degree <= MAX_TRIANGLE_DEGREE:
        raise ValueError(
            f"triangle rule degree must lie in [1, {MAX_TRIANGLE_DEGREE}], got {min_degree}"
        )
    if min_degree == 1:
        pts = np.array([[1.0 / 3.0, 1.0 / 3.0]])
        return _freeze(pts, np.array([0.5]), 1)

    n = (min_degree + 3) // 2  # 2n - 1 >= min_degree + 1
    t, w = _gauss01(n)
    u, v = np.meshgrid(t, t, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    x = u.ravel()
    y = (v * (1.0 - u)).ravel()
    weights = (wu * wv * (1.0 - u)).ravel()
    return _freeze(np.column_stack([x, y]), weights, 2 * n - 2)


@lru_cache(maxsize=None)
def edge_rule(npoints: int) -> QuadRule:
    """Gauss-Legendre on [0, 1], exact to degree ``2 * npoints - 1``."""
    if not 1 <= npoints <= MAX_EDGE_POINTS:
        raise ValueError(f"edge rule needs 1..{MAX_EDGE_POINTS} points, got {npoints}")
    t, w = _gauss01(npoints)
    return _freeze(t, w, 2 * npoints - 1)


def edge_rule_for_degree(degree: int) -> QuadRule:
    return edge_rule(min(MAX_EDGE_POINTS, max(1, (degree + 2) // 2)))


def _freeze(points, weights, degree) -> QuadRule:
    points = np.ascontiguousarray(points, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadRule(points, weights, degree)


def stiffness_degree(p: int) -> int:
    return 2 * (p + 2)


def load_degree(p: int) -> int:
    return 2 * (p + 2) + 6
