"""Quadrature on triangles, segments and convex polygons in physical coordinates."""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

# barycentric points and weights on a triangle of unit area
_TRIANGLE_TABLES = {
    1: (np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0])),
    2: (
        np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]),
        np.full(3, 1 / 3),
    ),
}

# Strang-Fix / Dunavant 6-point rule, degree 4, positive weights
_a = 0.44594849091596489
_b = 0.091576213509770743
_wa = 0.22338158967801147
_wb = 0.10995174365532187
_TRIANGLE_TABLES[4] = (
    np.array(
        [
            [_a, _a, 1 - 2 * _a],
            [_a, 1 - 2 * _a, _a],
            [1 - 2 * _a, _a, _a],
            [_b, _b, 1 - 2 * _b],
            [_b, 1 - 2 * _b, _b],
            [1 - 2 * _b, _b, _b],
        ]
    ),
    np.array([_wa, _wa, _wa, _wb, _wb, _wb]),
)
# the degree-3 request is served by the degree-4 rule; the classical
# 4-point degree-3 rule has a negative weight
_TRIANGLE_TABLES[3] = _TRIANGLE_TABLES[4]


@dataclass
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)

    def integrate(self, f):
        """Integrate a vectorized ``f(points) -> (n,) or (n, k)``."""
        if len(self.weights) == 0:
            return 0.0
        values = np.asarray(f(self.points), dtype=float)
        return np.tensordot(self.weights, values, axes=(0, 0))

    @classmethod
    def concatenate(cls, rules):
        rules = [r for r in rules if len(r)]
        if not rules:
            return cls(np.empty((0, 2)), np.empty(0))
        return cls(np.concatenate([r.points for r in rules]), np.concatenate([r.weights for r in rules]))


def _check_degree(degree, supported):
    if degree not in supported:
        raise ValueError(f"unsupported quadrature degree {degree}; expected one of {sorted(supported)}")


def triangle_rule(tri, degree):
    _check_degree(degree, _TRIANGLE_TABLES)
    tri = np.asarray(tri, dtype=float)
    bary, w = _TRIANGLE_TABLES[degree]
    e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
    area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
    return QuadratureRule(bary @ tri, w * area)


def triangle_rules(tris, degree):
    """Vectorized :func:`triangle_rule` over ``tris`` of shape (n, 3, 2).

    Returns points (n, q, 2) and weights (n, q).
    """
    _check_degree(degree, _TRIANGLE_TABLES)
    tris = np.asarray(tris, dtype=float)
    bary, w = _TRIANGLE_TABLES[degree]
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    points = np.einsum("qi,nid->nqd", bary, tris)
    return points, area[:, None] * w[None, :]


def segment_rule(a, b, degree):
    _check_degree(degree, range(1, 6))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = float(np.linalg.norm(b - a))
    if length == 0.0:
        raise ValueError("degenerate segment")
    t, w = leggauss(degree // 2 + 1)
    s = 0.5 * (t + 1.0)
    return QuadratureRule(a + s[:, None] * (b - a), 0.5 * w * length)


def polygon_rule(poly, degree):
    """Fan triangulation from vertex 0; empty rule for an empty polygon."""
    verts = np.asarray(getattr(poly, "vertices", poly), dtype=float).reshape(-1, 2)
    if len(verts) < 3:
        return QuadratureRule(np.empty((0, 2)), np.empty(0))
    fans = np.stack(
        [np.broadcast_to(verts[0], (len(verts) - 2, 2)), verts[1:-1], verts[2:]], axis=1
    )
    points, weights = triangle_rules(fans, degree)
    return QuadratureRule(points.reshape(-1, 2), weights.ravel())
