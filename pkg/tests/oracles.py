"""Independent reference computations used by the tests."""

from math import factorial

import numpy as np
from scipy.stats import qmc


def reference_monomial(a, b):
    """Exact integral of x^a y^b over the reference triangle (0,0),(1,0),(0,1)."""
    return factorial(a) * factorial(b) / factorial(a + b + 2)


def shoelace_moments(verts):
    """Area, first and second moments of a simple CCW polygon via Green's theorem."""
    x, y = np.asarray(verts, dtype=float).T
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    c = x * yn - xn * y
    area = c.sum() / 2
    mx = ((x + xn) * c).sum() / 6
    my = ((y + yn) * c).sum() / 6
    mxx = ((x**2 + x * xn + xn**2) * c).sum() / 12
    myy = ((y**2 + y * yn + yn**2) * c).sum() / 12
    mxy = ((x * yn + 2 * x * y + 2 * xn * yn + xn * y) * c).sum() / 24
    return {"1": area, "x": mx, "y": my, "xx": mxx, "yy": myy, "xy": mxy}


def reference_triangle_samples(n_log2=20, seed=1):
    """Scrambled Sobol points folded into the reference triangle (float32 to
    keep the hit counting fast; the rounding is far below the sampling error)."""
    u = qmc.Sobol(2, scramble=True, seed=seed).random_base2(n_log2)
    r, s = u[:, 0].copy(), u[:, 1].copy()
    flip = r + s > 1
    r[flip], s[flip] = 1 - r[flip], 1 - s[flip]
    return r.astype(np.float32), s.astype(np.float32)


def _ccw(tri):
    tri = np.array(tri, dtype=float)
    e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
    if e1[0] * e2[1] - e1[1] * e2[0] < 0:
        tri = tri[[0, 2, 1]]
    return tri


def monte_carlo_clip_area(t1, t2, samples):
    """Hit-count estimate of |t1 ∩ t2|: samples of the reference triangle are
    mapped affinely onto t1 and tested against the three edges of t2."""
    r, s = samples
    t1, t2 = _ccw(t1), _ccw(t2)
    e1, e2 = t1[1] - t1[0], t1[2] - t1[0]
    area1 = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
    if np.any(t1.max(axis=0) < t2.min(axis=0)) or np.any(t2.max(axis=0) < t1.min(axis=0)):
        return 0.0
    inside = np.ones(len(r), dtype=bool)
    for k in range(3):
        p, q = t2[k], t2[(k + 1) % 3]
        d = q - p
        # cross(d, z - p) >= 0 with z = t1[0] + r e1 + s e2
        c0 = d[0] * (t1[0, 1] - p[1]) - d[1] * (t1[0, 0] - p[0])
        cr = d[0] * e1[1] - d[1] * e1[0]
        cs = d[0] * e2[1] - d[1] * e2[0]
        inside &= c0 + cr * r + cs * s >= 0
    return area1 * np.count_nonzero(inside) / len(r)


def points_in_box(points, lo, hi):
    return np.all((points > lo) & (points < hi), axis=1)
