"""Independent reference computations used by the tests.

Nothing here imports latquant: these are deliberately naive re-derivations.
"""

import itertools
import math

import numpy as np


def brute_closest(B, x, radius=3):
    """Closest point by exhaustive search over |u_i| <= radius (plus rounding offset)."""
    B = np.asarray(B, dtype=float)
    x = np.asarray(x, dtype=float)
    c = np.rint(x @ np.linalg.inv(B)).astype(int)
    best = None
    for du in itertools.product(range(-radius, radius + 1), repeat=B.shape[0]):
        u = c + np.array(du)
        p = u @ B
        d = float(np.sum((x - p) ** 2))
        if best is None or d < best[0] - 1e-12 or (abs(d - best[0]) <= 1e-12 and tuple(u) < tuple(best[1])):
            best = (d, u, p)
    return best


def _clip(poly, normal, offset):
    """Keep the part of a convex polygon with normal . p <= offset."""
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        fp, fq = normal @ p - offset, normal @ q - offset
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return out


def voronoi_polygon(B, reach=3):
    """Voronoi cell of a 2-D lattice by half-plane intersection."""
    B = np.asarray(B, dtype=float)
    big = 10 * np.abs(B).sum()
    poly = [np.array(v, dtype=float) for v in ((-big, -big), (big, -big), (big, big), (-big, big))]
    for u in itertools.product(range(-reach, reach + 1), repeat=2):
        if u == (0, 0):
            continue
        v = np.array(u) @ B
        poly = _clip(poly, v, v @ v / 2)
    return np.array(poly)


def polygon_moments(P):
    """Area and second-moment matrix (integral of x^T x) of a simple polygon about the origin."""
    A = 0.0
    Ixx = Iyy = Ixy = 0.0
    k = len(P)
    for i in range(k):
        x0, y0 = P[i]
        x1, y1 = P[(i + 1) % k]
        cr = x0 * y1 - x1 * y0
        A += cr / 2
        Ixx += cr * (x0 * x0 + x0 * x1 + x1 * x1) / 12
        Iyy += cr * (y0 * y0 + y0 * y1 + y1 * y1) / 12
        Ixy += cr * (x0 * y1 + 2 * x0 * y0 + 2 * x1 * y1 + x1 * y0) / 24
    return A, np.array([[Ixx, Ixy], [Ixy, Iyy]])


def exact_2d(B):
    """Exact (V, E, G, R) of a 2-D lattice from its Voronoi polygon."""
    A, M = polygon_moments(voronoi_polygon(B))
    R = M / A
    E = float(np.trace(R))
    return A, E, E / (2 * A), R


def zador_gamma(n):
    """Zador bound with math.gamma (valid while gamma stays finite)."""
    return math.gamma(1 + n / 2) ** (2 / n) * math.gamma(1 + 2 / n) / (n * math.pi)


def rectangle_G(s):
    return (1 + s * s) / (24 * s)


def random_unimodular(rng, n, steps=12):
    U = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(n, 2, replace=False)
        U[i] += int(rng.integers(-2, 3)) * U[j]
    if rng.random() < 0.5:
        U[[0, n - 1]] = U[[n - 1, 0]]
    return U
