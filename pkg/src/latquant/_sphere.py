"""Numba kernels for Schnorr-Euchner closest-point enumeration.

The search minimises ``||y - R v||^2`` over integer ``v`` for an upper
triangular ``R``. Callers rotate their targets into this frame.
"""

import numba as nb
import numpy as np

STATUS_OK = 0
STATUS_BUDGET = 1


@nb.njit(cache=True, nogil=True)
def _search_one(R, y, radius2, max_nodes, v_best):
    n = R.shape[0]
    v = np.zeros(n, np.int64)
    c = np.zeros(n)
    dist = np.zeros(n + 1)
    step = np.zeros(n, np.int64)
    best = radius2
    found = False
    nodes = 0
    k = n - 1
    c[k] = y[k] / R[k, k]
    v[k] = np.int64(np.floor(c[k] + 0.5))
    step[k] = 1 if c[k] >= v[k] else -1
    while True:
        diff = c[k] - v[k]
        d = dist[k + 1] + (R[k, k] * diff) ** 2
        nodes += 1
        if nodes > max_nodes:
            return best, found, STATUS_BUDGET
        if d < best:
            if k == 0:
                best = d
                found = True
                for i in range(n):
                    v_best[i] = v[i]
                # next sibling at the leaf level
                v[k] += step[k]
                step[k] = -step[k] - (1 if step[k] > 0 else -1)
            else:
                dist[k] = d
                k -= 1
                s = y[k]
                for j in range(k + 1, n):
                    s -= R[k, j] * v[j]
                c[k] = s / R[k, k]
                v[k] = np.int64(np.floor(c[k] + 0.5))
                step[k] = 1 if c[k] >= v[k] else -1
        else:
            k += 1
            if k == n:
                break
            v[k] += step[k]
            step[k] = -step[k] - (1 if step[k] > 0 else -1)
    return best, found, STATUS_OK


@nb.njit(cache=True, nogil=True)
def search_batch(R, Y, V0, D0, max_nodes, V_out, D_out):
    """Closest points for every row of ``Y``.

    ``V0``/``D0`` hold a starting candidate (e.g. Babai rounding) and its
    squared distance; the search only accepts strictly better points.
    Returns the index of the first row that blew the node budget, or -1.
    """
    m = Y.shape[0]
    n = R.shape[0]
    v_best = np.zeros(n, np.int64)
    for i in range(m):
        best, found, status = _search_one(R, Y[i], D0[i], max_nodes, v_best)
        if status != STATUS_OK:
            return i
        if found:
            D_out[i] = best
            for j in range(n):
                V_out[i, j] = v_best[j]
        else:
            D_out[i] = D0[i]
            for j in range(n):
                V_out[i, j] = V0[i, j]
    return -1


@nb.njit(cache=True, nogil=True)
def enumerate_within(R, y, radius2, max_points, max_nodes):
    """All integer ``v`` with ``||y - R v||^2 <= radius2``.

    Returns ``(points, d2, count, status)``; ``count`` may exceed
    ``max_points`` in which case only the first ``max_points`` are stored.
    """
    n = R.shape[0]
    out = np.zeros((max_points, n), np.int64)
    out_d = np.zeros(max_points)
    count = 0
    v = np.zeros(n, np.int64)
    c = np.zeros(n)
    dist = np.zeros(n + 1)
    step = np.zeros(n, np.int64)
    nodes = 0
    k = n - 1
    c[k] = y[k] / R[k, k]
    v[k] = np.int64(np.floor(c[k] + 0.5))
    step[k] = 1 if c[k] >= v[k] else -1
    while True:
        diff = c[k] - v[k]
        d = dist[k + 1] + (R[k, k] * diff) ** 2
        nodes += 1
        if nodes > max_nodes:
            return out, out_d, count, STATUS_BUDGET
        if d <= radius2:
            if k == 0:
                if count < max_points:
                    for i in range(n):
                        out[count, i] = v[i]
                    out_d[count] = d
                count += 1
                v[k] += step[k]
                step[k] = -step[k] - (1 if step[k] > 0 else -1)
            else:
                dist[k] = d
                k -= 1
                s = y[k]
                for j in range(k + 1, n):
                    s -= R[k, j] * v[j]
                c[k] = s / R[k, k]
                v[k] = np.int64(np.floor(c[k] + 0.5))
                step[k] = 1 if c[k] >= v[k] else -1
        else:
            k += 1
            if k == n:
                break
            v[k] += step[k]
            step[k] = -step[k] - (1 if step[k] > 0 else -1)
    return out, out_d, count, STATUS_OK
