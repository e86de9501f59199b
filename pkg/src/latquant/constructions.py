"""Generator matrices for the classical lattices.

All constructions return full-rank square generators (row convention).
Lattices naturally living in a hyperplane (A_n, A_n*) are expressed in an
orthonormal hyperplane basis; the matching ``frame`` maps back to the
ambient coordinates where the fast decoders work.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import numpy as np

from .linalg import GeneratorMatrix, integer_row_basis, lll_reduce


def helmert(n: int) -> np.ndarray:
    """``(n, n+1)`` matrix with orthonormal rows spanning the zero-sum hyperplane."""
    H = np.zeros((n, n + 1))
    for k in range(1, n + 1):
        H[k - 1, :k] = 1.0
        H[k - 1, k] = -k
        H[k - 1] /= np.sqrt(k * (k + 1))
    return H


def _from_span(vectors, denom: int = 1) -> GeneratorMatrix:
    basis = integer_row_basis(vectors)
    g = GeneratorMatrix(None, exact=[[Fraction(v, denom) for v in row] for row in basis])
    return lll_reduce(g)


def cubic(n: int) -> GeneratorMatrix:
    return GeneratorMatrix(None, exact=np.eye(n, dtype=int).tolist())


def _pm_pairs(n: int, scale: int):
    out = []
    for j in range(1, n):
        for s in (1, -1):
            v = [0] * n
            v[0] = scale
            v[j] = s * scale
            out.append(v)
    return out


def dn(n: int) -> GeneratorMatrix:
    """D_n: integer vectors with even coordinate sum."""
    if n < 2:
        raise ValueError("D_n needs n >= 2")
    return _from_span(_pm_pairs(n, 1))


def dn_dual(n: int) -> GeneratorMatrix:
    """D_n* = Z^n union (Z^n + 1/2)."""
    span = [[2 if i == j else 0 for j in range(n)] for i in range(n)] + [[1] * n]
    return _from_span(span, 2)


def dn_plus(n: int) -> GeneratorMatrix:
    """D_n^+ = D_n union (D_n + 1/2), a lattice for even n (E8 when n = 8)."""
    if n % 2:
        raise ValueError("D_n^+ is a lattice only for even n")
    return _from_span([[2 * v for v in w] for w in _pm_pairs(n, 1)] + [[1] * n], 2)


def an_embedded(n: int) -> np.ndarray:
    B = np.zeros((n, n + 1))
    for i in range(n):
        B[i, i] = 1.0
        B[i, i + 1] = -1.0
    return B


def an(n: int) -> tuple[GeneratorMatrix, np.ndarray]:
    """A_n scaled to minimal norm 1, with its ambient frame."""
    H = helmert(n)
    B = an_embedded(n) @ H.T / np.sqrt(2)
    return GeneratorMatrix(B), np.sqrt(2) * H


def an_dual(n: int) -> tuple[GeneratorMatrix, np.ndarray, np.ndarray]:
    """Dual of :func:`an` plus frame and ambient glue vectors ``[i]``."""
    B, frame = an(n)
    Bd = np.linalg.inv(B.rows).T
    N = n + 1
    glue = np.zeros((N, N))
    for i in range(N):
        j = N - i
        glue[i, :j] = i / N
        glue[i, j:] = -j / N
    # dual generator in ambient coordinates is scaled by 2 relative to A_n's frame
    return GeneratorMatrix(Bd), frame / 2, glue


CARTAN_KINDS = ("A", "D", "E")


def cartan(kind: str, n: int) -> np.ndarray:
    """Cartan matrix of the simply laced root system ``kind_n``."""
    C = 2 * np.eye(n)
    if kind == "A":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "D":
        edges = [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    elif kind == "E":
        if n not in (6, 7, 8):
            raise ValueError("E_n exists for n = 6, 7, 8")
        edges = [(i, i + 1) for i in range(n - 2)] + [(2, n - 1)]
    else:
        raise ValueError(kind)
    for i, j in edges:
        C[i, j] = C[j, i] = -1
    return C


def root_lattice(kind: str, n: int) -> GeneratorMatrix:
    return GeneratorMatrix(np.linalg.cholesky(cartan(kind, n)))


def dual(B: GeneratorMatrix) -> GeneratorMatrix:
    return GeneratorMatrix(np.linalg.inv(B.rows).T)


def coxeter_todd() -> GeneratorMatrix:
    """K12 as the Eisenstein lattice {x in E^6 : x_i = x_j mod theta, sum x = 0 mod 3}.

    theta = sqrt(-3) = 1 + 2w. Each Eisenstein integer a + b w is stored as the
    integer pair (a, b) and embedded as (a - b/2, b sqrt(3)/2).
    """
    def mul(z, w):
        # (a + b w)(c + d w) with w^2 = -1 - w
        a, b = z
        c, d = w
        return (a * c - b * d, a * d + b * c - b * d)

    theta = (1, 2)
    omega = (0, 1)
    gens = []
    gens.append([(1, 0)] * 6)
    for i in range(6):
        for j in range(i + 1, 6):
            v = [(0, 0)] * 6
            v[i] = theta
            v[j] = (-theta[0], -theta[1])
            gens.append(v)
        v = [(0, 0)] * 6
        v[i] = (3, 0)
        gens.append(v)
    span = []
    for g in gens:
        for unit in ((1, 0), omega):
            span.append([c for z in g for c in mul(z, unit)])
    basis = np.array(integer_row_basis(span), dtype=float)
    emb = np.zeros((12, 12))
    for k in range(6):
        emb[2 * k, 2 * k] = 1.0
        emb[2 * k + 1, 2 * k] = -0.5
        emb[2 * k + 1, 2 * k + 1] = np.sqrt(3) / 2
    return lll_reduce(GeneratorMatrix(basis @ emb))


def reed_muller_1_4() -> list[list[int]]:
    rows = [[1] * 16]
    for k in range(4):
        rows.append([(i >> k) & 1 for i in range(16)])
    return rows


def golay24() -> list[list[int]]:
    """Generator rows of the extended binary Golay code (extended QR code of length 23)."""
    g = [1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1]  # 1 + x^2 + x^4 + x^5 + x^6 + x^10 + x^11
    rows = []
    for s in range(12):
        r = [0] * 23
        for i, c in enumerate(g):
            r[s + i] = c
        rows.append(r + [sum(r) % 2])
    return rows


def codewords(rows) -> np.ndarray:
    G = np.array(rows, dtype=np.int64)
    msgs = np.array(list(product((0, 1), repeat=G.shape[0])), dtype=np.int64)
    return (msgs @ G) % 2


def barnes_wall16() -> GeneratorMatrix:
    """Lambda16: x = c mod 2 for c in RM(1,4) and sum(x) = 0 mod 4 (minimal norm 8)."""
    return _from_span(reed_muller_1_4() + _pm_pairs(16, 2))


def leech24() -> GeneratorMatrix:
    """Lambda24 in the standard sqrt(8)-scaled integer coordinates (minimal norm 32)."""
    span = [[2 * c for c in r] for r in golay24()]
    span += _pm_pairs(24, 4)
    span.append([-3] + [1] * 23)
    return _from_span(span)
