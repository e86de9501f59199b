"""Dense linear algebra for lattice generators.

Row convention throughout: a lattice point is ``u @ B`` for an integer row
vector ``u``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, NotSymmetricError, SingularMatrixError

DET_RTOL = 1e-12
SYM_RTOL = 1e-12


def _exact_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


class GeneratorMatrix:
    """Square invertible generator matrix, optionally backed by exact rationals.

    The float array is read-only. ``exact`` holds a tuple of Fraction rows when
    every entry was supplied as a rational.
    """

    __slots__ = ("rows", "exact", "_det")

    def __init__(self, rows, exact: Sequence[Sequence[Fraction]] | None = None):
        if exact is None and not isinstance(rows, np.ndarray):
            rows = [list(r) for r in rows]
            if rows and all(isinstance(v, (int, Fraction)) for r in rows for v in r):
                exact = rows
        if exact is not None:
            exact = tuple(tuple(Fraction(v) for v in r) for r in exact)
            arr = np.array([[float(v) for v in r] for r in exact], dtype=float)
        else:
            arr = np.array(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionMismatchError(f"generator must be a square n x n matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("generator entries must be finite")
        arr.setflags(write=False)
        self.rows = arr
        self.exact = exact
        if exact is not None:
            det = float(_exact_det(exact))
        else:
            det = float(np.linalg.det(arr))
        scale = float(np.prod(np.linalg.norm(arr, axis=1)))
        if scale == 0.0 or abs(det) <= DET_RTOL * scale:
            raise SingularMatrixError(f"generator is singular (|det| = {abs(det):.3e})")
        self._det = det

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def det(self) -> float:
        return self._det

    def __array__(self, dtype=None, copy=None):
        return self.rows if dtype is None else self.rows.astype(dtype)

    def __repr__(self):
        return f"GeneratorMatrix(n={self.n}, exact={self.exact is not None})"

    def __eq__(self, other):
        if not isinstance(other, GeneratorMatrix):
            return NotImplemented
        return np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash(self.rows.tobytes())

    def scaled(self, c: float) -> "GeneratorMatrix":
        if self.exact is not None and isinstance(c, (int, Fraction)):
            return GeneratorMatrix(None, exact=[[c * v for v in r] for r in self.exact])
        return GeneratorMatrix(self.rows * c)

    def gram(self) -> np.ndarray:
        return self.rows @ self.rows.T


def as_generator(B) -> GeneratorMatrix:
    return B if isinstance(B, GeneratorMatrix) else GeneratorMatrix(B)


def volume(B) -> float:
    """Volume of the fundamental region, ``|det B|``."""
    return abs(as_generator(B).det)


def as_symmetric(M) -> np.ndarray:
    """Validate a real symmetric matrix and return it as a float array."""
    a = np.array(M, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    tol = SYM_RTOL * max(float(np.max(np.abs(a))), np.finfo(float).tiny)
    if np.max(np.abs(a - a.T)) > tol:
        raise NotSymmetricError("matrix is not symmetric")
    return (a + a.T) / 2


def sym_matrix_exp(M, beta: float = 1.0) -> np.ndarray:
    """``exp(beta * M)`` for symmetric ``M`` via its eigendecomposition."""
    m = as_symmetric(M)
    w, v = np.linalg.eigh(m)
    out = (v * np.exp(beta * w)) @ v.T
    return (out + out.T) / 2


def lll_transform(B, delta: float = 0.75) -> tuple[np.ndarray, np.ndarray]:
    """LLL-reduce the rows of ``B``.

    Returns ``(B_red, U)`` with integer unimodular ``U`` and ``B_red = U @ B``.
    """
    B0 = np.array(B, dtype=float)
    n = B0.shape[0]
    b = B0.copy()
    U = np.eye(n, dtype=np.int64)
    R = np.linalg.qr(b.T, mode="r")
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(R[j, k] / R[j, j])
            if q:
                b[k] -= q * b[j]
                U[k] -= q * U[j]
                R[:, k] -= q * R[:, j]
        mu = R[k - 1, k] / R[k - 1, k - 1]
        if R[k, k] ** 2 >= (delta - mu * mu) * R[k - 1, k - 1] ** 2:
            k += 1
        else:
            b[[k - 1, k]] = b[[k, k - 1]]
            U[[k - 1, k]] = U[[k, k - 1]]
            R = np.linalg.qr(b.T, mode="r")
            k = max(k - 1, 1)
    return U @ B0, U


def lll_reduce(B, delta: float = 0.75) -> GeneratorMatrix:
    """Generator of the same lattice with LLL-reduced rows."""
    g = as_generator(B)
    _, U = lll_transform(g.rows, delta)
    if g.exact is not None:
        exact = [[sum((int(U[i, k]) * g.exact[k][j] for k in range(g.n)), Fraction(0)) for j in range(g.n)]
                 for i in range(g.n)]
        return GeneratorMatrix(None, exact=exact)
    return GeneratorMatrix(U @ g.rows)


def integer_row_basis(vectors: Iterable[Sequence[int]]) -> list[list[int]]:
    """Basis (Hermite form) of the integer row lattice spanned by ``vectors``.

    The span must be full rank in its ambient dimension.
    """
    a = [[int(v) for v in row] for row in vectors]
    if not a:
        raise ValueError("no spanning vectors")
    n = len(a[0])
    r = 0
    for col in range(n):
        while True:
            nz = [i for i in range(r, len(a)) if a[i][col] != 0]
            if not nz:
                raise SingularMatrixError("spanning set is not full rank")
            p = min(nz, key=lambda i: abs(a[i][col]))
            a[r], a[p] = a[p], a[r]
            pv = a[r][col]
            done = True
            for i in range(r + 1, len(a)):
                if a[i][col]:
                    q = a[i][col] // pv
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][col]:
                        done = False
            if done:
                break
        if a[r][col] < 0:
            a[r] = [-x for x in a[r]]
        r += 1
        a = a[:r] + [row for row in a[r:] if any(row)]
    basis = a[:n]
    for i in range(n):
        for k in range(i):
            q = basis[k][i] // basis[i][i]
            if q:
                basis[k] = [x - q * y for x, y in zip(basis[k], basis[i])]
    return basis


def _parse_entry(tok: str):
    if "/" in tok:
        p, q = tok.split("/")
        return Fraction(int(p), int(q))
    try:
        return Fraction(int(tok))
    except ValueError:
        return float(tok)


def parse_matrix_text(text: str) -> GeneratorMatrix:
    """Parse the matrix text format: a line with ``n``, then ``n`` rows of ``n`` entries."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty matrix text")
    n = int(lines[0])
    if len(lines) - 1 != n:
        raise DimensionMismatchError(f"expected {n} rows, found {len(lines) - 1}")
    rows = [[_parse_entry(t) for t in ln.split()] for ln in lines[1:]]
    if any(len(r) != n for r in rows):
        raise DimensionMismatchError(f"every row must have {n} entries")
    if all(isinstance(v, Fraction) for r in rows for v in r):
        return GeneratorMatrix(None, exact=rows)
    return GeneratorMatrix([[float(v) for v in r] for r in rows])


def format_matrix_text(B) -> str:
    g = as_generator(B)
    out = [str(g.n)]
    if g.exact is not None:
        out += [" ".join(str(v) for v in r) for r in g.exact]
    else:
        out += [" ".join(repr(float(v)) for v in r) for r in g.rows]
    return "\n".join(out) + "\n"


def read_matrix(path) -> GeneratorMatrix:
    with open(path) as fh:
        return parse_matrix_text(fh.read())


def write_matrix(B, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix_text(B))


def block_diag(*blocks) -> np.ndarray:
    sizes = [np.asarray(b).shape[0] for b in blocks]
    out = np.zeros((sum(sizes), sum(sizes)))
    i = 0
    for b, s in zip(blocks, sizes):
        out[i:i + s, i:i + s] = b
        i += s
    return out


def check_vector(x, n: int) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (n,):
        raise DimensionMismatchError(f"expected a vector of length {n}, got shape {v.shape}")
    return v


__all__ = [
    "GeneratorMatrix", "as_generator", "volume", "as_symmetric", "sym_matrix_exp",
    "lll_transform", "lll_reduce", "integer_row_basis", "parse_matrix_text",
    "format_matrix_text", "read_matrix", "write_matrix", "block_diag", "check_vector",
]
