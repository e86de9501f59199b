"""Closest-point quantizers.

Every decoder exposes ``decode(X) -> (U, P)`` for a batch ``X`` of shape
``(m, n)``: ``U`` are integer coordinates with respect to the lattice's
generator and ``P = U @ B`` the decoded points. Batch decoding resolves
ties by whatever the underlying rule does; :func:`closest_point` adds the
deterministic tie rule (lexicographically smallest ``u``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _sphere
from .errors import DimensionMismatchError, NoGeneratorError, SearchBudgetExceeded
from .linalg import GeneratorMatrix, as_generator, check_vector, lll_transform

DEFAULT_MAX_NODES = 10**7
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class DecodeResult:
    u: np.ndarray
    point: np.ndarray
    error: np.ndarray
    d2: float


def _round(Y):
    # halves go down so ties land on the smaller integer
    return np.ceil(Y - 0.5)


def decode_cubic(Y):
    return _round(Y)


def decode_dn(Y):
    """Closest point of D_n = {x in Z^n : sum(x) even}, batch over rows."""
    F = _round(Y)
    odd = np.flatnonzero(np.mod(F.sum(axis=1), 2) != 0)
    if odd.size:
        delta = Y[odd] - F[odd]
        k = np.argmax(np.abs(delta), axis=1)
        dk = delta[np.arange(odd.size), k]
        F[odd, k] += np.where(dk >= 0, 1.0, -1.0)
    return F


def decode_an(Y):
    """Closest point of A_n embedded in the zero-sum hyperplane of R^(n+1)."""
    F = _round(Y)
    excess = F.sum(axis=1).astype(np.int64)
    if np.any(excess):
        delta = Y - F
        N = Y.shape[1]
        rank = np.empty_like(delta, dtype=np.int64)
        order = np.argsort(delta, axis=1, kind="stable")
        np.put_along_axis(rank, order, np.arange(N)[None, :].repeat(Y.shape[0], 0), axis=1)
        pos = excess[:, None]
        F -= (pos > 0) & (rank < pos)
        F += (pos < 0) & (rank >= N + pos)
    return F


_BASE_DECODERS = {"cubic": decode_cubic, "d-family": decode_dn, "a-family": decode_an}


class FamilyDecoder:
    """Fast decoder for Z^n, D_n, A_n and unions of their cosets.

    ``frame`` is an ``(n, N)`` similarity (rows orthogonal, equal norms)
    mapping the lattice's own coordinates into the ambient space where the
    classical construction lives: identity for Z^n, D_n and E8, a scaled
    hyperplane basis for A_n and A_n*.
    """

    def __init__(self, basis: GeneratorMatrix, base: str, frame=None, glue=None):
        self.basis = basis
        self.dim = basis.n
        self.base = _BASE_DECODERS[base]
        self.frame = None if frame is None else np.asarray(frame, dtype=float)
        self._back = None if frame is None else np.linalg.pinv(self.frame)
        self.glue = None if glue is None else np.asarray(glue, dtype=float)
        self._binv = np.linalg.inv(basis.rows)

    def ambient_points(self, Y):
        if self.glue is None:
            return self.base(Y)
        best = None
        best_d = None
        for g in self.glue:
            P = self.base(Y - g) + g
            d = np.sum((Y - P) ** 2, axis=1)
            if best is None:
                best, best_d = P, d
            else:
                take = d < best_d
                best[take] = P[take]
                best_d = np.where(take, d, best_d)
        return best

    def decode(self, X):
        X = np.asarray(X, dtype=float)
        Y = X if self.frame is None else X @ self.frame
        P = self.ambient_points(Y)
        if self.frame is not None:
            P = P @ self._back
        U = np.rint(P @ self._binv).astype(np.int64)
        return U, U @ self.basis.rows


class SphereDecoder:
    """Exact closest-point search on an LLL-reduced copy of ``basis``."""

    def __init__(self, basis, max_nodes: int = DEFAULT_MAX_NODES):
        self.basis = as_generator(basis)
        self.dim = self.basis.n
        self.max_nodes = int(max_nodes)
        self.reduced, self.transform = lll_transform(self.basis.rows)
        Q, R = np.linalg.qr(self.reduced.T)
        self._Q = np.ascontiguousarray(Q)
        self._R = np.ascontiguousarray(R)
        self._rinv = np.linalg.inv(self.reduced)

    def _reduced_decode(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        V0 = np.rint(X @ self._rinv).astype(np.int64)
        D0 = np.sum((X - V0 @ self.reduced) ** 2, axis=1) * (1 + 1e-12)
        Y = np.ascontiguousarray(X @ self._Q)
        V = np.empty_like(V0)
        D = np.empty(X.shape[0])
        bad = _sphere.search_batch(self._R, Y, V0, D0, self.max_nodes, V, D)
        if bad >= 0:
            raise SearchBudgetExceeded(
                f"sphere decoding exceeded {self.max_nodes} nodes on query {bad}")
        return V

    def decode(self, X):
        V = self._reduced_decode(X)
        U = V @ self.transform
        return U, V @ self.reduced

    def enumerate(self, x, radius2: float, max_points: int = 4096):
        """Integer coordinates ``u`` of all lattice points within ``radius2`` of ``x``."""
        y = np.ascontiguousarray(np.asarray(x, dtype=float) @ self._Q)
        pts, _, count, status = _sphere.enumerate_within(self._R, y, float(radius2), max_points, self.max_nodes)
        if status != _sphere.STATUS_OK:
            raise SearchBudgetExceeded(f"enumeration exceeded {self.max_nodes} nodes")
        if count > max_points:
            raise SearchBudgetExceeded(f"{count} points within radius exceed max_points={max_points}")
        return pts[:count] @ self.transform


class ProductDecoder:
    """Componentwise decoding of ``a_1 L_1 x a_2 L_2 x ...``."""

    def __init__(self, parts):
        self.parts = [(get_decoder(L), float(a)) for L, a in parts]
        for _, a in self.parts:
            if not a > 0:
                raise ValueError("product scales must be positive")
        self.dims = [d.dim for d, _ in self.parts]
        self.dim = sum(self.dims)

    def decode(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DimensionMismatchError(f"expected vectors of length {self.dim}")
        Us, Ps = [], []
        i = 0
        for (dec, a), k in zip(self.parts, self.dims):
            U, P = dec.decode(X[:, i:i + k] / a)
            Us.append(U)
            Ps.append(P * a)
            i += k
        return np.hstack(Us), np.hstack(Ps)


@lru_cache(maxsize=64)
def _sphere_for(B: GeneratorMatrix, max_nodes: int) -> SphereDecoder:
    return SphereDecoder(B, max_nodes)


def get_decoder(obj, max_nodes: int = DEFAULT_MAX_NODES):
    """Decoder for a catalog lattice, a product lattice or a bare generator."""
    if hasattr(obj, "make_decoder"):
        return obj.make_decoder()
    if hasattr(obj, "decode"):
        return obj
    return _sphere_for(as_generator(obj), max_nodes)


def _basis_of(obj) -> GeneratorMatrix:
    if hasattr(obj, "basis"):
        if obj.basis is None:
            raise NoGeneratorError(f"lattice {getattr(obj, 'name', '?')} has no generator")
        return obj.basis
    return as_generator(obj)


def _result(x, U, P):
    e = x - P
    return DecodeResult(u=U, point=P, error=e, d2=float(e @ e))


def _break_ties(basis: GeneratorMatrix, x, U, P):
    """Replace ``U`` by the lexicographically smallest equally close point."""
    e = x - P
    d2 = float(e @ e)
    tol = TIE_RTOL * max(d2, 1e-300) + 1e-15
    cands = _sphere_for(basis, DEFAULT_MAX_NODES).enumerate(x, d2 + tol)
    if cands.shape[0] <= 1:
        return U, P
    pts = cands @ basis.rows
    dd = np.sum((x - pts) ** 2, axis=1)
    close = cands[dd <= dd.min() + tol]
    best = min(map(tuple, close))
    Ub = np.array(best, dtype=np.int64)
    return Ub, Ub @ basis.rows


def closest_point(L, x) -> DecodeResult:
    """Minimum-distance quantization of a single vector ``x``.

    ``L`` may be a catalog :class:`~latquant.catalog.Lattice` (its fast decoder
    is used) or any generator matrix (sphere decoding).
    """
    basis = _basis_of(L)
    x = check_vector(x, basis.n)
    U, P = get_decoder(L).decode(x[None, :])
    U, P = _break_ties(basis, x, U[0], P[0])
    return _result(x, U, P)


def sphere_decode(B, x, max_nodes: int = DEFAULT_MAX_NODES) -> DecodeResult:
    """Exact closest point by Schnorr-Euchner enumeration on the LLL-reduced basis."""
    g = as_generator(B)
    x = check_vector(x, g.n)
    U, P = _sphere_for(g, int(max_nodes)).decode(x[None, :])
    U, P = _break_ties(g, x, U[0], P[0])
    return _result(x, U, P)


def closest_product(parts, x) -> DecodeResult:
    """Closest point of the product of scaled lattices, block by block."""
    dec = ProductDecoder(parts)
    x = check_vector(x, dec.dim)
    Us, Ps = [], []
    i = 0
    for (L, a), k in zip(parts, dec.dims):
        r = closest_point(L, x[i:i + k] / a)
        Us.append(r.u)
        Ps.append(r.point * a)
        i += k
    return _result(x, np.concatenate(Us), np.concatenate(Ps))


def quantize_suboptimal(B1, B2, H, x) -> DecodeResult:
    """Four-step quantizer on the lattice generated by ``[[B1, 0], [H, B2]]``.

    Decodes the trailing block on its own, shifts the leading block by the
    offset that block induces, then decodes the leading block. The decision
    region is the product of the two component Voronoi regions.
    ``B1``/``B2`` may be catalog lattices or generator matrices.
    """
    g1, g2 = _basis_of(B1), _basis_of(B2)
    n1, n2 = g1.n, g2.n
    H = np.asarray(H, dtype=float).reshape(n2, n1) if np.ndim(H) < 2 else np.asarray(H, dtype=float)
    if H.shape != (n2, n1):
        raise DimensionMismatchError(f"H must have shape ({n2}, {n1}), got {H.shape}")
    x = check_vector(x, n1 + n2)
    x1, x2 = x[:n1], x[n1:]
    r2 = closest_point(B2, x2)
    z1 = r2.u @ H
    r1 = closest_point(B1, x1 - z1)
    u = np.concatenate([r1.u, r2.u])
    return _result(x, u, np.concatenate([r1.point + z1, r2.point]))


def quantize_suboptimal_batch(B1, B2, H, X):
    """Batch form of :func:`quantize_suboptimal`; returns ``(U, P)``."""
    g1, g2 = _basis_of(B1), _basis_of(B2)
    n1 = g1.n
    H = np.asarray(H, dtype=float).reshape(g2.n, n1)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    U2, P2 = get_decoder(B2).decode(X[:, n1:])
    Z1 = U2 @ H
    U1, P1 = get_decoder(B1).decode(X[:, :n1] - Z1)
    return np.hstack([U1, U2]), np.hstack([P1 + Z1, P2])
