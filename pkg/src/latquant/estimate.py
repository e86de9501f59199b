"""Seeded Monte Carlo estimates of E, G and the error correlation matrix R.

Samples are ``x = u B`` with ``u`` uniform on ``[0, 1)^n``. Sample ``i`` reads
Philox counters ``i*k .. i*k + k - 1`` (``k = ceil(n/4)``) under key ``seed``,
so any sample can be regenerated on its own. Sums are accumulated in fixed
blocks of ``BLOCK`` consecutive samples and the block sums are combined with
``math.fsum``; the result does not depend on how blocks are spread over
workers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decode import _basis_of, get_decoder
from .linalg import GeneratorMatrix

BLOCK = 4096
_SEED_MASK = (1 << 64) - 1


def uniform_block(seed: int, start: int, count: int, n: int) -> np.ndarray:
    """Rows ``start .. start+count-1`` of the uniform ``[0,1)^n`` sample stream."""
    k = -(-n // 4)
    bg = np.random.Philox(key=int(seed) & _SEED_MASK, counter=start * k)
    raw = bg.random_raw(count * 4 * k).reshape(count, 4 * k)[:, :n]
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


@dataclass(frozen=True)
class _BlockSums:
    d2: np.ndarray       # (blocks,)
    d4: np.ndarray       # (blocks,)
    R: np.ndarray        # (blocks, n, n), sums of e^T e
    M4: np.ndarray       # (blocks, n, n), sums of (e_i e_j)^2
    counts: np.ndarray   # (blocks,)


def _fsum0(a: np.ndarray) -> np.ndarray:
    """Exactly rounded sum over the leading axis."""
    flat = a.reshape(a.shape[0], -1)
    return np.array([math.fsum(flat[:, j]) for j in range(flat.shape[1])]).reshape(a.shape[1:])


@dataclass(frozen=True)
class MomentEstimate:
    name: str
    n: int
    samples: int
    seed: int
    volume: float
    E_hat: float
    G_hat: float
    R_hat: np.ndarray
    se_E: float
    se_G: float
    se_R: np.ndarray
    mean_d4: float
    blocks: _BlockSums | None = field(default=None, repr=False, compare=False)

    @property
    def norm(self) -> float:
        """The normalization ``n V^(2/n)`` turning E into G."""
        return self.n * self.volume ** (2.0 / self.n)

    def to_dict(self) -> dict:
        w = whiteness_from(self)
        return {
            "name": self.name, "n": self.n, "samples": self.samples, "seed": self.seed,
            "V": self.volume, "E": self.E_hat, "se_E": self.se_E, "G": self.G_hat, "se_G": self.se_G,
            "R": self.R_hat.ravel().tolist(), "rho": w.rho, "anisotropy": w.anisotropy,
            "anisotropy_se": w.anisotropy_se, "eigen_spread": w.eigen_spread,
            "eigen_spread_se": w.eigen_spread_se,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _block_sums(decoder, B: np.ndarray, seed: int, start: int, count: int):
    U = uniform_block(seed, start, count, B.shape[0])
    X = U @ B
    _, P = decoder.decode(X)
    E = X - P
    d2 = np.einsum("ij,ij->i", E, E)
    E2 = E * E
    return float(d2.sum()), float((d2 * d2).sum()), E.T @ E, E2.T @ E2


def estimate_moments(L, samples: int = 100_000, seed: int = 0, workers: int = 1,
                     name: str | None = None, decoder=None) -> MomentEstimate:
    """Monte Carlo E, G and R for a lattice, product lattice or generator matrix."""
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be positive")
    basis: GeneratorMatrix = _basis_of(L)
    dec = decoder if decoder is not None else get_decoder(L)
    B = np.asarray(basis.rows, dtype=float)
    n = basis.n
    nb = -(-samples // BLOCK)
    starts = [b * BLOCK for b in range(nb)]
    counts = [min(BLOCK, samples - s) for s in starts]

    def work(b):
        return _block_sums(dec, B, seed, starts[b], counts[b])

    if workers > 1 and nb > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(work, range(nb)))
    else:
        parts = [work(b) for b in range(nb)]

    sums = _BlockSums(
        d2=np.array([p[0] for p in parts]), d4=np.array([p[1] for p in parts]),
        R=np.stack([p[2] for p in parts]), M4=np.stack([p[3] for p in parts]),
        counts=np.array(counts),
    )
    N = float(samples)
    R = _fsum0(sums.R) / N
    R = (R + R.T) / 2
    E = float(math.fsum(np.diag(R)))
    mean_d4 = math.fsum(sums.d4) / N
    var_d2 = max(mean_d4 - E * E, 0.0)
    se_E = math.sqrt(var_d2 / N)
    M4 = _fsum0(sums.M4) / N
    se_R = np.sqrt(np.maximum(M4 - R * R, 0.0) / N)
    V = abs(basis.det)
    norm = n * V ** (2.0 / n)
    return MomentEstimate(
        name=name or getattr(L, "name", "custom"), n=n, samples=samples, seed=int(seed),
        volume=V, E_hat=E, G_hat=E / norm, R_hat=R, se_E=se_E, se_G=se_E / norm,
        se_R=se_R, mean_d4=mean_d4, blocks=sums,
    )


@dataclass(frozen=True)
class WhitenessReport:
    R_hat: np.ndarray
    rho: float
    Rbar: np.ndarray
    anisotropy: float
    anisotropy_se: float
    eigen_spread: float
    eigen_spread_se: float
    samples: int

    @property
    def anisotropy_sigmas(self) -> float:
        if self.anisotropy == 0:
            return 0.0
        return self.anisotropy / self.anisotropy_se if self.anisotropy_se > 0 else math.inf


def _spread(R: np.ndarray) -> float:
    w = np.linalg.eigvalsh(R)
    return float((w[-1] - w[0]) / (np.trace(R) / R.shape[0]))


def whiteness_from(est: MomentEstimate) -> WhitenessReport:
    R = est.R_hat
    n = est.n
    rho = float(np.trace(R)) / n
    Rbar = R - rho * np.eye(n)
    scale = float(np.trace(R)) / math.sqrt(n)
    fro = float(np.linalg.norm(Rbar))
    aniso = fro / scale
    # RMS size of the traceless part produced by sampling noise alone
    noise2 = max((1 - 1 / n) * est.mean_d4 - fro * fro, 0.0) / est.samples
    aniso_se = math.sqrt(noise2) / scale
    spread = _spread(R)
    spread_se = math.nan
    b = est.blocks
    if b is not None and len(b.counts) >= 4:
        # delete-one-block jackknife
        tot = _fsum0(b.R)
        N = est.samples
        reps = np.array([_spread((tot - b.R[i]) / (N - b.counts[i])) for i in range(len(b.counts))])
        g = len(reps)
        spread_se = float(math.sqrt((g - 1) / g * np.sum((reps - reps.mean()) ** 2)))
    return WhitenessReport(R_hat=R, rho=rho, Rbar=Rbar, anisotropy=aniso, anisotropy_se=aniso_se,
                           eigen_spread=spread, eigen_spread_se=spread_se, samples=est.samples)


def whiteness(L, samples: int = 100_000, seed: int = 0, workers: int = 1) -> WhitenessReport:
    return whiteness_from(estimate_moments(L, samples, seed, workers))


def recompute_G(report: dict) -> float:
    """G from the E, n and V fields of a JSON report."""
    n = report["n"]
    return report["E"] / (n * report["V"] ** (2.0 / n))
