"""Numerical checks of the whitening, product and saddle-point results."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .catalog import Lattice
from .compose import g_of_scale, optimal_scale, parse_composition, plan_product, product_generator
from .decode import ProductDecoder, SphereDecoder, _basis_of
from .estimate import estimate_moments, uniform_block
from .linalg import GeneratorMatrix, as_symmetric, sym_matrix_exp, volume

SIGMAS = 3.0


def traceless_part(R) -> np.ndarray:
    """``R - (tr R / n) I``."""
    R = as_symmetric(R)
    n = R.shape[0]
    return R - (np.trace(R) / n) * np.eye(n)


def first_order_slope(R, V: float) -> float:
    """Predicted ``dG/dbeta`` at ``beta = 0`` for the map ``exp(beta Rbar)``."""
    Rb = traceless_part(R)
    n = Rb.shape[0]
    return 2 * float(np.trace(Rb @ Rb)) / (n * V ** (2 / n))


def rectangle_nsm(s: float) -> float:
    """Exact NSM of the rectangular lattice ``Z x sZ``."""
    return (1 + s * s) / (24 * s)


def rectangle_perturbed_nsm(s: float, beta: float) -> float:
    """Exact NSM after applying ``exp(beta Rbar)`` to ``diag(1, s)``."""
    c = (s * s - 1) / 24
    return rectangle_nsm(s * math.exp(2 * beta * c))


def rectangle_slope_check(s: float = 2.0, beta: float = 0.01) -> dict:
    """Finite-difference slope against the first-order expansion, no sampling."""
    g0 = rectangle_nsm(s)
    R = np.diag([1 / 12, s * s / 12])
    pred = first_order_slope(R, s)
    out = {"s": s, "beta": beta, "predicted": pred}
    for b in (beta, -beta):
        fd = (rectangle_perturbed_nsm(s, b) - g0) / b
        out[f"fd{'+' if b > 0 else '-'}"] = fd
    out["rel_err"] = max(abs(out["fd+"] - pred), abs(out["fd-"] - pred)) / abs(pred)
    return out


def verdict(baseline: float, se_b: float, perturbed: float, se_p: float, k: float = SIGMAS) -> str:
    if perturbed + k * se_p < baseline - k * se_b:
        return "improved"
    if perturbed - k * se_p > baseline + k * se_b:
        return "not-improved"
    return "inconclusive"


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    parameters: dict
    baseline_G: float
    baseline_se: float
    perturbed_G: float
    perturbed_se: float
    verdict: str
    seed: int
    details: dict = field(default_factory=dict)

    @property
    def difference(self) -> float:
        return self.perturbed_G - self.baseline_G

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def whitening_experiment(B, beta: float, samples: int = 100_000, seed: int = 0,
                         workers: int = 1) -> ExperimentReport:
    """Compare G of a lattice with G of its image under ``exp(beta Rbar)``.

    ``Rbar`` is the traceless part of the estimated error correlation. Both
    estimates use the same seed. For small negative ``beta`` and a
    non-white lattice the perturbed NSM is smaller.
    """
    g = _basis_of(B)
    base = estimate_moments(B, samples, seed, workers)
    Rbar = traceless_part(base.R_hat)
    A = sym_matrix_exp(Rbar, beta)
    Bp = GeneratorMatrix(np.asarray(g.rows) @ A)
    pert = estimate_moments(Bp, samples, seed, workers, decoder=SphereDecoder(Bp))
    v = verdict(base.G_hat, base.se_G, pert.G_hat, pert.se_G)
    details = {
        "Rbar": Rbar, "volume_ratio": volume(Bp) / volume(g),
        "predicted_slope": first_order_slope(base.R_hat, base.volume),
        "perturbed_generator": np.asarray(Bp.rows),
    }
    return ExperimentReport(
        name="whitening", parameters={"beta": beta, "samples": samples, "lattice": getattr(B, "name", "custom")},
        baseline_G=base.G_hat, baseline_se=base.se_G, perturbed_G=pert.G_hat, perturbed_se=pert.se_G,
        verdict=v, seed=seed, details=details,
    )


def _nsm_and_se(L, samples, seed, workers):
    if isinstance(L, Lattice) and L.best_nsm is not None:
        return L.best_nsm, 0.0
    est = estimate_moments(L, samples, seed, workers)
    return est.G_hat, est.se_G


def saddle_generator(B1, B2, H, epsilon: float, a: float) -> GeneratorMatrix:
    """``[[B1, 0], [epsilon H, a B2]]``."""
    g1, g2 = _basis_of(B1), _basis_of(B2)
    n1, n2 = g1.n, g2.n
    H = np.asarray(H, dtype=float).reshape(n2, n1)
    M = np.zeros((n1 + n2, n1 + n2))
    M[:n1, :n1] = g1.rows
    M[n1:, :n1] = epsilon * H
    M[n1:, n1:] = a * np.asarray(g2.rows)
    return GeneratorMatrix(M)


def saddle_experiment(B1, B2, H_direction, epsilon: float = 0.1, samples: int = 100_000,
                      seed: int = 0, workers: int = 1) -> ExperimentReport:
    """Shear the optimal product ``B1 x a_opt B2`` by ``epsilon * H`` and compare NSMs.

    The baseline is the closed-form NSM of the optimal product (component NSMs
    from the catalog when known, otherwise estimated).
    """
    g1, g2 = _basis_of(B1), _basis_of(B2)
    n1, n2 = g1.n, g2.n
    G1, s1 = _nsm_and_se(B1, samples, seed, workers)
    G2, s2 = _nsm_and_se(B2, samples, seed, workers)
    V1, V2 = volume(g1), volume(g2)
    a = optimal_scale(n1, V1, G1, n2, V2, G2)
    n = n1 + n2
    base = G1 ** (n1 / n) * G2 ** (n2 / n)
    base_se = base * math.hypot(n1 / n * s1 / G1, n2 / n * s2 / G2)
    M = saddle_generator(g1, g2, H_direction, epsilon, a)
    params = {"epsilon": epsilon, "a_opt": a, "samples": samples, "H": np.asarray(H_direction, dtype=float)}
    if epsilon == 0:
        # the sheared lattice is the product itself
        return ExperimentReport("saddle", _jsonable(params), base, base_se, base, base_se,
                                "inconclusive", seed, {"generator": np.asarray(M.rows)})
    est = estimate_moments(M, samples, seed, workers, decoder=SphereDecoder(M))
    v = verdict(base, base_se, est.G_hat, est.se_G)
    scale_check = {f"a_opt*{f}": g_of_scale(n1, V1, G1, n2, V2, G2, a * f) for f in (0.95, 1.05)}
    return ExperimentReport(
        name="saddle", parameters=_jsonable(params), baseline_G=base, baseline_se=base_se,
        perturbed_G=est.G_hat, perturbed_se=est.se_G, verdict=v, seed=seed,
        details={"generator": np.asarray(M.rows), "scale_perturbations": scale_check},
    )


def product_factorization_check(parts, samples: int = 100_000, seed: int = 0, points: int = 10_000,
                                workers: int = 1) -> ExperimentReport:
    """Componentwise decoding vs. sphere decoding of the assembled product.

    ``parts`` is a list of ``(lattice, scale)`` pairs (``scale=None`` means
    optimal) or a composition string. Checks, in order: equal squared errors
    on ``points`` random vectors; E of the product equals the sum of the
    component E's; the off-diagonal blocks of R vanish; and, for optimal
    scales, the per-dimension error is the same in every block.
    """
    plan = plan_product(_as_items(parts))
    pairs = plan.component_pairs()
    B = product_generator([(L.basis, a) for L, a in pairs])
    comp = ProductDecoder(pairs)
    sphere = SphereDecoder(B)
    n = B.n
    # random points spread over a few fundamental cells
    X = (uniform_block(seed ^ 0x5A5A, 0, points, n) * 4 - 2) @ np.asarray(B.rows)
    _, P1 = comp.decode(X)
    _, P2 = sphere.decode(X)
    d1 = np.sum((X - P1) ** 2, axis=1)
    d2 = np.sum((X - P2) ** 2, axis=1)
    max_diff = float(np.max(np.abs(d1 - d2)))

    est = estimate_moments(plan, samples, seed, workers, decoder=comp)
    # components are estimated unscaled (independent seeds) and E rescaled by a^2
    comps = [estimate_moments(L, samples, seed + 1 + j, workers) for j, (L, _) in enumerate(pairs)]
    E_sum = math.fsum(c.E_hat * a * a for c, (_, a) in zip(comps, pairs))
    se_sum = math.sqrt(math.fsum((c.se_E * a * a) ** 2 for c, (_, a) in zip(comps, pairs)))
    z_E = (est.E_hat - E_sum) / math.hypot(est.se_E, se_sum)

    dims = [L.dim for L, _ in pairs]
    mask = np.ones((n, n), bool)
    per_dim, i = [], 0
    for k in dims:
        mask[i:i + k, i:i + k] = False
        blk = est.R_hat[i:i + k, i:i + k]
        per_dim.append(float(np.trace(blk)) / k)
        i += k
    off = est.R_hat[mask]
    z_off = np.abs(off) / np.maximum(est.se_R[mask], 1e-300) if off.size else np.zeros(0)
    z_off_max = float(z_off.max()) if off.size else 0.0

    per_dim_se = [c.se_E * a * a / c.n for c, (_, a) in zip(comps, pairs)]
    per_dim_comp = [c.E_hat * a * a / c.n for c, (_, a) in zip(comps, pairs)]
    spread = max(per_dim_comp) - min(per_dim_comp)
    spread_se = math.sqrt(max(per_dim_se) ** 2 + min(per_dim_se) ** 2) if len(pairs) > 1 else 0.0

    ok = (max_diff <= 1e-9 and abs(z_E) <= SIGMAS and z_off_max <= SIGMAS
          and (not plan.optimal or spread <= SIGMAS * spread_se + 1e-15))
    norm = n * volume(B) ** (2 / n)
    return ExperimentReport(
        name="product-factorization", parameters={"composition": plan.name, "samples": samples, "points": points},
        baseline_G=E_sum / norm, baseline_se=se_sum / norm, perturbed_G=est.G_hat, perturbed_se=est.se_G,
        verdict="consistent" if ok else "inconsistent", seed=seed,
        details={
            "decode_max_abs_diff": max_diff, "E_product": est.E_hat, "E_sum": E_sum, "z_E": z_E,
            "offblock_max_sigma": z_off_max, "per_dim_E_product": per_dim, "per_dim_E_components": per_dim_comp,
            "per_dim_spread": spread, "per_dim_spread_se": spread_se, "optimal": plan.optimal,
        },
    )


def _as_items(parts):
    if isinstance(parts, str):
        return parse_composition(parts)
    return list(parts)
