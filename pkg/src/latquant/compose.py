"""Product lattices, optimal relative scaling and lamination."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .catalog import Lattice, get_lattice
from .decode import ProductDecoder
from .errors import CompositionSyntaxError, DimensionMismatchError, InconsistentMomentsError
from .linalg import GeneratorMatrix, as_generator, block_diag

CROSS_RTOL = 1e-9


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ValueError(f"{k} must be positive, got {v}")


def g_of_scale(n1, V1, G1, n2, V2, G2, a):
    """NSM of ``L1 x a L2`` as a function of the relative scale ``a``."""
    _positive(n1=n1, V1=V1, G1=G1, n2=n2, V2=V2, G2=G2, a=a)
    n = n1 + n2
    t1 = (n1 / n) * a ** (-2 * n2 / n) * V1 ** (2 * n2 / (n * n1)) * V2 ** (-2 / n) * G1
    t2 = (n2 / n) * a ** (2 * n1 / n) * V1 ** (-2 / n) * V2 ** (2 * n1 / (n * n2)) * G2
    return t1 + t2


def _check_triple(n, V, G, E, label):
    if E is None:
        return
    G_from_E = E / (n * V ** (2 / n))
    if abs(G_from_E - G) > CROSS_RTOL * G:
        raise InconsistentMomentsError(
            f"{label}: E={E} and V={V} give G={G_from_E}, but G={G} was supplied")


def optimal_scale(n1, V1, G1, n2, V2, G2, E1=None, E2=None) -> float:
    """Relative scale of the second factor that minimizes the product NSM.

    Evaluates both the volume form and the mean-square-error form and insists
    they agree. ``E1``/``E2`` default to the values implied by ``(n, V, G)``.
    """
    _positive(n1=n1, V1=V1, G1=G1, n2=n2, V2=V2, G2=G2)
    _check_triple(n1, V1, G1, E1, "first factor")
    _check_triple(n2, V2, G2, E2, "second factor")
    if E1 is None:
        E1 = n1 * G1 * V1 ** (2 / n1)
    if E2 is None:
        E2 = n2 * G2 * V2 ** (2 / n2)
    a_g = V1 ** (1 / n1) / V2 ** (1 / n2) * math.sqrt(G1 / G2)
    a_e = math.sqrt(n2 * E1 / (n1 * E2))
    if abs(a_g - a_e) > CROSS_RTOL * a_g:
        raise InconsistentMomentsError(f"scale formulas disagree: {a_g} vs {a_e}")
    return a_g


def optimal_product_nsm(parts: Sequence[tuple[int, float]]) -> float:
    """``prod G_i^(n_i/n)``, the NSM of an optimally scaled product."""
    parts = list(parts)
    if not parts:
        raise ValueError("empty product")
    n = sum(k for k, _ in parts)
    for k, g in parts:
        _positive(n_i=k, G_i=g)
    # log-sum keeps many-factor products accurate
    return math.exp(math.fsum(k * math.log(g) for k, g in parts) / n)


def product_generator(parts) -> GeneratorMatrix:
    """Block-diagonal generator of ``a_1 L_1 x a_2 L_2 x ...``."""
    blocks = []
    for B, a in parts:
        _positive(scale=a)
        blocks.append(np.asarray(as_generator(B).rows) * a)
    return GeneratorMatrix(block_diag(*blocks))


def laminate_generator(B1, h, a) -> GeneratorMatrix:
    """Generator ``[[B1, 0], [h, a]]``: copies of ``L1`` stacked at spacing ``a``, shifted by ``h``."""
    g = as_generator(B1)
    h = np.asarray(h, dtype=float).ravel()
    if h.shape != (g.n,):
        raise DimensionMismatchError(f"offset h must have length {g.n}, got {h.shape[0]}")
    _positive(a=a)
    M = np.zeros((g.n + 1, g.n + 1))
    M[:g.n, :g.n] = g.rows
    M[g.n, :g.n] = h
    M[g.n, g.n] = a
    return GeneratorMatrix(M)


def lamination_bound(G1: float, n: int) -> float:
    """Upper bound on the NSM of a lattice laminated from an (n-1)-dimensional one."""
    if n < 2:
        raise ValueError("lamination needs n >= 2")
    _positive(G1=G1)
    return G1 ** (1 - 1 / n) / 12 ** (1 / n)


@dataclass(frozen=True)
class PlanPart:
    name: str
    n: int
    V: float
    G: float
    lattice: Lattice | None = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class ProductPlan:
    parts: tuple[PlanPart, ...]
    scales: tuple[float, ...]
    predicted_G: float
    predicted_E_ratio: float
    optimal: bool

    @property
    def dim(self) -> int:
        return sum(p.n for p in self.parts)

    @property
    def name(self) -> str:
        return "*".join(p.name if s == 1 else f"{p.name}@{s:.12g}" for p, s in zip(self.parts, self.scales))

    @property
    def basis(self) -> GeneratorMatrix | None:
        if any(p.lattice is None or p.lattice.basis is None for p in self.parts):
            return None
        return product_generator([(p.lattice.basis, s) for p, s in zip(self.parts, self.scales)])

    def make_decoder(self):
        return ProductDecoder([(p.lattice, s) for p, s in zip(self.parts, self.scales)])

    def component_pairs(self):
        return [(p.lattice, s) for p, s in zip(self.parts, self.scales)]

    def to_dict(self) -> dict:
        return {
            "composition": self.name, "n": self.dim, "optimal": self.optimal,
            "parts": [{"name": p.name, "n": p.n, "V": p.V, "G": p.G, "scale": s}
                      for p, s in zip(self.parts, self.scales)],
            "predicted_G": self.predicted_G, "E_per_dim": self.predicted_E_ratio,
        }


def _nsm_of(L: Lattice) -> float:
    g = L.best_nsm
    if g is None:
        raise ValueError(f"no NSM known for {L.name}; estimate it first and pass it explicitly")
    return g


def _part_of(L: Lattice, G=None) -> PlanPart:
    V = L.volume if L.basis is not None else 1.0
    return PlanPart(L.name, L.dim, V, _nsm_of(L) if G is None else G, L)


def plan_product(items, nsm: dict | None = None) -> ProductPlan:
    """Scale factors and predicted NSM for a product.

    ``items`` holds lattices or names, optionally paired with an explicit scale
    (``None`` = optimal). The first factor defaults to scale 1; unscaled factors
    are scaled so every factor has the same per-dimension error as the first.
    Constant-only lattices are taken at unit volume.
    """
    nsm = nsm or {}
    parts, given = [], []
    for it in items:
        L, a = it if isinstance(it, tuple) else (it, None)
        L = get_lattice(L) if isinstance(L, str) else L
        parts.append(_part_of(L, nsm.get(L.name)))
        given.append(a)
    if not parts:
        raise ValueError("empty product")
    a0 = 1.0 if given[0] is None else float(given[0])
    p0 = parts[0]
    scales = [a0]
    # fold left to right: each new factor is scaled against the product built so far
    acc_n, acc_V, acc_G = p0.n, a0 ** p0.n * p0.V, p0.G
    for p, a in zip(parts[1:], given[1:]):
        if a is None:
            a = optimal_scale(acc_n, acc_V, acc_G, p.n, p.V, p.G)
        a = float(a)
        _positive(scale=a)
        scales.append(a)
        acc_G = g_of_scale(acc_n, acc_V, acc_G, p.n, p.V, p.G, a)
        acc_V *= a ** p.n * p.V
        acc_n += p.n
    optimal = all(a is None for a in given[1:])
    E_total = math.fsum(s ** 2 * p.n * p.G * p.V ** (2 / p.n) for p, s in zip(parts, scales))
    G = acc_G
    if optimal:
        G = optimal_product_nsm([(p.n, p.G) for p in parts])
        assert abs(G - acc_G) <= 1e-10 * G, (G, acc_G)
    return ProductPlan(tuple(parts), tuple(scales), G, E_total / acc_n, optimal)


_NAME = re.compile(r"\s*([A-Za-z][A-Za-z0-9^+]*)(\*(?=\*|@|\s*$))?(?:@([0-9.]+(?:[eE][+-]?[0-9]+)?))?\s*")


def parse_composition(text: str) -> list[tuple[str, float | None]]:
    """Split ``K12*Z``, ``L24*L16*Z``, ``A3**Z`` or ``D4@2*Z`` into ``(name, scale)`` pairs.

    A ``*`` directly after a name is part of it (a dual) when it is followed by
    another ``*``, an ``@`` or the end of the string. ``⊗`` is accepted for ``*``.
    """
    if "⊗" in text:
        # with explicit cross symbols every '*' belongs to a name
        out = []
        for t in text.replace(" ", "").split("⊗"):
            name, _, a = t.partition("@")
            if not name:
                raise CompositionSyntaxError(f"empty factor in {text!r}")
            out.append((name, float(a) if a else None))
        return out
    s = text.strip()
    out = []
    pos = 0
    while True:
        m = _NAME.match(s, pos)
        if not m or m.end() == pos:
            raise CompositionSyntaxError(f"cannot parse composition {text!r} at position {pos}")
        name = m.group(1) + (m.group(2) or "")
        scale = float(m.group(3)) if m.group(3) else None
        if scale is not None and not scale > 0:
            raise CompositionSyntaxError(f"scale for {name} must be positive")
        out.append((name, scale))
        pos = m.end()
        if pos == len(s):
            return out
        if s[pos] != "*":
            raise CompositionSyntaxError(f"expected '*' at position {pos} in {text!r}")
        pos += 1
        if pos == len(s):
            raise CompositionSyntaxError(f"dangling '*' in {text!r}")


def product_lattice(spec, nsm: dict | None = None) -> ProductPlan:
    """Plan for a composition string or list of factors."""
    items = parse_composition(spec) if isinstance(spec, str) else list(spec)
    return plan_product(items, nsm)


def format_composition(names: Sequence[str]) -> str:
    """Canonical string: factors by decreasing dimension, then name."""
    dims = {nm: get_lattice(nm).dim for nm in names}
    return "*".join(sorted(names, key=lambda nm: (-dims[nm], nm)))


__all__ = [
    "g_of_scale", "optimal_scale", "optimal_product_nsm", "product_generator",
    "laminate_generator", "lamination_bound", "ProductPlan", "PlanPart", "plan_product",
    "parse_composition", "product_lattice", "format_composition",
]
