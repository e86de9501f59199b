"""Zador's upper bound, the tabulated conjectured lower bound, and the best-product table."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .catalog import EXACT_NSM, golden_column
from .compose import format_composition, optimal_product_nsm

N_MAX = 48
# relative slack under which two DP candidates count as equal
TIE_RTOL = 1e-13


def zador_upper(n: int) -> float:
    """``Gamma(1 + n/2)^(2/n) Gamma(1 + 2/n) / (n pi)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return math.exp(2 / n * math.lgamma(1 + n / 2) + math.lgamma(1 + 2 / n)) / (n * math.pi)


def cs_lower(n: int) -> float:
    """Conjectured lower bound, from tabulated values."""
    col = golden_column("lower")
    if n not in col:
        raise ValueError(f"lower bound tabulated only for 1 <= n <= {N_MAX}")
    return col[n].nsm


def reported_seeds(exact: bool = True) -> dict[int, tuple[float, str]]:
    """Best previously reported NSM per dimension, with lattice name.

    With ``exact`` the closed forms replace the rounded table values where known.
    """
    out = {}
    for n, g in golden_column("reported").items():
        v = EXACT_NSM.get(g.name, g.nsm) if exact else g.nsm
        out[n] = (v, g.name)
    return out


@dataclass(frozen=True)
class BoundsRow:
    n: int
    zador_upper: float
    cs_lower: float
    best_reported: float
    reported_name: str
    best_product: float | None
    composition: str
    flags: tuple[str, ...]

    def flag_text(self) -> str:
        return " ".join(self.flags)

    def as_dict(self) -> dict:
        return {
            "n": self.n, "best_reported": self.best_reported, "lattice": self.reported_name,
            "lower": self.cs_lower, "upper": self.zador_upper, "best_product": self.best_product,
            "composition": self.composition, "flags": self.flag_text(),
        }


def _better(c, best):
    g, f = c[0], len(c[1])
    if best is None:
        return True
    if g < best[0] * (1 - TIE_RTOL):
        return True
    return abs(g - best[0]) <= TIE_RTOL * best[0] and f < len(best[1])


def best_product_table(n_max: int = N_MAX, exact: bool = True) -> list[BoundsRow]:
    """Dynamic program over products of the best lattice found in each smaller dimension."""
    if not 1 <= n_max <= N_MAX:
        raise ValueError(f"n_max must be in 1..{N_MAX}")
    seeds = reported_seeds(exact)
    best: dict[int, tuple[float, tuple[str, ...]]] = {}
    rows = []
    for n in range(1, n_max + 1):
        rep, rep_name = seeds[n]
        prod = None
        for n1 in range(1, n // 2 + 1):
            a, b = best[n1], best[n - n1]
            g = optimal_product_nsm([(n1, a[0]), (n - n1, b[0])])
            cand = (g, tuple(sorted(a[1] + b[1])))
            if _better(cand, prod):
                prod = cand
        best[n] = (rep, (rep_name,))
        if prod is not None and prod[0] < rep:
            best[n] = prod
        up = zador_upper(n)
        flags = []
        if prod is not None:
            if prod[0] < rep:
                flags.append("<G")
            if prod[0] < up:
                flags.append("<U")
        rows.append(BoundsRow(
            n=n, zador_upper=up, cs_lower=cs_lower(n), best_reported=rep, reported_name=rep_name,
            best_product=None if prod is None else prod[0],
            composition="" if prod is None else format_composition(prod[1]),
            flags=tuple(flags),
        ))
    return rows


def bounds_row(n: int) -> BoundsRow:
    return best_product_table(n)[-1]
