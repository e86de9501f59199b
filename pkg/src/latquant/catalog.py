"""Named lattice registry and the golden constants of the best-known-quantizer table.

Lattice names follow the table: ``Z``, ``A2``, ``A3*``, ``D4``, ``D5*``,
``E6*``, ``E7*``, ``E8``, ``AE9``, ``D10+``, ``A11^3``, ``K12``, ``L16``,
``L24`` and the families ``Zn``, ``An``, ``An*``, ``Dn``, ``Dn*``, ``Dn+``,
``E6``, ``E7``.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import constructions as C
from .decode import FamilyDecoder, SphereDecoder
from .errors import NoGeneratorError, UnknownLatticeError
from .linalg import GeneratorMatrix, read_matrix, volume, write_matrix

DECODER_TAGS = ("cubic", "d-family", "a-family", "coset-union", "generic-sphere", "product")

# Closed forms for the classical lattices whose NSM is known exactly; the
# table prints them rounded to nine decimals.
EXACT_NSM = {
    "Z": 1 / 12,
    "A2": 5 / (36 * math.sqrt(3)),
    "A3*": 19 / (192 * 2 ** (1 / 3)),
    "D4": 13 / (120 * math.sqrt(2)),
    "E8": 929 / 12960,
}


@dataclass(frozen=True)
class GoldenConstant:
    name: str
    dim: int
    nsm: float
    precision: int
    source: str
    flags: tuple[str, ...] = ()

    @property
    def tolerance(self) -> float:
        """Half a unit in the last printed digit."""
        return 0.5 * 10.0 ** -self.precision


@dataclass(frozen=True, eq=False)
class Lattice:
    name: str
    dim: int
    basis: GeneratorMatrix | None
    golden_nsm: float | None = None
    golden_note: str = ""
    decoder: str | None = None
    exact_nsm: float | None = None
    factory: Callable[[], object] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.basis is not None and self.basis.n != self.dim:
            raise ValueError(f"{self.name}: basis dimension {self.basis.n} != {self.dim}")
        if self.golden_nsm is not None and not 0 < self.golden_nsm <= 1 / 12 + 1e-12:
            raise ValueError(f"{self.name}: golden NSM {self.golden_nsm} outside (0, 1/12]")

    @property
    def has_decoder(self) -> bool:
        return self.basis is not None and (self.factory is not None or self.decoder == "generic-sphere")

    @property
    def volume(self) -> float:
        if self.basis is None:
            raise NoGeneratorError(f"lattice {self.name} has no generator")
        return volume(self.basis)

    @property
    def best_nsm(self) -> float | None:
        """Most precise NSM value available (exact closed form, else golden)."""
        return self.exact_nsm if self.exact_nsm is not None else self.golden_nsm

    @cached_property
    def _decoder(self):
        if self.basis is None:
            raise NoGeneratorError(f"lattice {self.name} is a golden-constant-only entry")
        if self.factory is not None:
            return self.factory()
        return SphereDecoder(self.basis)

    def make_decoder(self):
        return self._decoder


def _read_table():
    text = resources.files("latquant").joinpath("data/table1.csv").read_text()
    out = []
    for row in csv.DictReader(text.splitlines()):
        out.append(GoldenConstant(
            name=row["name"], dim=int(row["dim"]), nsm=float(row["nsm"]),
            precision=int(row["precision"]), source=row["table_column"],
            flags=tuple(row["flags"].split()),
        ))
    return tuple(out)


_TABLE = _read_table()


def golden_table() -> list[GoldenConstant]:
    """All constants of the best-known-quantizer table, n = 1..48."""
    return list(_TABLE)


def golden_column(source: str) -> dict[int, GoldenConstant]:
    return {g.dim: g for g in _TABLE if g.source == source}


_REPORTED = {g.name: g for g in _TABLE if g.source == "reported"}

DATA_DIR = Path(str(resources.files("latquant").joinpath("data/lattices")))


def _golden(name: str):
    g = _REPORTED.get(name)
    if g is None:
        return None, ""
    return g.nsm, f"table, {g.precision} decimals"


def _make(name, dim, basis, decoder, factory=None, golden=None, note=None):
    g, n = _golden(name)
    if golden is not None:
        g, n = golden, note
    return Lattice(name=name, dim=dim, basis=basis, golden_nsm=g, golden_note=n, decoder=decoder,
                   exact_nsm=EXACT_NSM.get(name), factory=factory)


def _family(basis, base, frame=None, glue=None):
    return lambda: FamilyDecoder(basis, base, frame, glue)


def _build(name: str) -> Lattice:
    m = re.fullmatch(r"Z(\d*)", name)
    if m:
        n = int(m.group(1) or 1)
        B = C.cubic(n)
        key = "Z" if n == 1 else f"Z{n}"
        lat = _make(key, n, B, "cubic", _family(B, "cubic"), golden=1 / 12,
                    note="exact: cube Voronoi cell")
        return Lattice(**{**lat.__dict__, "exact_nsm": 1 / 12})
    m = re.fullmatch(r"A(\d+)(\*?)", name)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise UnknownLatticeError(name)
        if m.group(2):
            B, frame, glue = C.an_dual(n)
            return _make(name, n, B, "coset-union", _family(B, "a-family", frame, glue))
        B, frame = C.an(n)
        return _make(name, n, B, "a-family", _family(B, "a-family", frame))
    m = re.fullmatch(r"D(\d+)([*+]?)", name)
    if m:
        n, kind = int(m.group(1)), m.group(2)
        if n < 2:
            raise UnknownLatticeError(name)
        if kind == "*":
            B = C.dn_dual(n)
            glue = np.vstack([np.zeros(n), np.full(n, 0.5)])
            return _make(name, n, B, "coset-union", _family(B, "cubic", glue=glue))
        if kind == "+":
            if n % 2:
                raise UnknownLatticeError(f"{name}: D_n^+ needs even n")
            B = C.dn_plus(n)
            glue = np.vstack([np.zeros(n), np.full(n, 0.5)])
            return _make(name, n, B, "coset-union", _family(B, "d-family", glue=glue))
        B = C.dn(n)
        return _make(name, n, B, "d-family", _family(B, "d-family"))
    if name in ("E8", "E8*"):
        B = C.dn_plus(8)
        glue = np.vstack([np.zeros(8), np.full(8, 0.5)])
        return _make("E8", 8, B, "coset-union", _family(B, "d-family", glue=glue))
    m = re.fullmatch(r"E([67])(\*?)", name)
    if m:
        n = int(m.group(1))
        B = C.root_lattice("E", n)
        if m.group(2):
            B = C.dual(B)
        return _make(name, n, B, "generic-sphere")
    if name == "K12":
        return _make(name, 12, C.coxeter_todd(), "generic-sphere")
    if name in ("L16", "BW16"):
        return _make("L16", 16, C.barnes_wall16(), "generic-sphere")
    if name in ("L24", "Leech"):
        return _make("L24", 24, C.leech24(), "generic-sphere")
    if name in _REPORTED:
        # external lattices (AE9, A11^3): generator only if a data file was supplied
        path = DATA_DIR / f"{name}.txt"
        g = _REPORTED[name]
        if path.exists():
            B = read_matrix(path)
            return _make(name, B.n, B, "generic-sphere")
        return _make(name, g.dim, None, None)
    raise UnknownLatticeError(f"unknown lattice {name!r}")


@lru_cache(maxsize=None)
def get_lattice(name: str) -> Lattice:
    """Look up (or construct) a named lattice."""
    return _build(name.strip())


def table_lattice_names() -> list[str]:
    return [g.name for g in _TABLE if g.source == "reported"]


def named_lattices() -> list[str]:
    """Lattices with dedicated constructions, in table order."""
    return ["Z", "A2", "A3*", "D4", "D5*", "E6*", "E7*", "E8", "AE9", "D10+", "A11^3", "K12", "L16", "L24"]


def lattice_from_matrix(B, name: str = "custom", golden_nsm: float | None = None) -> Lattice:
    """Wrap an arbitrary generator as a sphere-decoded lattice."""
    B = B if isinstance(B, GeneratorMatrix) else GeneratorMatrix(B)
    return Lattice(name=name, dim=B.n, basis=B, golden_nsm=golden_nsm, decoder="generic-sphere")


def export_matrices(directory) -> list[Path]:
    """Write every constructed named lattice in the matrix text format."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = []
    for name in named_lattices():
        L = get_lattice(name)
        if L.basis is None:
            continue
        p = d / f"{name}.txt"
        write_matrix(L.basis, p)
        out.append(p)
    return out
