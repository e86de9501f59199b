"""Lattice quantizers: closest-point decoding, Monte Carlo second moments and product constructions."""

from .catalog import Lattice, get_lattice, golden_table
from .decode import closest_point, quantize_suboptimal, sphere_decode
from .errors import LatticeError
from .linalg import GeneratorMatrix, volume

__version__ = "0.1.0"

__all__ = [
    "Lattice", "get_lattice", "golden_table", "closest_point", "quantize_suboptimal",
    "sphere_decode", "LatticeError", "GeneratorMatrix", "volume",
]
