"""Exception hierarchy shared by all latquant modules."""


class LatticeError(Exception):
    """Base class for every error raised by latquant."""


class SingularMatrixError(LatticeError, ValueError):
    pass


class NotSymmetricError(LatticeError, ValueError):
    pass


class DimensionMismatchError(LatticeError, ValueError):
    pass


class UnknownLatticeError(LatticeError, KeyError):
    pass


class NoGeneratorError(LatticeError):
    """The lattice is known only through its golden NSM constant."""


class SearchBudgetExceeded(LatticeError, RuntimeError):
    """Sphere decoding visited more nodes than the configured cap."""


class InconsistentMomentsError(LatticeError, ValueError):
    """An (E, G, V) triple violates G = E / (n V^(2/n))."""


class CompositionSyntaxError(LatticeError, ValueError):
    pass
