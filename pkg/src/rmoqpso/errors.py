"""Exception types raised across the package."""


class RmoQpsoError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(RmoQpsoError, ValueError):
    pass


class InvalidWeights(RmoQpsoError, ValueError):
    pass


class NonControllable(RmoQpsoError):
    pass


class NoConvergence(RmoQpsoError):
    pass


class ZeroInitialDeviation(RmoQpsoError, ValueError):
    pass


class BadSource(RmoQpsoError, ValueError):
    pass


class WrongBenchmark(RmoQpsoError, ValueError):
    pass


class MixedBenchmarks(RmoQpsoError, ValueError):
    pass


class InfeasibleCandidate(RmoQpsoError, ValueError):
    pass


class UnknownMethod(RmoQpsoError, ValueError):
    pass


class SchemaError(RmoQpsoError, ValueError):
    pass


class EmptyGrid(RmoQpsoError, ValueError):
    pass
