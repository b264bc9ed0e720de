"""Exception hierarchy.

``ConfigError`` covers misuse (bad input, bad config); everything deriving
from ``DomainError`` means the physics or numerics refused the request.
The CLI maps these onto distinct exit codes.
"""


class CavlabError(Exception):
    """Base class for all package errors."""


class ConfigError(CavlabError, ValueError):
    """Invalid configuration or arguments."""


class DomainError(CavlabError):
    """A well-formed request that the domain cannot satisfy."""


class NoSolutions(DomainError):
    pass


class ClassTooSmall(DomainError):
    pass


class Case5Found(DomainError):
    """A class with none of the three parity invariants held constant."""


class AsymmetryTooLarge(DomainError):
    pass


class DegenerateSplitting(DomainError):
    pass


class NoSymmetry(DomainError):
    pass


class OverlapTooSmall(DomainError):
    pass


class MappingNotInvertible(DomainError):
    pass


class SolverFailure(DomainError):
    pass


class ResolutionError(DomainError):
    pass


class ClusterAmbiguous(DomainError):
    pass


class GridNotReflectionSymmetric(DomainError):
    pass
