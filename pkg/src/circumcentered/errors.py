"""Exception types shared across the package."""


class CircumcenteredError(Exception):
    """Base class for all package errors."""


class EmptySet(CircumcenteredError):
    """A projector or reflector was requested onto an empty set."""


class PreconditionViolated(CircumcenteredError):
    pass


class HypothesisViolated(CircumcenteredError):
    """The inputs do not satisfy the hypotheses of the result being checked."""


class CaseNotCovered(CircumcenteredError):
    """No case of the halfspace-pair taxonomy applies to the inputs."""


class InfeasiblePair(CircumcenteredError):
    pass


class InfeasibleIntersection(CircumcenteredError):
    pass


class SamplerFailed(CircumcenteredError):
    pass


class UnknownTheorem(CircumcenteredError, KeyError):
    pass


class DimensionMismatch(CircumcenteredError, ValueError):
    """Vectors of different ambient dimension were mixed in one instance."""
