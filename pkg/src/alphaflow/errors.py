"""Exception hierarchy shared across the package."""


class AlphaFlowError(Exception):
    """Base class for all package errors."""


# combinatorics
class ComplexError(AlphaFlowError, ValueError):
    pass


class NonManifold(ComplexError):
    pass


class BadWeight(ComplexError):
    pass


class DegenerateFace(ComplexError):
    pass


class DuplicateFace(ComplexError):
    pass


class DegenerateTet(ComplexError):
    """Repeated vertex in a tetrahedron, or a tetrahedron with no volume."""


class DuplicateTet(ComplexError):
    pass


class EmptyOrFullSubset(ComplexError):
    pass


class EmptySubset(EmptyOrFullSubset):
    pass


# geometry
class DegenerateTriangle(AlphaFlowError, ValueError):
    pass


class NonpositiveRadius(AlphaFlowError, ValueError):
    pass


class InadmissibleMetric(AlphaFlowError, ValueError):
    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class FDNearBoundary(AlphaFlowError):
    pass


class DualPointOutside(AlphaFlowError):
    pass


class AreaElementFailure(AlphaFlowError):
    pass


# spectral
class NotPSD(AlphaFlowError):
    pass


class KernelMismatch(AlphaFlowError):
    pass


class EvaluationFailure(AlphaFlowError):
    pass


# flows
class ConfigError(AlphaFlowError, ValueError):
    pass


class QuadratureFailure(AlphaFlowError):
    pass


class AlphaExcluded(AlphaFlowError, ValueError):
    pass


class NotConstantCurvature(AlphaFlowError):
    pass


class LeftAdmissibleRegion(AlphaFlowError):
    """A flow step could not be completed inside the admissible metric space.

    ``t`` and ``state`` hold the last accepted (valid) point.
    """

    def __init__(self, message, t=None, state=None, trace=None):
        super().__init__(message)
        self.t = t
        self.state = state
        self.trace = trace


# ode engine
class GuardRejectionAtMinStep(AlphaFlowError):
    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state
        self.trajectory = None


class MaxStepsExceeded(AlphaFlowError):
    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


# checkers
class TooManyVertices(AlphaFlowError, ValueError):
    pass
