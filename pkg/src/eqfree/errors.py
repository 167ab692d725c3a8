"""Exception hierarchy shared by all eqfree modules."""


class EqfreeError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(EqfreeError, ValueError):
    """Invalid parameters detected before any computation starts."""


class NumericalError(EqfreeError, ArithmeticError):
    """A computation produced unusable numbers."""


class NonFiniteStateError(NumericalError):
    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class StiffnessError(NumericalError):
    """Adaptive step size collapsed below the representable resolution."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class StabilityError(NumericalError):
    """Projective integration blew up.

    ``partial`` holds whatever results were accumulated before the
    failure so callers can inspect the divergent trajectory.
    """

    def __init__(self, message, time=None, partial=None):
        super().__init__(message)
        self.time = time
        self.partial = partial
