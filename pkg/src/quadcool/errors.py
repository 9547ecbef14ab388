"""Exception types raised by quadcool."""


class QuadcoolError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimensionError(QuadcoolError, ValueError):
    pass


class DimensionMismatchError(QuadcoolError, ValueError):
    pass


class StabilityError(QuadcoolError, ValueError):
    """Coupling violates omega_m + 4 s g > 0 for some photon number s."""

    def __init__(self, message, photon_numbers=()):
        super().__init__(message)
        self.photon_numbers = tuple(photon_numbers)


class ParameterRangeError(QuadcoolError, ValueError):
    """Input lies outside the range where accuracy has been validated."""


class InvalidTransitionError(QuadcoolError, ValueError):
    pass


class ConvergenceError(QuadcoolError, ArithmeticError):
    """A truncated series did not reach its tolerance.

    ``partial`` holds the best available value, ``pair`` the offending
    (n, m) transition when raised during rate-matrix assembly.
    """

    def __init__(self, message, partial=None, tail=None, pair=None):
        super().__init__(message)
        self.partial = partial
        self.tail = tail
        self.pair = pair


class DegenerateKineticsError(QuadcoolError, ArithmeticError):
    """The kinetic generator has more than one stationary distribution."""


class StiffnessError(QuadcoolError, ArithmeticError):
    pass


class DivergenceError(QuadcoolError, ValueError):
    pass


class NegativeProbabilityError(QuadcoolError, ValueError):
    pass


class UndefinedStatisticError(QuadcoolError, ArithmeticError):
    """Statistic is undefined because the mean phonon number is zero."""


class NonUniqueSteadyStateError(QuadcoolError, ArithmeticError):
    pass


class SolverError(QuadcoolError, ArithmeticError):
    pass


class ConfigError(QuadcoolError, ValueError):
    """Bad sweep configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
