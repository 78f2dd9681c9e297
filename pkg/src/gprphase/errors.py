"""Exception hierarchy shared by all modules."""


class GprError(Exception):
    """Base class for every domain error raised by the package."""


class ParameterError(GprError, ValueError):
    """Invalid model or EOS parameters."""


class SingularStateError(GprError, ValueError):
    """State outside the EOS domain (e.g. rho >= 1/b for Peng-Robinson)."""


class InversionError(GprError, ValueError):
    """No admissible root when inverting the EOS."""


class SpinodalError(GprError, ValueError):
    """Negative squared sound speed (mechanically unstable state)."""


class SupercriticalError(GprError, ValueError):
    """Saturation data requested at or above the critical temperature."""


class UnsupportedEosError(GprError, TypeError):
    """Operation not defined for this EOS family."""


class InvalidStateError(GprError, ValueError):
    """Non-physical conserved or primitive state."""


class StepSizeError(GprError, ValueError):
    """Time step violates a stability restriction."""


class MechanicalFailure(GprError, ArithmeticError):
    """The mechanical star system has no admissible solution."""


class InterfaceFailure(GprError, RuntimeError):
    """The interface Riemann problem could not be solved."""


class NotConvergedError(InterfaceFailure):
    """Newton iteration hit its iteration cap."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class ThermoFallbackAtSolution(InterfaceFailure):
    """The converged iterate still needed the EOS temperature fallback."""


class SimulationError(GprError, RuntimeError):
    """A field run produced a non-physical state or invalid setup."""
