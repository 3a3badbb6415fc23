"""Exception hierarchy shared by every module of the package."""


class AdiabaticSatError(Exception):
    """Base class for all package errors."""


class InvalidClauseError(AdiabaticSatError, ValueError):
    pass


class InvalidParameterError(AdiabaticSatError, ValueError):
    pass


class CapacityError(AdiabaticSatError, ValueError):
    """Requested bit count exceeds the configured enumeration cap."""


class GenerationError(AdiabaticSatError, RuntimeError):
    """Random instance generation exhausted its restart budget."""


class DimensionError(AdiabaticSatError, ValueError):
    pass


class ScrambleError(AdiabaticSatError, ValueError):
    pass


class AccuracyError(AdiabaticSatError, RuntimeError):
    """End-to-end norm drift of an evolution exceeded its limit."""

    def __init__(self, message, drift=None):
        super().__init__(message)
        self.drift = drift


class BudgetError(AdiabaticSatError, RuntimeError):
    """Integrator hit its step cap before reaching the final time."""


class FitError(AdiabaticSatError, ValueError):
    pass


class HuntNotFoundError(AdiabaticSatError, RuntimeError):
    """Doubling search reached its cap without reaching the target probability."""

    def __init__(self, message, probe_log=None):
        super().__init__(message)
        self.probe_log = list(probe_log or [])
