"""Exception hierarchy shared by all modules."""


class LevelsError(Exception):
    """Base class for every error raised by levels_lab."""


class ParameterError(LevelsError, ValueError):
    """Invalid or inadmissible parameters."""


class ThresholdError(ParameterError):
    """No admissible epsilon exists for the requested Hölder exponent."""


class DomainError(LevelsError, ValueError):
    """Argument outside the domain of a chart or bridge."""


class RangeError(LevelsError, ValueError):
    """Point or index outside the materialized (truncated) model.

    ``needed_k_max`` names the truncation depth that would contain the
    offending point, when one exists.
    """

    def __init__(self, message, needed_k_max=None, prefix=None):
        super().__init__(message)
        self.needed_k_max = needed_k_max
        self.prefix = prefix


class ModelInconsistencyError(LevelsError, RuntimeError):
    """The computed geometry violates an ordering or nesting invariant."""


class ConstructionError(ModelInconsistencyError):
    """A piecewise diffeomorphism could not be assembled."""
