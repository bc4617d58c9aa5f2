"""Exception types raised across the package."""


class ForlapError(Exception):
    """Base class for package errors."""


class ConfigurationError(ForlapError, ValueError):
    """Invalid or unsupported configuration (wavelet family, run config...)."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class NumericalError(ForlapError, ArithmeticError):
    """A numerical stage failed (singular system, factorisation failure).

    ``stage`` names the pipeline step that failed, ``diagnostics`` carries
    free-form numbers such as condition estimates.
    """

    def __init__(self, message, stage=None, diagnostics=None):
        super().__init__(message)
        self.stage = stage
        self.diagnostics = dict(diagnostics or {})


class IllConditionedError(NumericalError):
    """Inner-product matrix too ill-conditioned to invert reliably."""

    def __init__(self, message, levels, condition_number):
        super().__init__(
            message,
            stage="a_matrix",
            diagnostics={"J": levels, "condition_number": condition_number},
        )
        self.levels = levels
        self.condition_number = condition_number
