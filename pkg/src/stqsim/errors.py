"""Exception types shared across the package.

The CLI maps ConfigError (and subclasses of ValueError raised during setup)
to exit code 2 and NumericalFailure to exit code 3.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad parameter values, malformed config files,
    unknown presets, or a schedule/kernel combination that cannot be run."""


class DimensionError(ValueError):
    """Operator has the wrong shape for the requested operation."""


class HermiticityError(ValueError):
    """A Hermiticity precondition was violated.

    The measured deviation (max |M - M^dag|, relative to the largest entry)
    is available as ``error``.
    """

    def __init__(self, message: str, error: float):
        super().__init__(f"{message} (hermiticity error {error:.3e})")
        self.error = error


class DomainError(ValueError):
    """Scalar argument outside its admissible range, e.g. a time outside the
    schedule or a negative frequency."""


class NumericalFailure(RuntimeError):
    """A numerical routine could not meet its accuracy contract."""


class DiagnosticsBreach(NumericalFailure):
    """The integrator aborted because state diagnostics left tolerance.

    ``report`` is a dict with the offending time and the diagnostic values;
    it usually means the step size is too large or the coupling is outside
    the weak-coupling regime.
    """

    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report
