"""Exception hierarchy shared by all solver modules.

The CLI maps these onto exit codes: parameter/domain problems exit 2,
numeric failures exit 1, detected blow-up exits 3.
"""


class NlsBallError(Exception):
    """Base class for all package errors."""


class ParameterError(NlsBallError):
    """Invalid argument or configuration value."""


class DomainError(ParameterError):
    """A continuation parameter lies outside the admissible range."""


class DegenerateInputError(ParameterError):
    """An input profile carries no usable information (e.g. zero norm)."""


class SolverError(NlsBallError):
    """An iterative solver failed to converge; carries diagnostics."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = dict(diagnostics)


class BracketError(SolverError):
    """No shooting bracket with opposite trajectory classes was found."""


class PrecisionError(SolverError):
    """Bisection exhausted its iteration budget before the tolerance."""


class NoSolutionError(NlsBallError):
    """A selection operation received an empty candidate set."""


class StepSizeError(SolverError):
    """The implicit time step diverged; a smaller dt is required.

    May carry the partial evolution record accumulated before the stall.
    """

    def __init__(self, message, record=None, **diagnostics):
        super().__init__(message, **diagnostics)
        self.record = record


class BlowUpError(NlsBallError):
    """The evolved field exceeded the blow-up cap.

    Carries the hit time and the partial evolution record.
    """

    def __init__(self, message, hit_time, record):
        super().__init__(message)
        self.hit_time = hit_time
        self.record = record
