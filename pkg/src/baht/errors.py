"""Exception hierarchy.

Errors split into two families so the command line can map them to exit
codes: :class:`UsageError` for bad input (exit 2) and
:class:`NumericalError` for failures of a numerical method (exit 3).
"""


class BahtError(Exception):
    """Base class for all package errors."""


class UsageError(BahtError, ValueError):
    pass


class NumericalError(BahtError, ArithmeticError):
    pass


class DimensionError(UsageError):
    pass


class RoleViolationError(UsageError):
    """A matrix is not Hermitian/unitary within the required tolerance."""


class CommensurabilityError(UsageError):
    """A duration is not an integer multiple of the base time unit."""


class UnknownSequenceError(UsageError, KeyError):
    pass


class StateNormError(UsageError):
    pass


class SequenceParseError(UsageError):
    """Malformed sequence file.

    Carries a 1-based ``line`` and ``column`` when the position is known.
    """

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{where}{message}")

    def as_dict(self):
        return {"line": self.line, "column": self.column, "message": self.message}


class BranchCutError(NumericalError):
    """An eigenphase lies too close to +-pi for a safe principal logarithm."""


class LinearityError(NumericalError):
    """The coupling factor still depends on the perturbation amplitude."""


class BudgetError(NumericalError):
    """The estimated cost of a Magnus term exceeds the configured cap."""

    def __init__(self, estimate, budget):
        self.estimate = estimate
        self.budget = budget
        super().__init__(
            f"estimated work {estimate:.3g} matrix products exceeds budget {budget:.3g}"
        )
