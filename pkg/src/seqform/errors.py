"""Exception and warning types shared across the package."""


class SeqformError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(SeqformError, ValueError):
    """An operand has the wrong length or shape."""


class ValidationError(SeqformError, ValueError):
    """A sequence-form game failed structural validation.

    Carries the list of violations so callers can report them one by one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid sequence-form game: {detail}")


class StructureError(SeqformError, ValueError):
    """A constraint system or game tree is malformed."""


class CompileError(SeqformError, ValueError):
    """An extensive-form game cannot be compiled to sequence form."""


class SizeError(SeqformError, ValueError):
    """A brute-force computation would exceed its size guard."""


class StrategyError(SeqformError, ValueError):
    """A strategy table is missing or malformed for some information set."""


class InitializationError(SeqformError, RuntimeError):
    """The solver could not be initialized (step size estimation failed)."""


class DivergenceError(SeqformError, ArithmeticError):
    """The iteration produced a non-finite value."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class FileFormatError(SeqformError, ValueError):
    """A JSON document does not have the expected structure."""


class FeasibilityWarning(UserWarning):
    """Strategies handed to an evaluator are noticeably infeasible."""
