"""Exception hierarchy for tinv."""


class TinvError(Exception):
    """Base class for every error raised by the verifier stages."""


class ModelSyntaxError(TinvError, ValueError):
    """Malformed model or formula text."""

    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{line}:{column}: {message}")


class ModelSemanticError(TinvError, ValueError):
    """Well-formed text that does not describe a valid system."""


class DimensionMismatchError(TinvError, ValueError):
    """Two zones over different clock sets were combined."""


class DBMOverflowError(TinvError, ArithmeticError):
    """A bound left the representable range."""


class ReachLimitExceeded(TinvError):
    """Zone-graph exploration produced more states than allowed."""


class TrapLimitExceeded(TinvError):
    """Trap enumeration produced more traps than allowed."""


class GlueSizeExceeded(TinvError):
    """A glue formula grew past the configured size limit."""


class RewriteLimitExceeded(TinvError):
    """Restricted-form rewriting did not converge within the step limit."""


class HistoryExtensionError(TinvError, ValueError):
    """A component cannot be extended with history clocks."""


class HistoryPropertyError(TinvError, ValueError):
    """A property mentions history clocks without the opt-in flag."""


class SymmetryError(TinvError, ValueError):
    """The declared symmetry does not hold for the model or the property."""


class SolverUnavailable(TinvError):
    """The external SMT solver is not installed."""


class CubeBudgetExceeded(TinvError):
    """Cube enumeration needed more branch nodes than the budget allows."""
