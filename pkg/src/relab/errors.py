"""Exception types shared across the package."""


class RelabError(Exception):
    """Base class for all package errors."""


class ProblemFormatError(RelabError):
    """Malformed problem text or an invalid problem construction."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BudgetExceededError(RelabError):
    """A configured resource guard (expansion cap, enumeration budget) was hit."""


class UnjustifiedRelaxationError(RelabError):
    """A merge or replacement whose strength precondition does not hold."""


class UnsoundRelaxationError(RelabError):
    """A proposed target relaxation that does not absorb every configuration.

    Carries the first non-extendable configuration as ``witness``.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ChainVerificationError(RelabError):
    """A lower-bound chain step did not reproduce the expected problem."""

    def __init__(self, message, step=None, details=None):
        super().__init__(message)
        self.step = step
        self.details = details
