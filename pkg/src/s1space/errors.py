"""Exception hierarchy.

The CLI maps :class:`ParseError` to exit code 2 and every
:class:`VerificationError` to exit code 1.
"""


class S1Error(Exception):
    pass


class ParseError(S1Error):
    """Malformed input text; carries the 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class VerificationError(S1Error):
    """A mathematical hypothesis or certificate check failed."""


class DepthExceeded(S1Error):
    pass


class HypothesisViolated(VerificationError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotSingular(VerificationError):
    pass


class NotBlock(VerificationError):
    pass


class WitnessConflict(VerificationError):
    pass


class InvariantViolation(VerificationError):
    def __init__(self, condition, message):
        super().__init__(f"({condition}) {message}")
        self.condition = condition


class HorizonExhausted(VerificationError):
    def __init__(self, index, best_mass, budget):
        super().__init__(
            f"no admissible node for index {index}: best outside-window mass "
            f"{best_mass:.6g} exceeds budget {budget:.6g}"
        )
        self.index = index
        self.best_mass = best_mass
        self.budget = budget


class HypothesisFailed(VerificationError):
    def __init__(self, message, level=None, pattern=None):
        super().__init__(message)
        self.level = level
        self.pattern = pattern


class DensityTooLow(VerificationError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
