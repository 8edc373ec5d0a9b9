"""Exception hierarchy.

Every exception carries the process exit code the CLI maps it to.
"""


class PacmanError(Exception):
    exit_code = 2


class ValidationError(PacmanError, ValueError):
    """Malformed input: bad masses, unsorted atoms, unparsable lines."""


class DomainError(PacmanError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateMeasure(ValidationError):
    """The measure is concentrated on a single point."""


class ConditionViolated(PacmanError, ValueError):
    """A stated hypothesis on the input measure does not hold."""


class GapConditionError(PacmanError, ValueError):
    """The monotone gap condition failed a spot check."""


class GapMismatch(PacmanError, ValueError):
    """Gap threshold of the function exceeds the margin width."""


class GapViolation(PacmanError, ValueError):
    """The chasing gap is not uniformly positive at the chosen p."""


class SupportViolation(ValidationError):
    """The measure has mass outside the admissible window."""


class MixedDimensions(ValidationError):
    """Configurations of different length in one set."""


class NotAntichain(PacmanError, ValueError):
    exit_code = 3

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class MarginViolation(PacmanError, ValueError):
    exit_code = 4


class MarginDerivationFailed(MarginViolation):
    pass


class TooLarge(PacmanError, ValueError):
    exit_code = 5
