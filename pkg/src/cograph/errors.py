"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed argument: wrong shape, non-finite value, bad parameter."""


class ContractViolation(ValueError):
    """A mathematical precondition of an operation does not hold."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BlowUpError(RuntimeError):
    """Integration produced non-finite or runaway values.

    ``partial`` holds whatever trajectory was recorded before the failure.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class HorizonTooLongError(RuntimeError):
    """Picard iteration stopped contracting; split the horizon."""


class ConfigError(ValueError):
    """One or more problems in a scenario config, each tagged with a line number."""

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"line {ln}: {msg}" if ln else msg for ln, msg in self.problems]
        super().__init__("\n".join(lines))
