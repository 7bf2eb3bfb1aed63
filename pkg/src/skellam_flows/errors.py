"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1, data
problems exit 2, numerical failures exit 3.
"""


class ConfigurationError(ValueError):
    """A run or model configuration is invalid or inconsistent."""


class DataError(ValueError):
    """Input data violates the documented panel or file contracts."""


class NumericalError(RuntimeError):
    """A numerical routine failed in a way that cannot be recovered."""


class DegenerateTableError(NumericalError):
    """All truncated terms of a conditional joint table vanished.

    Carries the offending difference and intensities so callers can decide
    on a recovery policy (the SEM engine floors the intensities and retries).
    """

    def __init__(self, delta, lambda_in, lambda_out):
        self.delta = delta
        self.lambda_in = lambda_in
        self.lambda_out = lambda_out
        super().__init__(
            f"conditional joint table degenerate for delta={delta}, "
            f"lambda_in={lambda_in}, lambda_out={lambda_out}"
        )
