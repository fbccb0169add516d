"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operand shapes do not conform."""


class NumericError(ArithmeticError):
    """A non-finite value reached an operation that requires finite input."""


class ContractError(RuntimeError):
    """A caller violated an operation's precondition."""


class InputError(ValueError):
    """Empty or otherwise unusable model input."""


class ConfigError(ValueError):
    """Invalid configuration value."""


class ParseError(ValueError):
    """Malformed text in a data or embedding file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
