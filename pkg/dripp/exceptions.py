"""Exception hierarchy shared by the library and the CLI."""
from typing import Optional


class DrippError(Exception):
    """Base class for every error raised by dripp."""
    kind = "error"


class ValidationError(DrippError, ValueError):
    """Input violates a documented constraint."""
    kind = "validation"


class InvalidArgumentError(ValidationError):
    """A function argument is out of its valid domain."""
    kind = "invalid_argument"


class ParseError(ValidationError):
    """A data file could not be parsed."""
    kind = "parse"

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None,
                 column: Optional[str] = None):
        self.path = path
        self.line = line
        self.column = column
        location = []
        if path:
            location.append(str(path))
        if line is not None:
            location.append(f"line {line}")
        if location:
            message = f"{':'.join(location)}: {message}"
        super().__init__(message)


class NumericalError(DrippError, ArithmeticError):
    """A numerical evaluation or fit failed."""
    kind = "numerical"


class EvaluationError(NumericalError):
    """The intensity vanished at an observed event."""
    kind = "evaluation"

    def __init__(self, message: str, timestamp: Optional[float] = None):
        self.timestamp = timestamp
        super().__init__(message)


class InitializationError(NumericalError):
    """The EM initialization could not be computed."""
    kind = "initialization"


class SimulationError(NumericalError):
    """The thinning sampler could not build a valid majorant."""
    kind = "simulation"


class ArtifactIOError(DrippError, OSError):
    """An input could not be read or an output could not be written."""
    kind = "io"
