"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An input violates an operation's precondition."""


class NumericalFailureError(RuntimeError):
    """A dense kernel (SVD, eigendecomposition) did not converge."""


class GenerationFailureError(RuntimeError):
    """A random graph generator exhausted its retry budget."""


class TooLargeError(InvalidArgumentError):
    """Exact enumeration would exceed the combinatorial budget."""


class ConstructionFailureError(RuntimeError):
    """A deterministic construction could not satisfy its requirements."""


class FileFormatError(ValueError):
    """A matrix or edge-list file could not be parsed.

    ``line`` is the 1-based line number of the offending line, or ``None``
    when the problem is not tied to a single line.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
