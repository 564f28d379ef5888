"""Exception types shared across the package."""


class ShapeError(ValueError):
    """An array does not have the shape an operation requires.

    ``dimension`` names the offending axis (e.g. ``"depth"``).
    """

    def __init__(self, message, dimension=None):
        super().__init__(message)
        self.dimension = dimension


class DataFormatError(ValueError):
    """A recording, cache or checkpoint file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class NumericError(ArithmeticError):
    """A non-finite value appeared during training or evaluation."""
