"""Exception hierarchy shared by all ifgi modules."""


class IfgiError(Exception):
    """Base class for every error raised by this package."""


# sample_model
class EmptyGrid(IfgiError, ValueError):
    pass


class RaggedGrid(IfgiError, ValueError):
    pass


class UnreachableAlpha(IfgiError, ValueError):
    pass


class ParseError(IfgiError, ValueError):
    """Malformed mask file. ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


# analytics
class DegenerateContrast(IfgiError, ValueError):
    pass


class AllDark(IfgiError, ValueError):
    pass


class NoAbsorption(IfgiError, ValueError):
    pass


class NoRoot(IfgiError, ValueError):
    pass


# montecarlo
class ShapeMismatch(IfgiError, ValueError):
    pass


class NotEnoughShots(IfgiError, ValueError):
    pass


class ClassTooSmall(IfgiError, ValueError):
    pass
