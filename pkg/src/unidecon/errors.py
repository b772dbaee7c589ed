"""Exception types raised by the library."""


class UnideconError(Exception):
    """Base class for library errors."""


class QuadratureDivergence(UnideconError):
    """Successive quadrature refinements disagree beyond tolerance."""


class InvalidGrid(UnideconError, ValueError):
    pass


class DegenerateModel(UnideconError, ValueError):
    pass


class ModelSupportError(UnideconError, ValueError):
    pass


class ParseError(UnideconError, ValueError):
    """Malformed input file; ``lineno`` is 1-based (0 for whole-file problems)."""

    def __init__(self, message, lineno=0):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno
