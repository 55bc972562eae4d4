"""Exception hierarchy shared by every attnflow module."""


class AttnflowError(Exception):
    """Base class for all errors raised by attnflow."""


class ValidationError(AttnflowError, ValueError):
    pass


class ParseError(ValidationError):
    """A row of an input file could not be parsed."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class EmptyNetworkError(ValidationError):
    pass


class NonDissipativeError(AttnflowError):
    """``I - M`` is singular: some flow can circulate forever without reaching the sink.

    ``components`` holds one or more lists of node ids; each is a strongly
    connected group from which flow cannot escape (or escapes too weakly to
    be resolved numerically).
    """

    def __init__(self, message, components=()):
        self.components = [list(c) for c in components]
        super().__init__(message)


class NumericalError(AttnflowError):
    pass


class InsufficientDataError(AttnflowError):
    pass


class DegenerateFitError(AttnflowError):
    pass


class DegenerateTopologyError(AttnflowError):
    pass


class WalkLimitError(AttnflowError):
    """A simulated walker exceeded the per-walker hop ceiling."""
