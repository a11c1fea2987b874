"""Exception hierarchy shared by the planner, simulator and CLI."""


class PincerError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PincerError, ValueError):
    """A formula was evaluated outside its mathematical domain."""


class InfeasibleSpeed(PincerError, ValueError):
    """The sweeper speed is too low for the requested protocol step.

    ``v_critical`` carries the computed critical speed when it is known so
    that callers can report how far below the threshold the request was.
    """

    def __init__(self, message, v_critical=None, speed=None):
        super().__init__(message)
        self.v_critical = v_critical
        self.speed = speed


class InfeasibleScenario(PincerError, ValueError):
    pass


class NoConvergence(PincerError, RuntimeError):
    pass


class GridTooSmall(PincerError, ValueError):
    pass


class PhaseDesync(PincerError, RuntimeError):
    pass


class ParseError(PincerError, ValueError):
    """Config text could not be parsed; ``field`` / ``line`` locate the problem."""

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line


class ValidationError(PincerError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field



class OddTeamSize(ValidationError):
    """Pincer pairs need an even team of at least two sweepers."""

    def __init__(self, message, field="n"):
        super().__init__(message, field)
