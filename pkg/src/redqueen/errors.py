"""Exception hierarchy shared by all modules."""


class RedQueenError(Exception):
    """Base class for every error raised by the package."""


class DomainError(RedQueenError, ValueError):
    """An argument lies outside the domain of a formula."""


class DegenerateMassError(RedQueenError):
    """A density has zero or negative total mass."""

    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (t={t:.6g})")
        self.t = t


class InstabilityError(RedQueenError):
    """A density became negative beyond the tolerated round-off level."""

    def __init__(self, field, minimum, t):
        super().__init__(
            f"field '{field}' reached {minimum:.6e} at t={t:.6g}; reduce dt or enlarge the box"
        )
        self.field = field
        self.minimum = minimum
        self.t = t


class NoStationaryStateError(RedQueenError):
    """The existence threshold for a stationary state is violated."""


class BracketError(RedQueenError):
    """Root bracketing failed."""


class PulseInfeasibleError(RedQueenError):
    """Pulse parameters lead to a nonpositive mass or violate a hypothesis."""


class SeriesDivergenceError(RedQueenError):
    """A series did not meet its tail tolerance within the allowed terms."""


class ConvergenceUnsafeError(RedQueenError):
    """A series is evaluated outside the region where its tail bound holds."""


class InsufficientSamplesError(RedQueenError):
    """A fitting window contains too few samples."""


class CircleFitDegenerateError(RedQueenError):
    """Circle fit on (nearly) collinear points."""


class UndefinedDelayError(RedQueenError):
    """Delay requested for a pulse whose speed is numerically zero."""


class ConfigError(RedQueenError):
    """Invalid configuration file; carries the offending line when known."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.path = path
