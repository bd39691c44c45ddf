"""Exception hierarchy shared by all modules."""


class EmcertError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(EmcertError, ValueError):
    """Vector or matrix shapes do not agree."""


class GridError(EmcertError, ValueError):
    """Invalid grid data: negative or non-finite entries, duplicates, too many points."""


class OffGridQuery(EmcertError, KeyError):
    """A table candidate was evaluated at a point it does not contain."""

    def __str__(self):
        return Exception.__str__(self)


class SolverStalled(EmcertError, RuntimeError):
    """The simplex pivot cap was exhausted."""


class OutsideHull(EmcertError, ValueError):
    """The target point is not a convex combination of the grid points."""


class NotACounterexample(EmcertError, ValueError):
    """A certificate was requested from an envelope value that does not exceed one."""


class GuardExceeded(EmcertError, ValueError):
    """The brute-force oracle was asked for a problem beyond its size guard."""
