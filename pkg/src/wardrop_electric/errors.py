"""Exception hierarchy shared by every module."""


class NetworkError(Exception):
    """Base class for all errors raised by this package."""


class NoPath(NetworkError):
    """No directed path joins the origin to the destination."""


class Disconnected(NetworkError):
    """Two nodes that must be electrically connected are not."""


class SingularSystem(NetworkError):
    """A linear system expected to be nonsingular is not."""


class NotConverged(NetworkError):
    """An iterative solver exhausted its iteration budget."""


class InconsistentMultipliers(NetworkError):
    """Direct social cost and the multiplier-based value disagree."""


class NotSeriesParallel(NetworkError):
    pass


class ZeroFlowLink(NetworkError):
    pass


class LinkUnsupported(NetworkError):
    """The link carries no flow at equilibrium (positive multiplier)."""


class Degenerate(NetworkError):
    """Some link has zero flow and zero multiplier simultaneously."""


class Unreachable(NetworkError):
    pass


class ParseError(NetworkError):
    pass
