"""Exception hierarchy shared across the package."""


class ProductGraphError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(ProductGraphError, ValueError):
    """Malformed arrays, shapes or parameters."""


class DisconnectedGraph(ProductGraphError):
    """A Laplacian has more than one zero eigenvalue."""


class DisconnectedIterate(DisconnectedGraph):
    """A solver iterate left the set of connected graphs."""

    def __init__(self, message, factor=None, iteration=None):
        super().__init__(message)
        self.factor = factor
        self.iteration = iteration


class NonFiniteObjective(ProductGraphError):
    pass


class StepTooLarge(ProductGraphError):
    """The objective kept increasing under a fixed step size."""


class EmptyNeighborhood(ProductGraphError, ValueError):
    """A missing node has no observed node in its row or column."""


class NoCleanFiber(ProductGraphError):
    """No fully observed row or no fully observed column exists."""


class ConnectivityFailure(ProductGraphError):
    """A random generator could not produce a connected graph."""


class DegenerateSupport(ProductGraphError, ValueError):
    pass


class InsufficientPoints(ProductGraphError, ValueError):
    pass


class ZeroTrace(ProductGraphError, ValueError):
    pass
