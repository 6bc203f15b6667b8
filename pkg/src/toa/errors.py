"""Exception types raised by the toa package."""


class ToaError(Exception):
    """Base class for all package errors."""


class InvalidGridError(ToaError, ValueError):
    pass


class ResolutionError(ToaError):
    """A grid is too coarse for the oscillatory phase it has to carry."""


class PreconditionError(ToaError, ValueError):
    pass


class DegenerateStateError(PreconditionError):
    pass


class NotInDomainError(PreconditionError):
    """The state fails the numerical domain test of the arrival-time operator."""


class TailError(ToaError):
    """An integrand has not decayed at the grid edges.

    The measured tail mass is kept on ``tail_mass``.
    """

    def __init__(self, message, tail_mass=float("nan")):
        super().__init__(message)
        self.tail_mass = tail_mass


class IllConditionedError(ToaError):
    pass


class UnsupportedError(ToaError):
    pass
