class LorentzMaxError(Exception):
    """Base class for errors raised by lorentzmax."""


class InvalidArgument(LorentzMaxError, ValueError):
    pass


class DomainMismatch(LorentzMaxError, ValueError):
    """Two grid objects live on different grids."""


class EmptyFunction(LorentzMaxError, ValueError):
    """An operation needs a function that is not identically zero."""
