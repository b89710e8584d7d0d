"""Exception types shared across the package."""


class OligocatError(Exception):
    pass


class SizeLimitError(OligocatError):
    """An enumeration would exceed its configured bound."""


class DomainError(OligocatError, ValueError):
    """Arguments outside an operation's domain (e.g. x not <= y)."""


class InstanceMismatchError(OligocatError, ValueError):
    """Objects or morphisms from incompatible instances or objects."""


class PreconditionError(OligocatError):
    """A documented precondition fails; ``witness`` explains why."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness
