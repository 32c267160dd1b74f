"""Exception types shared across the package."""


class InputDomainError(ValueError):
    """A point or parameter lies outside the supported domain."""


class NotInvertibleError(ValueError):
    """The point-wise certificate cannot be inverted (zero or infinite ratios)."""


class TableFormatError(ValueError):
    """A certificate table or tree file is malformed or violates an invariant."""


class HeaderMismatchError(TableFormatError):
    """A file header does not match the parameters the caller asked for."""


class UnsupportedSizeError(ValueError):
    """An exhaustive routine was asked to enumerate beyond its size cap."""
