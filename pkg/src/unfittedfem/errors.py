"""Exception hierarchy shared by the geometry, assembly and solver layers."""


class UnfittedError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(UnfittedError, ValueError):
    pass


class EmptyDomainError(GeometryError):
    """No background cell intersects the domain."""


class DegenerateLevelSetError(GeometryError):
    """A cell has all three vertex values within the snapping tolerance."""


class DegenerateCutError(GeometryError):
    """A cut cell does not produce exactly two boundary crossings."""


class DegenerateClipError(GeometryError):
    """A clipped cell polygon has (numerically) zero area."""


class AssemblyError(UnfittedError, ValueError):
    pass


class SingularSystemError(UnfittedError, ArithmeticError):
    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class ConfigError(UnfittedError, ValueError):
    pass
