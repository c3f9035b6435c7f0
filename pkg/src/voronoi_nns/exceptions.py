class DimensionError(ValueError):
    """Points or queries of an unsupported or mismatched dimension."""


class DuplicatePointError(ValueError):
    """Exactly repeated points, which make Voronoi cells ambiguous."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = list(indices)


class OracleMismatchError(RuntimeError):
    """An index answered a query differently from the linear-scan oracle."""


class PointFileError(ValueError):
    """A point file that cannot be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        super().__init__(message)
        self.path = path
        self.line = line


class IndexFormatError(ValueError):
    """A serialized index file that is truncated, corrupt or of another version."""
