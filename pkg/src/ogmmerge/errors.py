"""Exception types raised across the package."""


class OgmMergeError(Exception):
    """Base class for all package errors."""


class MapFormatError(OgmMergeError):
    """A map file or its metadata sidecar could not be parsed."""

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


class DegenerateGeometryError(OgmMergeError):
    """Points that must be distinct coincide (degenerate line or tag layout)."""


class ReadingRejected(OgmMergeError):
    """A tag reading lies outside the antenna range or is otherwise unusable."""


class NoOverlapError(OgmMergeError):
    """Two point sets share no common region after pre-alignment."""


class CorrespondenceError(OgmMergeError):
    """ICP found no point pairs within the correspondence distance."""


class InsufficientTagsError(OgmMergeError):
    """Fewer than three common tags pass the localization gate."""
