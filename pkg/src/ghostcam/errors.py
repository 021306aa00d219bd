"""Exception hierarchy shared by all ghostcam modules."""


class GhostcamError(Exception):
    """Base class for errors raised by ghostcam."""


class ConfigError(GhostcamError, ValueError):
    """Invalid scenario configuration; ``field`` names the offending key path."""

    def __init__(self, message, field=None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class DimensionError(GhostcamError, ValueError):
    """Grids that must share a shape do not."""


class FileFormatError(GhostcamError, ValueError):
    """A file on disk does not follow the expected format."""


class TruncatedFileError(FileFormatError):
    """A pattern file ended in the middle of a frame."""

    def __init__(self, message, frame_index):
        super().__init__(message)
        self.frame_index = frame_index


class DegenerateError(GhostcamError, ArithmeticError):
    """A numeric quantity is undefined (zero denominators, empty regions)."""
