"""Exception types shared across the package."""


class WarntrackError(Exception):
    """Base class for all errors raised by warntrack."""


class MalformedReport(WarntrackError):
    """Input report (XML/JSON) could not be parsed."""


class MissingAttribute(MalformedReport):
    """A required attribute or element is absent from a report."""


class SchemaViolation(WarntrackError):
    """Input violates the documented schema or a model invariant."""


class FileMissing(WarntrackError):
    """A requested file does not exist in the source tree."""

    def __init__(self, path: str, root: str = ""):
        self.path = path
        self.root = root
        where = f" under {root}" if root else ""
        super().__init__(f"file not found{where}: {path}")


class ConflictingRecords(WarntrackError):
    """Two refactoring records rewrite the same field to different values."""


class UnknownId(WarntrackError):
    """A candidate pair references a warning id outside the known sets."""


class DuplicateMatch(WarntrackError):
    """A warning id appears more than once in a match list."""


class UnknownWarningId(WarntrackError):
    """A ground-truth label references a warning absent from the report."""


class IdCollision(WarntrackError):
    """Two distinct warnings digest to the same id; inputs cannot be tracked."""
