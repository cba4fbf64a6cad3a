"""Exception hierarchy shared across the package."""


class LabelLoopError(Exception):
    """Base class for all labelloop-specific failures."""


class IngestError(LabelLoopError):
    """A corpus source violated the JSONL contract; message carries the line number."""


class SessionError(LabelLoopError):
    """An annotation-session operation was invalid, or a session file is unusable."""


class BackendError(LabelLoopError):
    """The embedding backend violated the wire protocol or is unreachable."""
