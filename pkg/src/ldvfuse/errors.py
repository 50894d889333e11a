"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the command line
front end copies into its error record.
"""


class LdvError(Exception):
    code = "error"


class ShapeMismatchError(LdvError, ValueError):
    code = "shape-mismatch"


class LengthMismatchError(LdvError, ValueError):
    code = "length-mismatch"


class EmptySequenceError(LdvError, ValueError):
    code = "empty-sequence"


class InsufficientFramesError(LdvError, ValueError):
    code = "insufficient-frames"


class UnsupportedLayoutError(LdvError, ValueError):
    """A transform is not defined for this chroma layout / frame geometry."""

    code = "unsupported-layout"


class StreamFormatError(LdvError):
    code = "format-error"


class UnsupportedFormatError(StreamFormatError):
    code = "unsupported-format"


class TruncationError(StreamFormatError):
    code = "truncated"

    def __init__(self, message, frame_index=None):
        super().__init__(message)
        self.frame_index = frame_index


class ExternalToolError(LdvError):
    code = "external-tool"

    def __init__(self, message, returncode=None, stderr=b""):
        super().__init__(message)
        self.returncode = returncode
        self.stderr = stderr


class ProtocolError(LdvError):
    code = "protocol-error"


class PlanValidityError(LdvError, ValueError):
    code = "invalid-plan"


class WindowError(LdvError, ValueError):
    code = "window-error"


class ConfigError(LdvError, ValueError):
    code = "config-error"
