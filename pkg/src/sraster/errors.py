"""Exception hierarchy shared by every stage."""


class SRasterError(Exception):
    pass


class ConfigError(SRasterError, ValueError):
    pass


class RejectedInputError(SRasterError, ValueError):
    """A point that cannot be projected (non-finite or out of bounds)."""

    def __init__(self, message, index=None):
        if index is not None:
            message = f"record {index}: {message}"
        super().__init__(message)
        self.index = index


class ParseError(SRasterError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class LateRecordError(SRasterError):
    pass


class ConsistencyError(SRasterError):
    """Clustering node received an update its state cannot explain."""


class ProtocolError(SRasterError):
    pass


class PipelineError(SRasterError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause!r}")
        self.stage = stage
        self.cause = cause
