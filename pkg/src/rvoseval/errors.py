"""Exception types shared across the toolkit."""


class RvosEvalError(Exception):
    """Base class for all toolkit errors."""


class MalformedRle(RvosEvalError):
    """RLE counts are inconsistent with the declared mask size."""


class ShapeMismatch(RvosEvalError):
    """Two masks that must share dimensions do not."""


class SequenceMismatch(RvosEvalError):
    """Two mask sequences disagree on video id or frame count."""


class EmptyVideo(RvosEvalError):
    """A video decomposition was requested on zero frames."""


class ParseError(RvosEvalError):
    """A manifest or prediction file is not valid JSON."""


class SchemaViolation(RvosEvalError):
    """A manifest or prediction violates the schema or its semantic rules."""

    def __init__(self, location: str, message: str):
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}")


class MissingPrediction(RvosEvalError):
    """An expression in the evaluated split has no prediction file."""


class MissingBoxes(RvosEvalError):
    """Box-derived attribute tags were requested for an object without boxes."""
