"""Typed error hierarchy shared across the harness.

Every failure the pipeline can survive is a subclass of HarnessError so the
retry/fallback machinery can catch one type and keep raw tracebacks out of
run records.
"""

from __future__ import annotations


class HarnessError(Exception):
    """Base class for all typed harness failures."""


class MalformedDocument(HarnessError):
    """No extractable scene payload, or the payload is not valid JSON."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class SchemaViolation(HarnessError):
    """A document field is unknown, missing, or of the wrong shape."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


class NonFiniteValue(HarnessError):
    """A numeric literal in a document is NaN or infinite."""


class Uncanonicalizable(HarnessError):
    """A scene still violates hard invariants after canonicalization."""

    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(f"{v.body_id}:{v.rule}" for v in self.violations)
        super().__init__(f"hard violations remain: {detail}")


class NumericalBlowup(HarnessError):
    """Simulation state exceeded the magnitude guard (degenerate scene)."""


class ChecksumMismatch(HarnessError):
    def __init__(self, frame_index: int, message: str = "frame checksum mismatch"):
        self.frame_index = frame_index
        super().__init__(f"{message}: frame {frame_index}")


class MissingFrame(HarnessError):
    def __init__(self, frame_index: int):
        self.frame_index = frame_index
        super().__init__(f"missing frame {frame_index}")


class UnknownTemplate(HarnessError):
    pass


class RatingOutOfRange(HarnessError):
    pass


class AdapterTimeout(HarnessError):
    pass


class TransportError(HarnessError):
    pass


class MissingCredential(HarnessError):
    pass


class InsufficientFrames(HarnessError):
    pass


class ProviderUnavailable(HarnessError):
    pass


class IncompleteRun(HarnessError):
    pass


class DirectionUnknown(HarnessError):
    pass


class EmptyRun(HarnessError):
    pass


class ConfigError(HarnessError):
    pass
