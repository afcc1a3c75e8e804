"""Exception hierarchy and the ``NotFound`` outcome value."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class IdealLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(IdealLabError, ValueError):
    """An operation was called outside its domain (empty generator set, bad ladder...)."""


class NotRepresentableError(DomainError):
    """A natural number is not a finite sum of the given generators."""


class ConstructionError(IdealLabError):
    """A construction failed its own post-hoc certification."""

    def __init__(self, message: str, violation: Any = None):
        super().__init__(message)
        self.violation = violation


class BoundError(IdealLabError):
    """A finite window is too small for the requested check."""


@dataclass(frozen=True)
class NotFound:
    """Negative search outcome, always qualified by the bounds that were searched.

    Falsy, so ``if witness:`` reads naturally at call sites.
    """

    reason: str
    bounds: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return False

    def to_json(self) -> dict[str, Any]:
        return {"found": False, "reason": self.reason, "bounds": dict(self.bounds)}
