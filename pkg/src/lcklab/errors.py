"""Exception types shared across the package."""

from __future__ import annotations


class GalleryError(ValueError):
    """Unknown fixture id or invalid fixture parameters."""


class NumericalError(RuntimeError):
    """A pointwise solve failed; carries the offending point when known."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class InadmissibleInput(ValueError):
    """Input violates a documented precondition (e.g. f <= -1 somewhere)."""
