"""Exceptions raised by the workbench library.

Everything derives from ``FkgError`` so the command layer can turn any of
them into an ``error`` report with exit code 2.
"""
from __future__ import annotations

from typing import Optional, Tuple


class FkgError(ValueError):
    """Base class for workbench failures."""


class ShapeMismatchError(FkgError):
    pass


class NormalizationError(FkgError):
    pass


class SupportError(FkgError):
    """A conditional function was evaluated where the marginal has no mass."""


class HypothesisError(FkgError):
    """An inequality's hypotheses do not hold for the supplied instance.

    Callers probing outside the hypotheses on purpose pass
    ``check_hypotheses=False`` instead of catching this.
    """

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class CapExceededError(FkgError):
    pass


class InstanceFormatError(FkgError):
    """Malformed JSON input; ``path`` locates the offending entry."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ClosureError(FkgError):
    pass


class TriangleError(FkgError):
    def __init__(self, triple: Tuple[int, int, int], message: str):
        super().__init__(message)
        self.triple = triple


class LogConvexityError(FkgError):
    def __init__(self, k: int, message: str):
        super().__init__(message)
        self.k = k


class ExchangeabilityError(FkgError):
    pass


class OrderingError(FkgError):
    pass


class ContradictionError(FkgError):
    pass


class PositiveDefinitenessError(FkgError):
    pass


class WitnessMismatchError(FkgError):
    def __init__(self, message: str, stored: Optional[object] = None, recomputed: Optional[object] = None):
        super().__init__(message)
        self.stored = stored
        self.recomputed = recomputed
