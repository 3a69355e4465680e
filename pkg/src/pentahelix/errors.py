"""Typed errors raised across the package.

Every error carries an optional ``stage`` naming the pipeline step that
failed; :func:`pentahelix.classify.classify_all` fills it in.
"""

from __future__ import annotations


class PentahelixError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str = "", stage: str | None = None):
        super().__init__(message)
        self.stage = stage

    @property
    def kind(self) -> str:
        return type(self).__name__

    def __str__(self) -> str:
        msg = super().__str__()
        if self.stage:
            return f"{self.kind} [stage={self.stage}]: {msg}"
        return f"{self.kind}: {msg}"


class GridTooSmall(PentahelixError):
    pass


class NonUniformGrid(PentahelixError):
    pass


class NonFiniteState(PentahelixError):
    pass


class NotSkew(PentahelixError):
    pass


class DegenerateCurvature(PentahelixError):
    pass


class NotUnitSpeed(PentahelixError):
    pass


class DegenerateSpeed(PentahelixError):
    pass


class OrthonormalityDrift(PentahelixError):
    """Integrated frame drifted from orthonormal beyond the allowed budget."""


class AxisNotConstant(PentahelixError):
    pass


class IllConditionedFit(PentahelixError):
    pass


class InternalInconsistency(PentahelixError):
    """Two characterizations that must agree gave different verdicts."""


class ImplicationViolated(PentahelixError):
    pass
