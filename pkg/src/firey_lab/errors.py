"""Exception types. Each carries a machine-readable payload for the CLI."""

from __future__ import annotations


class FireyError(Exception):
    code = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        return {"error": self.code, "message": self.message, "details": _jsonable(self.details)}


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


class InvalidInput(FireyError, ValueError):
    code = "invalid-input"


class OriginNotInterior(FireyError, ValueError):
    code = "origin-not-interior"


class NonConvex(FireyError, ValueError):
    code = "non-convex"


class AxisSymmetryError(FireyError, ValueError):
    code = "axis-symmetry-violation"


class GridMismatch(FireyError, ValueError):
    code = "grid-mismatch"


class DomainError(FireyError, ValueError):
    code = "domain-of-G"


class PreconditionError(FireyError, ValueError):
    code = "precondition"


class TangentMismatch(FireyError, ValueError):
    code = "tangent-mismatch"


class BoundaryNotFound(FireyError, ValueError):
    code = "boundary-intersection-not-found"


class NonConvergence(FireyError, RuntimeError):
    code = "nonconvergence"


class OptimizationError(FireyError, RuntimeError):
    code = "optimization"


class VerificationFailure(FireyError, RuntimeError):
    code = "verification-failure"
