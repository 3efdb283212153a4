"""Constant skew-symmetric structure matrices and the Poisson bracket."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

__all__ = ["StructureMatrix", "PortMatrix", "is_skew", "poisson_bracket", "port_structure"]

# used when a structure matrix is assembled from computed (not user-typed) entries
COMPUTED_SKEW_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def is_skew(M, tol: float = 0.0) -> bool:
    """True iff ``max|M + M^T| <= tol``."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise UsageError(f"is_skew needs a square matrix, got shape {M.shape}")
    if M.size == 0:
        return True
    return bool(np.max(np.abs(M + M.T)) <= tol)


@dataclass(frozen=True, eq=False)
class StructureMatrix:
    """Constant skew-symmetric n x n matrix defining a Poisson bracket."""

    entries: np.ndarray
    tol: float = 0.0

    def __post_init__(self):
        M = _frozen(self.entries)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
            raise UsageError(f"structure matrix must be square and non-empty, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise UsageError("structure matrix has non-finite entries")
        if not is_skew(M, self.tol):
            raise UsageError(
                f"structure matrix is not skew-symmetric (is_skew failed: "
                f"max|M+M^T| = {np.max(np.abs(M + M.T)):.3g} > {self.tol:g})"
            )
        object.__setattr__(self, "entries", M)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self):
        return f"StructureMatrix({self.entries.tolist()})"


@dataclass(frozen=True, eq=False)
class PortMatrix:
    """Constant n x m input matrix ``g``."""

    entries: np.ndarray

    def __post_init__(self):
        g = np.array(self.entries, dtype=np.float64)
        if g.ndim == 1:
            g = g.reshape(-1, 1)
        if g.ndim != 2 or 0 in g.shape:
            raise UsageError(f"port matrix must be n x m with n, m > 0, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise UsageError("port matrix has non-finite entries")
        object.__setattr__(self, "entries", _frozen(g))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self):
        return f"PortMatrix({self.entries.tolist()})"


def poisson_bracket(J, a, b) -> float:
    """``a^T J b``."""
    J = np.asarray(J, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape[0] != J.shape[0] or b.shape[0] != J.shape[1]:
        raise UsageError(
            f"bracket dimension mismatch: J is {J.shape}, a has {a.shape[0]}, b has {b.shape[0]}"
        )
    return float(a @ (J @ b))


def port_structure(g) -> StructureMatrix:
    """Anti-diagonal block matrix ``[[0, g], [-g^T, 0]]`` of size n + m."""
    if not isinstance(g, PortMatrix):
        g = PortMatrix(g)
    n, m = g.n, g.m
    M = np.zeros((n + m, n + m))
    M[:n, n:] = g.entries
    M[n:, :n] = -g.entries.T
    return StructureMatrix(M)
