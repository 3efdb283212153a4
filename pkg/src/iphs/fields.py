"""Smooth scalar fields on R^n with analytic gradients.

Gradients are always supplied in closed form. :func:`check_gradient` is a
central-difference oracle used to validate them, never a runtime path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericError, UsageError

__all__ = [
    "ScalarField",
    "GradientReport",
    "as_state",
    "eval_field",
    "grad",
    "check_gradient",
    "constant_field",
    "linear_field",
    "quadratic_field",
]


def as_state(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    """Return ``x`` as a 1-D float64 array, checking its length.

    Float64 vectors pass through uncopied; anything else is converted into a
    fresh read-only array.
    """
    if type(x) is np.ndarray and x.dtype == np.float64 and x.ndim == 1:
        if dim is not None and x.shape[0] != dim:
            raise UsageError(f"{name} has length {x.shape[0]}, expected {dim}")
        return x
    arr = np.array(x, dtype=np.float64, ndmin=1)
    if arr.ndim != 1:
        raise UsageError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise UsageError(f"{name} has length {arr.shape[0]}, expected {dim}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarField:
    """A real-valued function of the state together with its gradient.

    Parameters
    ----------
    dim : int
        State dimension n.
    value : callable
        ``value(x) -> float`` for ``x`` of shape ``(dim,)``.
    gradient : callable
        ``gradient(x) -> array`` of shape ``(dim,)``.
    name : str
        Label used in reports.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    name: str = "f"

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim <= 0:
            raise UsageError(f"field dimension must be a positive integer, got {self.dim}")

    def __call__(self, x) -> float:
        return eval_field(self, x)


def eval_field(f: ScalarField, x) -> float:
    x = as_state(x, f.dim)
    return float(f.value(x))


def grad(f: ScalarField, x) -> np.ndarray:
    x = as_state(x, f.dim)
    g = f.gradient(x)
    if type(g) is not np.ndarray or g.ndim != 1:
        g = np.asarray(g, dtype=np.float64).reshape(-1)
    if g.shape[0] != f.dim:
        raise UsageError(f"gradient of {f.name} has length {g.shape[0]}, expected {f.dim}")
    return g


@dataclass(frozen=True)
class GradientReport:
    field: str
    max_rel_error: float
    worst_index: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tol


def check_gradient(f: ScalarField, x, h: float = 1e-5, tol: float = 1e-6) -> GradientReport:
    """Compare ``grad(f, x)`` with central differences of ``f`` at ``x``.

    The relative error of component ``i`` is
    ``|fd_i - g_i| / max(1, |g_i|)``, so components near zero are judged
    on an absolute scale.
    """
    if not h > 0:
        raise UsageError(f"step h must be positive, got {h}")
    if not tol > 0:
        raise UsageError(f"tol must be positive, got {tol}")
    x = np.array(as_state(x, f.dim))
    g = grad(f, x)
    worst, worst_i = 0.0, 0
    for i in range(f.dim):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fp, fm = float(f.value(xp)), float(f.value(xm))
        if not (np.isfinite(fp) and np.isfinite(fm) and np.isfinite(g[i])):
            raise NumericError(f"non-finite value while checking {f.name} at coordinate {i}")
        fd = (fp - fm) / (2.0 * h)
        err = abs(fd - g[i]) / max(1.0, abs(g[i]))
        if err > worst:
            worst, worst_i = err, i
    return GradientReport(field=f.name, max_rel_error=worst, worst_index=worst_i, tol=tol)


def constant_field(dim: int, c: float = 0.0, name: str = "const") -> ScalarField:
    c = float(c)
    zero = np.zeros(dim)
    zero.setflags(write=False)
    return ScalarField(dim, lambda x: c, lambda x: zero, name)


def linear_field(coeffs, name: str = "linear") -> ScalarField:
    """``f(x) = a . x``."""
    a = as_state(coeffs, name="coeffs")
    return ScalarField(a.shape[0], lambda x: float(a @ x), lambda x: a, name)


def quadratic_field(Q, name: str = "quadratic") -> ScalarField:
    """``f(x) = 1/2 x^T Q x`` with ``Q`` symmetrised on construction."""
    Q = np.array(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise UsageError(f"Q must be square, got shape {Q.shape}")
    Q = 0.5 * (Q + Q.T)
    Q.setflags(write=False)
    return ScalarField(Q.shape[0], lambda x: 0.5 * float(x @ Q @ x), lambda x: Q @ x, name)
