"""Port maps obtained by embedding the environment and restricting it.

The environment is an extra state ``xi`` in R^m whose Hamiltonian (and, in
the irreversible case, entropy) is linear in ``xi``. A linear function is
identified with its coefficient vector, so ``u`` and ``tau`` stand in for
``H_c(xi) = u^T xi`` and ``S_c(xi) = tau^T xi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .brackets import PortMatrix, StructureMatrix, poisson_bracket, port_structure
from .core import GammaFn, IrreversiblePort
from .errors import UsageError
from .fields import ScalarField, as_state, grad

__all__ = [
    "ExtendedState",
    "ExtendedSystem",
    "extend_reversible",
    "extended_structure",
    "ReversiblePortMap",
    "restrict_reversible",
    "IrreversiblePortMap",
    "derive_irreversible_port",
]


@dataclass(frozen=True)
class ExtendedState:
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", as_state(self.x, name="x"))
        object.__setattr__(self, "xi", as_state(self.xi, name="xi"))

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.x, self.xi])


def _linear_env_field(base: ScalarField, coeffs: np.ndarray, name: str) -> ScalarField:
    """``F(x, xi) = base(x) + coeffs^T xi`` on R^(n+m)."""
    n = base.dim

    def value(z):
        return float(base.value(z[:n])) + float(coeffs @ z[n:])

    def gradient(z):
        return np.concatenate([grad(base, z[:n]), coeffs])

    return ScalarField(n + coeffs.shape[0], value, gradient, name)


def extended_structure(J, g) -> StructureMatrix:
    """``[[J, g], [-g^T, 0]]``."""
    J = J if isinstance(J, StructureMatrix) else StructureMatrix(J)
    g = g if isinstance(g, PortMatrix) else PortMatrix(g)
    if g.n != J.n:
        raise UsageError(f"g has {g.n} rows but J is {J.n}x{J.n}")
    Je = np.array(port_structure(g).entries)
    Je[: J.n, : J.n] = J.entries
    return StructureMatrix(Je)


@dataclass(frozen=True)
class ExtendedSystem:
    """System plus environment on R^n x R^m.

    ``S_tot`` and ``gamma_port`` are set only for the irreversible embedding.
    """

    J_e: StructureMatrix
    H_tot: ScalarField
    n: int
    m: int
    S_tot: Optional[ScalarField] = None
    gamma_port: Optional[GammaFn] = None

    def field(self, state) -> np.ndarray:
        """Hamiltonian vector field ``J_e dH_tot`` at an extended state."""
        z = state.stacked() if isinstance(state, ExtendedState) else as_state(state, self.n + self.m)
        return self.J_e.entries @ grad(self.H_tot, z)

    def split(self, state):
        v = self.field(state)
        return v[: self.n], v[self.n:]


def extend_reversible(J, g, H: ScalarField, u) -> ExtendedSystem:
    J = J if isinstance(J, StructureMatrix) else StructureMatrix(J)
    if H.dim != J.n:
        raise UsageError(f"H has dimension {H.dim} but J is {J.n}x{J.n}")
    Je = extended_structure(J, g)
    n = H.dim
    m = Je.n - n
    u = as_state(u, m, "u")
    return ExtendedSystem(Je, _linear_env_field(H, u, "H_tot"), n, m)


@dataclass(frozen=True)
class ReversiblePortMap:
    """``(x, u) -> (dx/dt, y)`` with ``dx/dt = J dH + g u``, ``y = g^T dH``."""

    J: StructureMatrix
    g: PortMatrix
    H: ScalarField

    def __call__(self, x, u):
        dH = grad(self.H, x)
        u = as_state(u, self.g.m, "u")
        g = self.g.entries
        return self.J.entries @ dH + g @ u, g.T @ dH


def restrict_reversible(J, g, H: ScalarField) -> ReversiblePortMap:
    J = J if isinstance(J, StructureMatrix) else StructureMatrix(J)
    g = g if isinstance(g, PortMatrix) else PortMatrix(g)
    if not (J.n == g.n == H.dim):
        raise UsageError(f"dimension mismatch: J {J.n}, g {g.n} rows, H {H.dim}")
    return ReversiblePortMap(J, g, H)


@dataclass(frozen=True)
class IrreversiblePortMap:
    """Evaluator of the irreversible port maps plus the port it defines.

    Evaluation goes through the extended structure ``J_port``:
    ``(flow, -y) = gamma_port * {S_tot, H_tot}_{J_port} * J_port (dH, u)``.
    """

    port: IrreversiblePort
    S: ScalarField
    H: ScalarField
    J_port: StructureMatrix

    def bracket(self, x, u) -> float:
        dH, dS = grad(self.H, x), grad(self.S, x)
        u = as_state(u, self.port.m, "u")
        return poisson_bracket(self.J_port.entries, np.concatenate([dS, self.port.tau]), np.concatenate([dH, u]))

    def multiplier(self, x, u) -> float:
        dH = grad(self.H, x)
        u = as_state(u, self.port.m, "u")
        return self.port.gamma_port(x, dH, u) * self.bracket(x, u)

    def __call__(self, x, u):
        x = as_state(x, self.H.dim)
        u = as_state(u, self.port.m, "u")
        dH = grad(self.H, x)
        v = self.multiplier(x, u) * (self.J_port.entries @ np.concatenate([dH, u]))
        n = self.H.dim
        return v[:n], -v[n:]

    def extended(self, u) -> ExtendedSystem:
        """The environment-embedded system with linear ``H_tot`` and ``S_tot``."""
        u = as_state(u, self.port.m, "u")
        return ExtendedSystem(
            self.J_port,
            _linear_env_field(self.H, u, "H_tot"),
            self.H.dim,
            self.port.m,
            S_tot=_linear_env_field(self.S, self.port.tau, "S_tot"),
            gamma_port=self.port.gamma_port,
        )


def derive_irreversible_port(g, gamma_port: GammaFn, S: ScalarField, H: ScalarField, tau=None) -> IrreversiblePortMap:
    """Build the irreversible port from ``g``, ``gamma_port`` and ``tau``.

    The returned object's ``port`` attribute plugs straight into
    :class:`iphs.core.IphsSystem`.
    """
    g = g if isinstance(g, PortMatrix) else PortMatrix(g)
    if not (g.n == H.dim == S.dim):
        raise UsageError(f"dimension mismatch: g has {g.n} rows, H {H.dim}, S {S.dim}")
    port = IrreversiblePort(g, gamma_port, tau)
    return IrreversiblePortMap(port, S, H, port_structure(g))
