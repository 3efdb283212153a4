"""IPHS vector fields, port maps and the instantaneous balance identities.

A system is generated by a Hamiltonian ``H`` and an entropy ``S`` with a
constant skew matrix ``J`` and a strictly positive ``gamma``. The drift is

    gamma(x, dH) * {S, H}_J * J dH

and the coupling to the environment is one of

* ``None``              closed system, drift only;
* :class:`LegacyPort`   affine input map ``W + g u``;
* :class:`IrreversiblePort`  port flow ``gamma_port * {S_tot, H_tot} * g u``
  with conjugated output ``gamma_port * {S_tot, H_tot} * g^T dH``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from .brackets import PortMatrix, StructureMatrix
from .errors import DomainError, ModelViolationError, NumericError, UnsupportedOperationError, UsageError
from .fields import ScalarField, as_state, grad

__all__ = [
    "DEFAULT_TOL_BALANCE",
    "GammaFn",
    "LegacyPort",
    "IrreversiblePort",
    "IphsSystem",
    "BalanceSample",
    "drift",
    "port_bracket",
    "port_maps",
    "vector_field",
    "output",
    "balance",
    "evaluate",
]

DEFAULT_TOL_BALANCE = 1e-10


@dataclass(frozen=True)
class GammaFn:
    """Strictly positive scalar function of ``(x, dH, u)``.

    ``u`` is ``None`` when the function is used for the internal drift.
    Positivity and finiteness are checked on every call.
    """

    fn: Callable[[np.ndarray, np.ndarray, Optional[np.ndarray]], float]
    name: str = "gamma"

    def __call__(self, x, dH, u=None) -> float:
        val = float(self.fn(x, dH, u))
        if not math.isfinite(val):
            raise NumericError(f"{self.name} is not finite ({val}) at x={np.asarray(x).tolist()}")
        if val <= 0.0:
            raise ModelViolationError(
                f"positivity violated: {self.name} = {val:.6g} <= 0 at x={np.asarray(x).tolist()}"
            )
        return val


def constant_gamma(value: float, name: str = "gamma") -> GammaFn:
    value = float(value)
    return GammaFn(lambda x, dH, u: value, name)


@dataclass(frozen=True)
class LegacyPort:
    """Affine input map ``W(x, dH) + g(x, dH) u`` without an output map."""

    W: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g: Callable[[np.ndarray, np.ndarray], np.ndarray]
    m: int

    def flow(self, x, dH, u) -> np.ndarray:
        n = x.shape[0]
        W = np.asarray(self.W(x, dH), dtype=np.float64).reshape(n)
        g = np.asarray(self.g(x, dH), dtype=np.float64).reshape(n, self.m)
        return W + g @ u


@dataclass(frozen=True)
class IrreversiblePort:
    """Constant port matrix ``g``, positive ``gamma_port`` and co-input ``tau``.

    ``tau`` defaults to the all-ones vector: with total energy as ``H`` and
    the sum of compartment entropies as ``S`` there is no freedom left in it.
    """

    g: PortMatrix
    gamma_port: GammaFn
    tau: np.ndarray = None

    def __post_init__(self):
        g = self.g if isinstance(self.g, PortMatrix) else PortMatrix(self.g)
        object.__setattr__(self, "g", g)
        tau = np.ones(g.m) if self.tau is None else self.tau
        object.__setattr__(self, "tau", as_state(tau, g.m, "tau"))

    @property
    def m(self) -> int:
        return self.g.m


Port = Union[None, LegacyPort, IrreversiblePort]


def _always(x, u) -> bool:
    return True


@dataclass(frozen=True)
class IphsSystem:
    """Bundle ``(H, S, J, gamma, port)`` plus an admissible-domain predicate.

    ``domain(x, u)`` returns True when the pair is admissible; ``u`` is None
    when only the state is being checked. ``sampler(rng)`` optionally draws a
    random admissible ``(x, u)`` for audits.
    """

    H: ScalarField
    S: ScalarField
    J: StructureMatrix
    gamma: GammaFn
    port: Port = None
    domain: Callable = _always
    sampler: Optional[Callable] = None
    name: str = "iphs"

    def __post_init__(self):
        if not isinstance(self.J, StructureMatrix):
            object.__setattr__(self, "J", StructureMatrix(self.J))
        n = self.H.dim
        if self.S.dim != n or self.J.n != n:
            raise UsageError(f"dimension mismatch: H has {n}, S has {self.S.dim}, J is {self.J.n}x{self.J.n}")
        if isinstance(self.port, IrreversiblePort) and self.port.g.n != n:
            raise UsageError(f"port matrix has {self.port.g.n} rows, state dimension is {n}")

    @property
    def n(self) -> int:
        return self.H.dim

    @property
    def m(self) -> int:
        return 0 if self.port is None else self.port.m

    @property
    def kind(self) -> str:
        if self.port is None:
            return "closed"
        return "legacy" if isinstance(self.port, LegacyPort) else "irreversible"


class _Parts(NamedTuple):
    dH: np.ndarray
    dS: np.ndarray
    gamma: float
    bracket: float
    drift: np.ndarray
    port_flow: np.ndarray
    y: Optional[np.ndarray]
    gamma_port: float
    port_bracket: float


def _check_x(sys: IphsSystem, x, u=None):
    x = as_state(x, sys.n)
    if not np.isfinite(x).all():
        raise NumericError(f"non-finite state {x.tolist()}")
    if not sys.domain(x, u):
        where = f"x={x.tolist()}" + ("" if u is None else f", u={u.tolist()}")
        raise DomainError(f"{sys.name}: outside admissible domain at {where}")
    return x


def _check_u(sys: IphsSystem, u):
    u = as_state(np.zeros(0) if u is None else u, sys.m, "u")
    if not np.isfinite(u).all():
        raise NumericError(f"non-finite input {u.tolist()}")
    return u


def _grads(sys: IphsSystem, x):
    dH, dS = grad(sys.H, x), grad(sys.S, x)
    if not (np.isfinite(dH).all() and np.isfinite(dS).all()):
        raise NumericError(f"non-finite gradient at x={x.tolist()}")
    return dH, dS


def _drift(sys, x, dH, dS):
    gam = sys.gamma(x, dH, None)
    JdH = sys.J.entries @ dH
    br = float(dS @ JdH)
    return gam, br, (gam * br) * JdH


def port_maps(port: IrreversiblePort, x, dH, dS, u):
    """Irreversible port maps at a point with known gradients.

    Returns ``(flow, y, gamma_port, bracket)`` where
    ``bracket = (g^T dS)^T u - tau^T (g^T dH)``.
    """
    g = port.g.entries
    gTdH = g.T @ dH
    br = float((g.T @ dS) @ u - port.tau @ gTdH)
    gp = port.gamma_port(x, dH, u)
    factor = gp * br
    return factor * (g @ u), factor * gTdH, gp, br


def _parts(sys: IphsSystem, x, u) -> _Parts:
    u = _check_u(sys, u)
    x = _check_x(sys, x, u)
    dH, dS = _grads(sys, x)
    gam, br, dr = _drift(sys, x, dH, dS)
    port = sys.port
    y, gp, pb = None, math.nan, math.nan
    if port is None:
        flow = np.zeros(sys.n)
        y = np.zeros(0)
    elif isinstance(port, LegacyPort):
        flow = port.flow(x, dH, u)
    else:
        flow, y, gp, pb = port_maps(port, x, dH, dS, u)
    return _Parts(dH, dS, gam, br, dr, flow, y, gp, pb)


def drift(sys: IphsSystem, x) -> np.ndarray:
    """``gamma * {S, H}_J * J dH`` at ``x``."""
    x = _check_x(sys, x)
    dH, dS = _grads(sys, x)
    return _drift(sys, x, dH, dS)[2]


def _require_irreversible(sys, what):
    if not isinstance(sys.port, IrreversiblePort):
        raise UnsupportedOperationError(f"{what} is only defined for an irreversible port (system kind: {sys.kind})")


def port_bracket(sys: IphsSystem, x, u) -> float:
    """Interface driving force ``{S_tot, H_tot}_{J_port}``."""
    _require_irreversible(sys, "port_bracket")
    u = _check_u(sys, u)
    x = _check_x(sys, x, u)
    dH, dS = _grads(sys, x)
    g = sys.port.g.entries
    return float((g.T @ dS) @ u - sys.port.tau @ (g.T @ dH))


def vector_field(sys: IphsSystem, x, u=None) -> np.ndarray:
    p = _parts(sys, x, u)
    return p.drift + p.port_flow


def output(sys: IphsSystem, x, u) -> np.ndarray:
    """Conjugated output ``y``; undefined for the legacy affine port."""
    _require_irreversible(sys, "output")
    return _parts(sys, x, u).y


@dataclass(frozen=True)
class BalanceSample:
    """Instantaneous energy/entropy bookkeeping at one ``(t, x, u)``.

    For legacy ports ``y`` is None, ``yTu`` is NaN and ``sigma_port`` is 0
    with ``decomposable=False``: the port entropy creation is folded into
    ``entropy_flux`` and cannot be separated. ``energy_residual`` is then
    measured against the supplied power ``dH^T (W + g u)``.
    """

    t: float
    dH_dt: float
    yTu: float
    sigma_int: float
    sigma_port: float
    entropy_flux: float
    dS_dt: float
    energy_residual: float
    entropy_residual: float
    y: Optional[np.ndarray] = None
    decomposable: bool = True

    def energy_ok(self, tol: float = DEFAULT_TOL_BALANCE) -> bool:
        scale = 1.0 + (abs(self.dH_dt) if math.isnan(self.yTu) else abs(self.yTu))
        return abs(self.energy_residual) <= tol * scale

    def entropy_ok(self, tol: float = DEFAULT_TOL_BALANCE) -> bool:
        return abs(self.entropy_residual) <= tol * (1.0 + abs(self.dS_dt))

    def ok(self, tol: float = DEFAULT_TOL_BALANCE) -> bool:
        return self.energy_ok(tol) and self.entropy_ok(tol) and self.sigma_int >= 0 and self.sigma_port >= 0


def _balance_from_parts(sys: IphsSystem, p: _Parts, u, t) -> tuple[np.ndarray, BalanceSample]:
    f = p.drift + p.port_flow
    dH_dt = float(p.dH @ f)
    dS_dt = float(p.dS @ f)
    sigma_int = p.gamma * p.bracket**2
    if isinstance(sys.port, LegacyPort):
        supply = float(p.dH @ p.port_flow)
        flux = float(p.dS @ p.port_flow)
        return f, BalanceSample(
            t=float(t), dH_dt=dH_dt, yTu=math.nan, sigma_int=sigma_int, sigma_port=0.0,
            entropy_flux=flux, dS_dt=dS_dt,
            energy_residual=dH_dt - supply,
            entropy_residual=dS_dt - flux - sigma_int,
            y=None, decomposable=False,
        )
    if sys.port is None:
        yTu, flux, sigma_port = 0.0, 0.0, 0.0
    else:
        yTu = float(p.y @ u)
        flux = float(sys.port.tau @ p.y)
        sigma_port = p.gamma_port * p.port_bracket**2
    return f, BalanceSample(
        t=float(t), dH_dt=dH_dt, yTu=yTu, sigma_int=sigma_int, sigma_port=sigma_port,
        entropy_flux=flux, dS_dt=dS_dt,
        energy_residual=dH_dt - yTu,
        entropy_residual=dS_dt - flux - sigma_int - sigma_port,
        y=p.y,
    )


def evaluate(sys: IphsSystem, x, u=None, t: float = 0.0) -> tuple[np.ndarray, BalanceSample]:
    """Vector field and balance sample from a single evaluation."""
    u = _check_u(sys, u)
    return _balance_from_parts(sys, _parts(sys, x, u), u, t)


def balance(sys: IphsSystem, x, u=None, t: float = 0.0) -> BalanceSample:
    return evaluate(sys, x, u, t)[1]
