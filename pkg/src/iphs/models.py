"""Built-in models: two heat-conducting compartments and a thermostat.

The state is the pair of compartment entropies ``(S1, S2)``. Each
compartment holds an ideal gas with ``T(S) = T0 exp(S / c)``, so the
internal energy is ``U(S) = c T0 exp(S / c)`` and ``dU/dS = T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .brackets import PortMatrix, StructureMatrix
from .core import GammaFn, IphsSystem, IrreversiblePort, LegacyPort
from .errors import DomainError, UsageError
from .fields import ScalarField, linear_field

__all__ = [
    "TwoCompartmentParams",
    "ideal_gas_temperature",
    "ideal_gas_entropy",
    "two_compartment_legacy",
    "two_compartment_irreversible",
    "two_compartment_closed",
    "MODELS",
    "build_model",
]

SYMPLECTIC_2 = StructureMatrix([[0.0, 1.0], [-1.0, 0.0]])
_EXP_MAX = 700.0


def _temperature(S, T0, c):
    r = np.asarray(S, dtype=np.float64) / c
    # the negated comparison also catches NaN
    if not r.max() <= _EXP_MAX:
        raise DomainError(f"entropy {S} out of range for T0={T0}, c={c}")
    return T0 * np.exp(r)


def ideal_gas_temperature(S, T0: float, c):
    """``T0 * exp(S / c)``; raises :class:`DomainError` rather than overflow."""
    if not (T0 > 0 and (np.asarray(c) > 0).all()):
        raise UsageError(f"T0 and c must be positive, got T0={T0}, c={c}")
    T = _temperature(S, T0, c)
    return float(T) if T.ndim == 0 else T


def ideal_gas_entropy(T, T0: float, c: float):
    """Inverse of :func:`ideal_gas_temperature`."""
    T = np.asarray(T, dtype=np.float64)
    if np.any(T <= 0):
        raise DomainError(f"temperature must be positive, got {T}")
    S = c * np.log(T / T0)
    return float(S) if S.ndim == 0 else S


@dataclass(frozen=True)
class TwoCompartmentParams:
    """Parameters of the two-compartment heat conduction model.

    ``lam`` and ``lam_e`` are the Fourier coefficients of the internal and
    external walls. ``T_domain`` bounds temperatures and the thermostat
    input during evaluation; ``T_sample`` is the narrower box used for
    random audits.
    """

    lam: float = 1.0
    lam_e: float = 0.5
    T0: float = 300.0
    c1: float = 1.0
    c2: float = 1.0
    T_domain: tuple = (1e-3, 1e6)
    T_sample: tuple = (10.0, 2000.0)

    def __post_init__(self):
        for name in ("lam", "lam_e", "T0", "c1", "c2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise UsageError(f"{name} must be a finite positive number, got {v!r}")
        for name in ("T_domain", "T_sample"):
            lo, hi = getattr(self, name)
            if not 0 < lo < hi:
                raise UsageError(f"{name} must satisfy 0 < lo < hi, got {(lo, hi)}")

    @property
    def c(self) -> np.ndarray:
        return np.array([self.c1, self.c2])

    def state_from_temperatures(self, T1: float, T2: float) -> np.ndarray:
        return np.array([ideal_gas_entropy(T1, self.T0, self.c1), ideal_gas_entropy(T2, self.T0, self.c2)])

    def temperatures(self, x) -> np.ndarray:
        return ideal_gas_temperature(np.asarray(x, dtype=np.float64), self.T0, self.c)


def _energy(p: TwoCompartmentParams) -> ScalarField:
    c = p.c

    # parameters are validated once, in TwoCompartmentParams
    def value(x):
        return float(c @ _temperature(x, p.T0, c))

    def gradient(x):
        return _temperature(x, p.T0, c)

    return ScalarField(2, value, gradient, "H")


def _common(p: TwoCompartmentParams):
    H = _energy(p)
    S = linear_field([1.0, 1.0], name="S")
    lam = p.lam
    gamma = GammaFn(lambda x, dH, u: lam / (dH[0] * dH[1]), "gamma")
    lo, hi = p.T_domain

    c = (p.c1, p.c2)
    T0 = p.T0

    # plain floats: this runs at every RK4 stage on length-2 arrays
    def domain(x, u):
        for xi, ci in zip(x.tolist(), c):
            r = xi / ci
            if not r <= _EXP_MAX or not lo <= T0 * math.exp(r) <= hi:
                return False
        return u is None or all(lo <= v <= hi for v in u.tolist())

    slo, shi = p.T_sample

    def sampler(rng):
        T = rng.uniform(slo, shi, size=2)
        u = rng.uniform(slo, shi, size=1)
        return p.state_from_temperatures(*T), u

    return H, S, gamma, domain, sampler


def two_compartment_legacy(p: TwoCompartmentParams | None = None) -> IphsSystem:
    """Affine input map ``W = (0, -lam_e)``, ``g = (0, lam_e / T2)``."""
    p = p or TwoCompartmentParams()
    H, S, gamma, domain, sampler = _common(p)
    lam_e = p.lam_e
    W = np.array([0.0, -lam_e])
    port = LegacyPort(
        W=lambda x, dH: W,
        g=lambda x, dH: np.array([[0.0], [lam_e / dH[1]]]),
        m=1,
    )
    return IphsSystem(H, S, SYMPLECTIC_2, gamma, port, domain, sampler, "two-compartment-legacy")


def two_compartment_irreversible(p: TwoCompartmentParams | None = None) -> IphsSystem:
    """Irreversible port ``g = (0, 1)``, ``gamma_port = lam_e / (T2 u)``, ``tau = 1``."""
    p = p or TwoCompartmentParams()
    H, S, gamma, domain, sampler = _common(p)
    lam_e = p.lam_e
    gamma_port = GammaFn(lambda x, dH, u: lam_e / (dH[1] * u[0]), "gamma_port")
    port = IrreversiblePort(PortMatrix([[0.0], [1.0]]), gamma_port, np.ones(1))
    return IphsSystem(H, S, SYMPLECTIC_2, gamma, port, domain, sampler, "two-compartment-irreversible")


def two_compartment_closed(p: TwoCompartmentParams | None = None) -> IphsSystem:
    """Drift only: the external wall is removed (``lam_e`` is ignored)."""
    p = p or TwoCompartmentParams()
    H, S, gamma, domain, sampler = _common(p)

    def closed_sampler(rng):
        return sampler(rng)[0], np.zeros(0)

    return IphsSystem(H, S, SYMPLECTIC_2, gamma, None, domain, closed_sampler, "two-compartment-closed")


MODELS = {
    "two-compartment-legacy": two_compartment_legacy,
    "two-compartment-irreversible": two_compartment_irreversible,
    "two-compartment-closed": two_compartment_closed,
}


def build_model(name: str, params: TwoCompartmentParams | None = None) -> IphsSystem:
    try:
        factory = MODELS[name]
    except KeyError:
        raise UsageError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    return factory(params)
