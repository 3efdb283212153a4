"""Fixed-step RK4 integration with per-step balance auditing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import DEFAULT_TOL_BALANCE, BalanceSample, IphsSystem, evaluate, vector_field
from .errors import BalanceViolationError, IntegrationError, IphsError, UsageError
from .fields import as_state

__all__ = [
    "InputSignal",
    "Trajectory",
    "BalanceReport",
    "rk4_step",
    "simulate",
    "balance_report",
    "summarize_columns",
    "ABORT_FACTOR",
]

# simulate aborts once a residual exceeds tol_balance * ABORT_FACTOR
ABORT_FACTOR = 1e3

BALANCE_FIELDS = (
    "dH_dt", "yTu", "energy_residual", "sigma_int", "sigma_port",
    "entropy_flux", "dS_dt", "entropy_residual",
)


@dataclass(frozen=True)
class InputSignal:
    """Time-dependent input ``u(t)``.

    kind        params
    ----------  -------------------------------------------
    constant    value
    step        before, after, t_switch
    sinusoid    mean, amplitude, period, phase (radians)
    table       times (increasing), values; piecewise constant,
                holding values[k] on [times[k], times[k+1])
    """

    kind: str
    params: dict = field(default_factory=dict)

    KINDS = ("constant", "step", "sinusoid", "table")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise UsageError(f"unknown input kind {self.kind!r}; choose from {self.KINDS}")
        p = self.params
        required = {
            "constant": ("value",),
            "step": ("before", "after", "t_switch"),
            "sinusoid": ("mean", "amplitude", "period"),
            "table": ("times", "values"),
        }[self.kind]
        missing = [k for k in required if k not in p]
        if missing:
            raise UsageError(f"input kind {self.kind!r} is missing {missing}")
        if self.kind == "sinusoid" and not p["period"] > 0:
            raise UsageError("sinusoid period must be positive")
        if self.kind == "table":
            ts = np.asarray(p["times"], dtype=float)
            if ts.ndim != 1 or ts.size == 0 or np.any(np.diff(ts) <= 0):
                raise UsageError("table times must be a non-empty strictly increasing list")
            if len(p["values"]) != ts.size:
                raise UsageError("table times and values differ in length")

    @classmethod
    def constant(cls, value):
        return cls("constant", {"value": value})

    def __call__(self, t: float) -> np.ndarray:
        p = self.params
        if self.kind == "constant":
            v = p["value"]
        elif self.kind == "step":
            v = p["before"] if t < p["t_switch"] else p["after"]
        elif self.kind == "sinusoid":
            mean = np.asarray(p["mean"], dtype=float)
            amp = np.asarray(p["amplitude"], dtype=float)
            v = mean + amp * np.sin(2.0 * math.pi * t / p["period"] + p.get("phase", 0.0))
        else:
            k = int(np.searchsorted(np.asarray(p["times"], dtype=float), t, side="right")) - 1
            v = p["values"][max(k, 0)]
        return np.array(v, dtype=np.float64, ndmin=1)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    outputs: Optional[np.ndarray]
    balances: list

    def __len__(self):
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(b, name) for b in self.balances], dtype=np.float64)


_STAGES = ((0.0, None, 0.0), (0.5, 0, 0.5), (0.5, 1, 0.5), (1.0, 2, 1.0))


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, x, h: float, k1=None) -> np.ndarray:
    """One classical Runge-Kutta step of ``dx/dt = f(t, x)``.

    ``k1`` may carry an already computed ``f(t, x)``.
    """
    if not h > 0:
        raise UsageError(f"step h must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    k = [] if k1 is None else [np.asarray(k1, dtype=np.float64)]
    for i, (ct, prev, a) in enumerate(_STAGES):
        if i < len(k):
            continue
        xi = x if prev is None else x + (a * h) * k[prev]
        try:
            k.append(np.asarray(f(t + ct * h, xi), dtype=np.float64))
        except IphsError as exc:
            raise IntegrationError(f"RK4 stage {i} failed at t={t + ct * h:g}: {exc}", stage=i, cause=exc) from exc
    return x + (h / 6.0) * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3])


def _n_steps(t0, t1, h):
    if not t1 > t0:
        raise UsageError(f"need t1 > t0, got t0={t0}, t1={t1}")
    if not h > 0:
        raise UsageError(f"step h must be positive, got {h}")
    n = round((t1 - t0) / h)
    if n < 1 or abs(n * h - (t1 - t0)) > 1e-9 * max(1.0, abs(t1 - t0)):
        raise UsageError(f"span [{t0}, {t1}] is not an integer number of steps of h={h}")
    return int(n)


def simulate(
    sys: IphsSystem,
    x0,
    u: Optional[InputSignal | Callable] = None,
    t0: float = 0.0,
    t1: float = 1.0,
    h: float = 1e-3,
    tol_balance: float = DEFAULT_TOL_BALANCE,
) -> Trajectory:
    """Integrate ``sys`` from ``x0`` on ``[t0, t1]`` with fixed step ``h``.

    The input is sampled at the RK4 stage times. A :class:`BalanceSample` is
    recorded at every grid point. On a domain exit the partial trajectory is
    attached to the raised :class:`IntegrationError`.
    """
    n = _n_steps(t0, t1, h)
    x = np.array(as_state(x0, sys.n, "x0"))
    if u is None:
        if sys.m:
            raise UsageError(f"{sys.name} needs an input signal (m={sys.m})")
        u = lambda t: np.zeros(0)  # noqa: E731
    abort_tol = tol_balance * ABORT_FACTOR
    decomposable = sys.kind != "legacy"

    times = t0 + h * np.arange(n + 1)
    states = np.empty((n + 1, sys.n))
    inputs = np.empty((n + 1, sys.m))
    outputs = np.empty((n + 1, sys.m)) if decomposable else None
    balances: list[BalanceSample] = []

    def partial(k):
        return Trajectory(times[:k].copy(), states[:k].copy(), inputs[:k].copy(),
                          None if outputs is None else outputs[:k].copy(), list(balances))

    def f(t, xs):
        return vector_field(sys, xs, u(t))

    for k in range(n + 1):
        t = float(times[k])
        uk = as_state(u(t), sys.m, "u")
        try:
            fk, b = evaluate(sys, x, uk, t)
        except IphsError as exc:
            raise IntegrationError(f"step {k}, t={t:g}: {exc}", step=k, trajectory=partial(k), cause=exc) from exc
        states[k], inputs[k] = x, uk
        if outputs is not None:
            outputs[k] = b.y
        balances.append(b)
        if not b.ok(abort_tol):
            raise BalanceViolationError(
                f"balance violated at step {k}, t={t:g}: energy residual {b.energy_residual:.3e}, "
                f"entropy residual {b.entropy_residual:.3e}",
                step=k, trajectory=partial(k + 1),
            )
        if k == n:
            break
        try:
            x = rk4_step(f, t, x, h, k1=fk)
        except IntegrationError as exc:
            exc.step, exc.trajectory = k, partial(k + 1)
            raise
    return Trajectory(times, states, inputs, outputs, balances)


@dataclass(frozen=True)
class BalanceReport:
    n_samples: int
    max_energy_residual: float
    max_entropy_residual: float
    min_sigma_int: float
    min_sigma_port: float
    entropy_produced: float
    entropy_exchanged: float

    def lines(self) -> list[str]:
        return [
            f"samples: {self.n_samples}",
            f"max |energy_residual|: {self.max_energy_residual:.6e}",
            f"max |entropy_residual|: {self.max_entropy_residual:.6e}",
            f"min sigma_int: {self.min_sigma_int:.6e}",
            f"min sigma_port: {self.min_sigma_port:.6e}",
            f"total entropy produced: {self.entropy_produced:.12g}",
            f"total entropy exchanged: {self.entropy_exchanged:.12g}",
        ]

    def __str__(self):
        return "\n".join(self.lines())


def summarize_columns(times: Sequence[float], cols: dict) -> BalanceReport:
    """Aggregate balance columns; totals use trapezoidal quadrature."""
    t = np.asarray(times, dtype=np.float64)
    if t.size == 0:
        raise UsageError("cannot summarize an empty trajectory")
    c = {k: np.asarray(cols[k], dtype=np.float64) for k in ("energy_residual", "entropy_residual",
                                                          "sigma_int", "sigma_port", "entropy_flux")}
    if t.size == 1:
        produced = exchanged = 0.0
    else:
        produced = float(np.trapezoid(c["sigma_int"] + c["sigma_port"], t))
        exchanged = float(np.trapezoid(c["entropy_flux"], t))
    return BalanceReport(
        n_samples=int(t.size),
        max_energy_residual=float(np.max(np.abs(c["energy_residual"]))),
        max_entropy_residual=float(np.max(np.abs(c["entropy_residual"]))),
        min_sigma_int=float(np.min(c["sigma_int"])),
        min_sigma_port=float(np.min(c["sigma_port"])),
        entropy_produced=produced,
        entropy_exchanged=exchanged,
    )


def balance_report(traj: Trajectory) -> BalanceReport:
    if len(traj) == 0:
        raise UsageError("cannot summarize an empty trajectory")
    return summarize_columns(traj.times, {k: traj.column(k) for k in BALANCE_FIELDS})
