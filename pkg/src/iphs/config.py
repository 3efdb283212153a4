"""JSON run configuration.

Top-level keys::

    model           built-in model name, or an object with "type": "custom"
    params          built-in models only: lambda, lambda_e, T0, c1, c2
    x0              initial state, or
    initial_temperatures   [T1, T2] for the built-in two-compartment models
    input           {"kind": ..., ...}; see iphs.integrate.InputSignal
    t0, t1, h       time span and step
    tol_balance     relative residual tolerance (default 1e-10)
    outputs         {"csv": path, "report": path}

A custom model object carries J, H, S, gamma, an optional port
{g, tau, gamma_port} and an optional sample_box {x: [[lo, hi], ...],
u: [[lo, hi], ...]} used by ``iphs check``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .brackets import PortMatrix, StructureMatrix
from .core import DEFAULT_TOL_BALANCE, GammaFn, IphsSystem, IrreversiblePort, constant_gamma
from .errors import IphsError
from .fields import ScalarField, linear_field, quadratic_field
from .integrate import InputSignal
from .models import MODELS, TwoCompartmentParams, build_model, ideal_gas_temperature

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "build_custom"]

# config key -> TwoCompartmentParams attribute
PARAM_KEYS = {"lambda": "lam", "lambda_e": "lam_e", "T0": "T0", "c1": "c1", "c2": "c2"}


class ConfigError(IphsError):
    """Configuration could not be parsed or validated."""


@dataclass
class RunConfig:
    model: Any
    system: IphsSystem
    x0: np.ndarray
    input: Optional[InputSignal]
    t0: float = 0.0
    t1: float = 1.0
    h: float = 1e-3
    tol_balance: float = DEFAULT_TOL_BALANCE
    outputs: dict = field(default_factory=dict)
    raw_J: Optional[np.ndarray] = None
    params: Optional[TwoCompartmentParams] = None


def _num(d: dict, key: str, path: str, *, positive=False, default=None) -> float:
    if key not in d:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}: required field is missing")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}: expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}: must be > 0, got {v!r}")
    return float(v)


def _matrix(v, path: str, ndim: int = 2) -> np.ndarray:
    try:
        a = np.array(v, dtype=np.float64)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a numeric {'matrix' if ndim == 2 else 'vector'}") from None
    if ndim == 2 and a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != ndim or a.size == 0 or not np.isfinite(a).all():
        raise ConfigError(f"{path}: expected a finite non-empty {'matrix' if ndim == 2 else 'vector'}")
    return a


def _field(spec: dict, n: int, path: str, name: str) -> ScalarField:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{path}: expected an object with a 'kind'")
    kind = spec["kind"]
    if kind == "linear":
        a = _matrix(spec.get("coeffs"), f"{path}.coeffs", 1)
        f = linear_field(a, name)
    elif kind == "quadratic":
        f = quadratic_field(_matrix(spec.get("Q"), f"{path}.Q"), name)
    elif kind == "ideal_gas":
        T0 = _num(spec, "T0", path, positive=True)
        c = _matrix(spec.get("c"), f"{path}.c", 1)
        if (c <= 0).any():
            raise ConfigError(f"{path}.c: heat capacities must be > 0")
        f = ScalarField(
            c.shape[0],
            lambda x: float(np.sum(c * ideal_gas_temperature(x, T0, c))),
            lambda x: ideal_gas_temperature(x, T0, c),
            name,
        )
    else:
        raise ConfigError(f"{path}.kind: unknown field kind {kind!r} (linear, quadratic, ideal_gas)")
    if f.dim != n:
        raise ConfigError(f"{path}: field has dimension {f.dim}, J has {n}")
    return f


def _gamma(spec: dict, path: str, name: str, g: Optional[np.ndarray] = None) -> GammaFn:
    """``constant``: fixed value. ``fourier``: coeff / prod(dH), or for a port
    coeff / (prod(g^T dH) * prod(u))."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{path}: expected an object with a 'kind'")
    if spec["kind"] == "constant":
        return constant_gamma(_num(spec, "value", path), name)
    if spec["kind"] == "fourier":
        coeff = _num(spec, "coeff", path)
        if g is None:
            return GammaFn(lambda x, dH, u: coeff / float(np.prod(dH)), name)
        return GammaFn(lambda x, dH, u: coeff / (float(np.prod(g.T @ dH)) * float(np.prod(u))), name)
    raise ConfigError(f"{path}.kind: unknown gamma kind {spec['kind']!r} (constant, fourier)")


def _box(v, dim: int, path: str, default) -> np.ndarray:
    if v is None:
        return np.tile(default, (dim, 1))
    b = _matrix(v, path)
    if b.shape != (dim, 2) or not (b[:, 0] < b[:, 1]).all():
        raise ConfigError(f"{path}: expected {dim} rows of [lo, hi] with lo < hi")
    return b


def build_custom(spec: dict, path: str = "model", check_skew: bool = True):
    """Build a custom system. Returns ``(system, raw_J)``.

    With ``check_skew=False`` a non-skew J is returned in ``raw_J`` and
    ``system`` is None, so that ``iphs check`` can report the failure.
    """
    J = _matrix(spec.get("J"), f"{path}.J")
    if J.shape[0] != J.shape[1]:
        raise ConfigError(f"{path}.J: must be square, got shape {J.shape}")
    n = J.shape[0]
    try:
        Jm = StructureMatrix(J)
    except IphsError as exc:
        if check_skew:
            raise ConfigError(f"{path}.J: {exc}") from None
        return None, J
    H = _field(spec.get("H"), n, f"{path}.H", "H")
    S = _field(spec.get("S"), n, f"{path}.S", "S")
    gamma = _gamma(spec.get("gamma"), f"{path}.gamma", "gamma")
    port = None
    m = 0
    pspec = spec.get("port")
    if pspec is not None:
        if not isinstance(pspec, dict):
            raise ConfigError(f"{path}.port: expected an object")
        g = _matrix(pspec.get("g"), f"{path}.port.g")
        if g.shape[0] != n:
            raise ConfigError(f"{path}.port.g: has {g.shape[0]} rows, J has {n}")
        m = g.shape[1]
        tau = _matrix(pspec.get("tau", [1.0] * m), f"{path}.port.tau", 1)
        if tau.shape[0] != m:
            raise ConfigError(f"{path}.port.tau: length {tau.shape[0]}, expected {m}")
        gp = _gamma(pspec.get("gamma_port"), f"{path}.port.gamma_port", "gamma_port", g)
        port = IrreversiblePort(PortMatrix(g), gp, tau)
    sb = spec.get("sample_box") or {}
    xbox = _box(sb.get("x"), n, f"{path}.sample_box.x", [-1.0, 1.0])
    ubox = _box(sb.get("u"), m, f"{path}.sample_box.u", [0.5, 2.0]) if m else np.zeros((0, 2))

    def sampler(rng):
        return rng.uniform(xbox[:, 0], xbox[:, 1]), rng.uniform(ubox[:, 0], ubox[:, 1])

    system = IphsSystem(H, S, Jm, gamma, port, sampler=sampler, name=spec.get("name", "custom"))
    return system, J


def _params(d: dict) -> TwoCompartmentParams:
    if not isinstance(d, dict):
        raise ConfigError("params: expected an object")
    unknown = sorted(set(d) - set(PARAM_KEYS))
    if unknown:
        raise ConfigError(f"params: unknown fields {unknown}; allowed {sorted(PARAM_KEYS)}")
    kw = {attr: _num(d, key, "params", positive=True) for key, attr in PARAM_KEYS.items() if key in d}
    return TwoCompartmentParams(**kw)


def _input(d, m: int) -> Optional[InputSignal]:
    if d is None:
        if m:
            raise ConfigError("input: required field is missing")
        return None
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("input: expected an object with a 'kind'")
    params = {k: v for k, v in d.items() if k != "kind"}
    try:
        sig = InputSignal(d["kind"], params)
        width = sig(0.0).shape[0]
    except (IphsError, TypeError, ValueError) as exc:
        raise ConfigError(f"input: {exc}") from None
    if width != m:
        raise ConfigError(f"input: signal has {width} components, model expects {m}")
    return sig


def parse_config(d: dict, *, check_skew: bool = True) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("top level: expected a JSON object")
    model = d.get("model")
    raw_J = None
    if isinstance(model, str):
        if model not in MODELS:
            raise ConfigError(f"model: unknown model {model!r}; choose from {sorted(MODELS)}")
        params = _params(d.get("params", {}))
        system = build_model(model, params)
    elif isinstance(model, dict) and model.get("type") == "custom":
        if "params" in d:
            raise ConfigError("params: only valid for built-in models")
        params = None
        system, raw_J = build_custom(model, check_skew=check_skew)
        if system is None:
            return RunConfig(model, None, np.zeros(0), None, raw_J=raw_J)
    else:
        raise ConfigError("model: expected a built-in model name or an object with \"type\": \"custom\"")

    if "x0" in d:
        x0 = _matrix(d["x0"], "x0", 1)
        if x0.shape[0] != system.n:
            raise ConfigError(f"x0: length {x0.shape[0]}, model state dimension is {system.n}")
    elif "initial_temperatures" in d:
        if params is None:
            raise ConfigError("initial_temperatures: only valid for built-in models")
        T = _matrix(d["initial_temperatures"], "initial_temperatures", 1)
        if T.shape != (2,) or (T <= 0).any():
            raise ConfigError("initial_temperatures: expected two positive temperatures")
        x0 = params.state_from_temperatures(*T)
    else:
        raise ConfigError("x0: required field is missing (or give initial_temperatures)")

    sig = _input(d.get("input"), system.m)
    t0 = _num(d, "t0", "config", default=0.0)
    t1 = _num(d, "t1", "config")
    h = _num(d, "h", "config", positive=True)
    if t1 <= t0:
        raise ConfigError(f"config.t1: must exceed t0={t0}, got {t1}")
    tol = _num(d, "tol_balance", "config", positive=True, default=DEFAULT_TOL_BALANCE)
    outputs = d.get("outputs", {})
    if not isinstance(outputs, dict) or set(outputs) - {"csv", "report"}:
        raise ConfigError("outputs: expected an object with optional 'csv' and 'report' paths")
    u0 = sig(t0) if sig is not None else np.zeros(0)
    if not system.domain(x0, u0):
        raise ConfigError(f"x0: initial state {x0.tolist()} (input {u0.tolist()}) is outside the admissible domain")
    return RunConfig(model, system, x0, sig, t0, t1, h, tol, dict(outputs), raw_J, params)


def load_config(path, *, check_skew: bool = True) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(d, check_skew=check_skew)
