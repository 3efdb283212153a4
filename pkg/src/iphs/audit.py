"""Invariant audits at random admissible states (backs ``iphs check``)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .brackets import is_skew
from .core import (
    DEFAULT_TOL_BALANCE,
    IphsSystem,
    balance,
    drift,
    vector_field,
)
from .errors import IphsError, ModelViolationError
from .fields import check_gradient, grad

__all__ = ["CheckResult", "audit_system", "audit_skew", "audit_equivalence"]

GRAD_STEP = 1e-5
GRAD_TOL = 1e-5


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_error: float
    passed: bool
    detail: str = ""

    def line(self, label: str = "") -> str:
        status = "PASS" if self.passed else "FAIL"
        prefix = f"{label:<32s} " if label else ""
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{prefix}{self.name:<22s} max_err={self.max_error:.3e}  {status}{extra}"


def audit_skew(J) -> CheckResult:
    J = np.asarray(J, dtype=np.float64)
    err = float(np.max(np.abs(J + J.T))) if J.size else 0.0
    return CheckResult("is_skew", err, is_skew(J, 0.0))


def audit_system(sys: IphsSystem, n_samples: int = 1000, seed: int = 0,
                 tol: float = DEFAULT_TOL_BALANCE) -> list[CheckResult]:
    """Run the pointwise invariant suite on ``n_samples`` random draws."""
    if sys.sampler is None:
        raise ValueError(f"{sys.name} has no sampler; cannot draw random states")
    rng = np.random.default_rng(seed)
    draws = [sys.sampler(rng) for _ in range(n_samples)]
    results = [audit_skew(sys.J.entries)]

    for fld in (sys.H, sys.S):
        worst, ok = 0.0, True
        for x, _ in draws:
            rep = check_gradient(fld, x, GRAD_STEP, GRAD_TOL)
            worst = max(worst, rep.max_rel_error)
            ok &= rep.passed
        results.append(CheckResult(f"gradient_{fld.name}", worst, ok))

    # positivity first: the balance checks are meaningless if gamma <= 0
    samples = []
    try:
        for x, u in draws:
            samples.append((x, u, balance(sys, x, u)))
    except ModelViolationError as exc:
        results.append(CheckResult("positivity", float("nan"), False, str(exc)))
        return results
    except IphsError as exc:
        results.append(CheckResult("evaluation", float("nan"), False, str(exc)))
        return results
    results.append(CheckResult("positivity", 0.0, True))

    e_err = max(abs(b.energy_residual) / (1 + abs(b.dH_dt if np.isnan(b.yTu) else b.yTu)) for *_, b in samples)
    s_err = max(abs(b.entropy_residual) / (1 + abs(b.dS_dt)) for *_, b in samples)
    min_sigma = min(min(b.sigma_int, b.sigma_port) for *_, b in samples)
    results.append(CheckResult("energy_balance", e_err, e_err <= tol))
    results.append(CheckResult("entropy_balance", s_err, s_err <= tol))
    results.append(CheckResult("sigma_nonnegative", max(0.0, -min_sigma), min_sigma >= 0))

    orth, prod = 0.0, 0.0
    for x, u, b in samples:
        d = drift(sys, x)
        dH, dS = grad(sys.H, x), grad(sys.S, x)
        scale = np.linalg.norm(dH) * np.linalg.norm(d)
        if scale > 0:
            orth = max(orth, abs(dH @ d) / scale)
        prod = max(prod, abs(dS @ d - b.sigma_int) / max(b.sigma_int, 1e-300) if b.sigma_int > 0 else abs(dS @ d))
    results.append(CheckResult("drift_orthogonality", orth, orth <= tol))
    results.append(CheckResult("drift_entropy", prod, prod <= 1e-12))
    return results


def audit_equivalence(a: IphsSystem, b: IphsSystem, n_samples: int = 1000, seed: int = 0,
                      tol: float = 1e-12) -> CheckResult:
    """Max relative difference between two vector fields on shared draws."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        x, u = a.sampler(rng)
        fa, fb = vector_field(a, x, u), vector_field(b, x, u)
        worst = max(worst, float(np.max(np.abs(fa - fb)) / max(np.max(np.abs(fb)), 1e-300)))
    return CheckResult("legacy_equivalence", worst, worst <= tol)
