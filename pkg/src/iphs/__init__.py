"""Irreversible port-Hamiltonian systems: modelling, simulation and balance audits."""

from .brackets import PortMatrix, StructureMatrix, is_skew, poisson_bracket, port_structure
from .core import (
    BalanceSample,
    GammaFn,
    IphsSystem,
    IrreversiblePort,
    LegacyPort,
    balance,
    drift,
    output,
    port_bracket,
    vector_field,
)
from .embedding import derive_irreversible_port, extend_reversible, restrict_reversible
from .fields import ScalarField, check_gradient, eval_field, grad
from .integrate import InputSignal, Trajectory, balance_report, rk4_step, simulate
from .models import (
    TwoCompartmentParams,
    ideal_gas_temperature,
    two_compartment_closed,
    two_compartment_irreversible,
    two_compartment_legacy,
)

__version__ = "0.1.0"
