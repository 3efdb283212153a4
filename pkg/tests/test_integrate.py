import math

import numpy as np
import pytest

from iphs.core import balance
from iphs.errors import IntegrationError, UsageError
from iphs.integrate import InputSignal, balance_report, rk4_step, simulate


def test_rk4_zero_field():
    x = np.array([1.0, -2.0])
    np.testing.assert_array_equal(rk4_step(lambda t, x: np.zeros(2), 0.0, x, 0.3), x)


def test_rk4_constant_field():
    a = np.array([0.5, -1.25])
    np.testing.assert_array_equal(rk4_step(lambda t, x: a, 0.0, np.zeros(2), 0.5), a * 0.5)


def test_rk4_exponential():
    x1 = rk4_step(lambda t, x: -x, 0.0, np.array([1.0]), 0.1)
    assert abs(x1[0] - math.exp(-0.1)) <= 1e-7
    assert x1[0] == pytest.approx(0.9048375, abs=1e-15)


def test_rk4_reports_stage():
    def f(t, x):
        if t >= 0.05:
            from iphs.errors import DomainError
            raise DomainError("boom")
        return x

    with pytest.raises(IntegrationError) as info:
        rk4_step(f, 0.0, np.array([1.0]), 0.1)
    assert info.value.stage == 1


def test_rk4_rejects_bad_step():
    with pytest.raises(UsageError):
        rk4_step(lambda t, x: x, 0.0, np.array([1.0]), 0.0)


def test_input_signals():
    assert InputSignal.constant(3.0)(7.0).tolist() == [3.0]
    step = InputSignal("step", {"before": 300.0, "after": 320.0, "t_switch": 1.0})
    assert step(0.999)[0] == 300.0 and step(1.0)[0] == 320.0
    sine = InputSignal("sinusoid", {"mean": 300.0, "amplitude": 10.0, "period": 4.0})
    assert sine(1.0)[0] == pytest.approx(310.0)
    table = InputSignal("table", {"times": [0.0, 1.0, 2.0], "values": [1.0, 2.0, 3.0]})
    assert [table(t)[0] for t in (-1.0, 0.5, 1.0, 5.0)] == [1.0, 1.0, 2.0, 3.0]
    with pytest.raises(UsageError):
        InputSignal("ramp", {})
    with pytest.raises(UsageError):
        InputSignal("table", {"times": [1.0, 0.5], "values": [1.0, 2.0]})


def test_equilibrium_trajectory(irr, params):
    x0 = params.state_from_temperatures(300.0, 300.0)
    tr = simulate(irr, x0, InputSignal.constant(300.0), 0.0, 2.0, 0.01)
    assert len(tr) == 201
    assert np.all(tr.states == x0)
    rep = balance_report(tr)
    assert rep.max_energy_residual == 0.0 and rep.max_entropy_residual == 0.0
    assert rep.entropy_produced == 0.0 and rep.entropy_exchanged == 0.0


def test_trajectory_shapes(irr, legacy, x_ref):
    tr = simulate(irr, x_ref, InputSignal.constant(400.0), 0.0, 0.1, 0.01)
    assert tr.states.shape == (11, 2) and tr.inputs.shape == (11, 1) and tr.outputs.shape == (11, 1)
    assert np.allclose(np.diff(tr.times), 0.01)
    assert tr.outputs[0, 0] == pytest.approx(0.0625, rel=1e-13)
    tl = simulate(legacy, x_ref, InputSignal.constant(400.0), 0.0, 0.1, 0.01)
    assert tl.outputs is None
    np.testing.assert_allclose(tl.states, tr.states, rtol=1e-12)


def test_drift_energy_conserved_and_entropy_grows(closed, x_ref):
    tr = simulate(closed, x_ref, None, 0.0, 10.0, 1e-3)
    H = np.array([closed.H(x) for x in tr.states])
    assert np.max(np.abs(H - H[0])) / H[0] <= 1e-10
    assert np.all(np.diff(tr.states.sum(axis=1)) >= 0)


def test_entropy_produced_matches_endpoint_difference(closed, x_ref):
    # trapezoid error ~ h^2/12 |f'(0)|; h = 5e-4 keeps it well under 1e-6 relative
    tr = simulate(closed, x_ref, None, 0.0, 5.0, 5e-4)
    rep = balance_report(tr)
    dS = tr.states[-1].sum() - tr.states[0].sum()
    assert rep.entropy_produced > 0
    assert rep.entropy_produced == pytest.approx(dS, rel=1e-6)


def test_full_run_sigma_port_nonnegative(irr, x_ref):
    sig = InputSignal("sinusoid", {"mean": 330.0, "amplitude": 60.0, "period": 3.0})
    rep = balance_report(simulate(irr, x_ref, sig, 0.0, 10.0, 1e-2))
    assert rep.min_sigma_port >= 0 and rep.min_sigma_int >= 0
    assert rep.max_energy_residual <= 1e-10 * 100


def test_relaxation_to_thermostat(irr, x_ref):
    # the full t = 100 run lives in the acceptance suite
    tr = simulate(irr, x_ref, InputSignal.constant(320.0), 0.0, 20.0, 1e-2)
    T = np.exp(tr.states[-1]) * 300.0
    assert np.all(np.abs(T / 320.0 - 1) <= 1e-3)
    ref = simulate(irr, x_ref, InputSignal.constant(320.0), 0.0, 20.0, 1e-3)
    np.testing.assert_allclose(tr.states[-1], ref.states[-1], rtol=1e-6)


def test_step_input_is_sampled_per_stage(irr, x_ref):
    sig = InputSignal("step", {"before": 400.0, "after": 250.0, "t_switch": 0.5})
    tr = simulate(irr, x_ref, sig, 0.0, 1.0, 0.05)
    assert tr.inputs[9, 0] == 400.0 and tr.inputs[10, 0] == 250.0
    assert all(b.ok() for b in tr.balances)


def test_convergence_order(closed, x_ref):
    h = 0.1
    ref = simulate(closed, x_ref, None, 0.0, 2.0, h / 16).states[::16]
    e1 = np.max(np.abs(simulate(closed, x_ref, None, 0.0, 2.0, h).states - ref))
    e2 = np.max(np.abs(simulate(closed, x_ref, None, 0.0, 2.0, h / 2).states[::2] - ref))
    assert 12 <= e1 / e2 <= 20


def test_domain_exit_returns_partial(irr, params, x_ref):
    # thermostat beyond the admissible input box after t = 0.2
    sig = InputSignal("step", {"before": 400.0, "after": 2e6, "t_switch": 0.2})
    with pytest.raises(IntegrationError) as info:
        simulate(irr, x_ref, sig, 0.0, 1.0, 0.05)
    tr = info.value.trajectory
    assert tr is not None and 0 < len(tr) < 21
    assert tr.times[-1] < 0.2 + 1e-12


def test_simulate_argument_checks(irr, closed, x_ref):
    with pytest.raises(UsageError):
        simulate(irr, x_ref, InputSignal.constant(400.0), 1.0, 0.0, 0.1)
    with pytest.raises(UsageError):
        simulate(irr, x_ref, InputSignal.constant(400.0), 0.0, 1.0, 0.3)
    with pytest.raises(UsageError):
        simulate(irr, x_ref, None, 0.0, 1.0, 0.1)


def test_balance_report_empty():
    from iphs.integrate import Trajectory

    with pytest.raises(UsageError):
        balance_report(Trajectory(np.zeros(0), np.zeros((0, 2)), np.zeros((0, 1)), None, []))


def test_residual_invariants_every_step(irr, x_ref):
    tr = simulate(irr, x_ref, InputSignal.constant(500.0), 0.0, 5.0, 0.01)
    assert all(b.ok(1e-10) for b in tr.balances)
    b0 = balance(irr, x_ref, [500.0])
    assert tr.balances[0].sigma_int == b0.sigma_int and tr.balances[0].dS_dt == b0.dS_dt


def test_concurrent_simulations_share_system(irr, x_ref):
    from concurrent.futures import ThreadPoolExecutor

    def job(v):
        return simulate(irr, x_ref, InputSignal.constant(v), 0.0, 1.0, 0.01).states[-1]

    values = [310.0, 400.0, 520.0, 310.0]
    with ThreadPoolExecutor(4) as ex:
        parallel = list(ex.map(job, values))
    for v, got in zip(values, parallel):
        np.testing.assert_array_equal(got, job(v))
