import math

import numpy as np
import pytest

from alphaflow.errors import ConfigError, GuardRejectionAtMinStep, MaxStepsExceeded
from alphaflow.ode import IntegratorConfig, integrate


def decay(t, y):
    return -y


def oscillator(t, y):
    return np.array([y[1], -y[0]])


def test_linear_decay():
    tr = integrate(decay, [1.0], 1.0)
    assert tr.t_final == 1.0
    assert abs(tr.y_final[0] - math.exp(-1)) <= 1e-9
    assert np.all(np.diff(tr.t) > 0)


def test_oscillator_energy_and_solution():
    tr = integrate(oscillator, [1.0, 0.0], 100.0)
    energy = np.sum(tr.y**2, axis=1)
    assert np.abs(energy - 1.0).max() <= 1e-6
    assert np.allclose(tr.y_final, [math.cos(100.0), -math.sin(100.0)], atol=1e-6)


def test_time_dependent_field():
    # y' = cos t, y = sin t
    tr = integrate(lambda t, y: np.array([math.cos(t)]), [0.0], 3.0)
    assert abs(tr.y_final[0] - math.sin(3.0)) <= 1e-9


def observed_order(n_steps, errors):
    """Slope of -log(error) against log(number of steps)."""
    return -np.polyfit(np.log(n_steps), np.log(errors), 1)[0]


def test_observed_order_adaptive():
    ns, es = [], []
    for k in range(0, 24, 2):
        tol = 1e-5 * 2.0**-k
        tr = integrate(decay, [1.0], 1.0, IntegratorConfig(atol=tol, rtol=tol))
        ns.append(tr.n_accepted)
        es.append(abs(tr.y_final[0] - math.exp(-1)))
    assert observed_order(ns, es) >= 4.0
    # errors shrink monotonically with the tolerance
    assert all(b < a for a, b in zip(es, es[1:]))


def test_observed_order_fixed_step():
    hs = [0.1, 0.05, 0.025, 0.0125]
    rk4 = []
    dp = []
    for h in hs:
        rk4.append(integrate(decay, [1.0], 1.0, IntegratorConfig(method="RK4", h0=h)).y_final[0])
        # tolerances this loose never reject, so the step stays at h_max
        cfg = IntegratorConfig(atol=1e10, rtol=1e10, h0=h, h_max=h)
        dp.append(integrate(decay, [1.0], 1.0, cfg).y_final[0])
    n = [1 / h for h in hs]
    e4 = np.abs(np.array(rk4) - math.exp(-1))
    e5 = np.abs(np.array(dp) - math.exp(-1))
    assert observed_order(n, e4) == pytest.approx(4.0, abs=0.15)
    assert observed_order(n, e5) >= 4.5


def test_deterministic():
    a = integrate(oscillator, [1.0, 0.5], 20.0)
    b = integrate(oscillator, [1.0, 0.5], 20.0)
    assert np.array_equal(a.t, b.t)
    assert np.array_equal(a.y, b.y)


def test_guard_rejection_near_ln2():
    cfg = IntegratorConfig(guard=lambda t, y: bool(y[0] >= 0.5))
    with pytest.raises(GuardRejectionAtMinStep) as info:
        integrate(decay, [1.0], 2.0, cfg)
    exc = info.value
    assert exc.t == pytest.approx(math.log(2), abs=1e-6)
    assert exc.state[0] >= 0.5
    assert exc.trajectory is not None
    assert exc.trajectory.t_final == exc.t


def test_guard_exception_is_a_rejection():
    def field(t, y):
        if y[0] < 0.5:
            raise ArithmeticError("outside domain")
        return -y

    cfg = IntegratorConfig(guard_exceptions=(ArithmeticError,))
    with pytest.raises(GuardRejectionAtMinStep):
        integrate(field, [1.0], 2.0, cfg)


def test_guard_sees_every_stage():
    seen = []

    def guard(t, y):
        seen.append(t)
        return True

    tr = integrate(decay, [1.0], 1.0, IntegratorConfig(guard=guard))
    # initial state plus six trial stage states per attempted step
    assert len(seen) >= 1 + 6 * tr.n_accepted


def test_monitors_and_stop():
    calls = []
    cfg = IntegratorConfig(monitors=(lambda t, y, dy: calls.append(t),))
    tr = integrate(decay, [1.0], 10.0, cfg, stop_when=lambda t, y, dy: y[0] < 0.1)
    assert tr.stopped
    assert calls == tr.t.tolist()
    assert tr.y_final[0] < 0.1 <= tr.y[-2][0]


def test_max_steps():
    with pytest.raises(MaxStepsExceeded):
        integrate(oscillator, [1.0, 0.0], 100.0, IntegratorConfig(max_steps=10))


@pytest.mark.parametrize(
    "cfg",
    [
        IntegratorConfig(method="Euler"),
        IntegratorConfig(atol=0.0),
        IntegratorConfig(h_min=0.0),
        IntegratorConfig(method="RK4"),
        IntegratorConfig(max_steps=0),
    ],
)
def test_config_validation(cfg):
    with pytest.raises(ConfigError):
        integrate(decay, [1.0], 1.0, cfg)


def test_bad_span_and_initial_guard():
    with pytest.raises(ConfigError):
        integrate(decay, [1.0], 0.0)
    with pytest.raises(ConfigError):
        integrate(decay, [1.0], 1.0, IntegratorConfig(guard=lambda t, y: False))
