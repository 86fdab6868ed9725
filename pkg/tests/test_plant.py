import math

import numpy as np
import pytest

from walkersim.errors import ConfigError, NumericInputError
from walkersim.plant import WalkerParams, WalkerState, measure_velocity, plant_step, saturate_torque, wheel_force

P = WalkerParams()


def run(tau, seconds, dt, params=P):
    s = WalkerState()
    for _ in range(int(round(seconds / dt))):
        s = plant_step(s, tau, 0.0, dt, params)
    return s


def test_rest_is_held_below_static_threshold():
    # 0.05 Nm per wheel gives 1.33 N, under the 2.5 N breakaway force
    s = plant_step(WalkerState(1.0, 0.0), 0.05, 0.0, 0.01, P)
    assert s == WalkerState(1.0, 0.0)


def test_torque_is_saturated():
    assert saturate_torque(3.0, P) == 1.2
    assert saturate_torque(-3.0, P) == -1.2
    a = plant_step(WalkerState(0, 0.3), 3.0, 0.0, 0.01, P)
    b = plant_step(WalkerState(0, 0.3), 1.2, 0.0, 0.01, P)
    assert a == b


def test_coasting_stops_without_reversing():
    s = WalkerState(0.0, 0.5)
    v = []
    for _ in range(500):
        s = plant_step(s, 0.0, 0.0, 0.01, P)
        v.append(s.velocity)
    assert min(v) >= 0.0
    assert np.all(np.diff(v) <= 0)
    assert v[-1] == 0.0


def test_terminal_velocity_matches_force_balance():
    tau = 0.5
    v_inf = (wheel_force(tau, P) - P.rolling_force) / P.user_damping
    s = run(tau, 10.0, 0.01)
    assert s.velocity == pytest.approx(v_inf, rel=1e-6)


def test_converges_as_dt_halves():
    # exact solution once moving: v(t) = v_inf (1 - exp(-c t / m))
    tau, t_end = 0.5, 2.0
    v_inf = (wheel_force(tau, P) - P.rolling_force) / P.user_damping
    exact = v_inf * (1 - math.exp(-P.user_damping * t_end / P.mass))
    errs = [abs(run(tau, t_end, dt).velocity - exact) for dt in (0.01, 0.005, 0.0025)]
    assert errs[0] < 0.01
    assert errs[1] < errs[0] and errs[2] < errs[1]
    assert errs[1] / errs[0] == pytest.approx(0.5, abs=0.1)


def test_disturbance_bypasses_torque_limit():
    s = plant_step(WalkerState(0, 0.2), 1.2, 0.0, 0.01, P, disturbance_torque=-5.0)
    assert s.velocity < 0.2


@pytest.mark.parametrize("bad", [float("nan"), float("inf")])
def test_non_finite_inputs_raise(bad):
    with pytest.raises(NumericInputError):
        plant_step(WalkerState(0, 0), bad, 0.0, 0.01, P)
    with pytest.raises(NumericInputError):
        plant_step(WalkerState(bad, 0), 0.0, 0.0, 0.01, P)


def test_params_validated():
    with pytest.raises(ConfigError) as exc:
        WalkerParams(mass=0)
    assert exc.value.field == "plant.mass"
    with pytest.raises(ConfigError):
        WalkerParams(n_driven_wheels=1.5)


def test_noise_free_measurement_leaves_rng_untouched():
    rng = np.random.default_rng(3)
    assert measure_velocity(WalkerState(0, 0.4), 0.0, rng) == 0.4
    assert rng.random() == np.random.default_rng(3).random()


def test_first_step_from_rest_by_hand():
    # resistance is zero on the breakaway tick, so v' = (2 * 0.6 / 0.075) / 12 * 0.01
    s = plant_step(WalkerState(0.0, 0.0), 0.6, 0.0, 0.01, P)
    assert s.velocity == pytest.approx((2 * 0.6 / 0.075) / 12 * 0.01, abs=1e-15)
    assert s.position == pytest.approx(s.velocity * 0.01)


def test_coasting_energy_never_grows():
    s = WalkerState(0.0, 0.8)
    e = s.kinetic_energy_per_mass
    for _ in range(300):
        s = plant_step(s, 0.0, 0.0, 0.01, P)
        assert s.kinetic_energy_per_mass <= e
        e = s.kinetic_energy_per_mass


def test_seeded_measurement_reproducible():
    a = measure_velocity(WalkerState(0, 0.5), 0.01, np.random.default_rng(12))
    b = measure_velocity(WalkerState(0, 0.5), 0.01, np.random.default_rng(12))
    assert a == b != 0.5
