import pytest

from walkersim.controller import (
    MOTION_CHAIN,
    BrakeControllerState,
    ControllerParams,
    Region,
    VelocityControllerState,
    brake_control_step,
    brake_engage,
    brake_torque,
    is_legal_transition,
    region_setpoint,
    region_transition,
    release_step,
    velocity_control_step,
)
from walkersim.errors import ConfigError, StateError
from walkersim.plant import WalkerParams, WalkerState

CP = ControllerParams()


def ctrl(v_ref=0.5, tau=0.0, **kw):
    return VelocityControllerState.at(tau, v_ref, **kw)


def test_increment_when_too_slow():
    c, tau = velocity_control_step(ctrl(), 0.3)
    assert tau == pytest.approx(0.03)
    c, tau = velocity_control_step(c, 0.3)
    assert c.n_steps == 2 and tau == pytest.approx(0.06)


def test_decrement_when_too_fast():
    _, tau = velocity_control_step(ctrl(tau=0.6), 0.7)
    assert tau == pytest.approx(0.57)


def test_hold_inside_deadband():
    c0 = ctrl(tau=0.6)
    c, tau = velocity_control_step(c0, 0.52)
    assert c == c0 and tau == 0.6


def test_deadband_edge_is_strict():
    # binary-exact numbers so the error equals the deadband exactly
    c0 = ctrl(v_ref=0.5, deadband=0.25)
    assert velocity_control_step(c0, 0.25)[1] == 0.0
    assert velocity_control_step(c0, 0.75)[1] == 0.0
    assert velocity_control_step(c0, 0.2)[1] == pytest.approx(0.03)


def test_anti_windup_holds_at_cap():
    c = ctrl(tau_cap=0.1)
    taus = []
    for _ in range(10):
        c, tau = velocity_control_step(c, 0.0)
        taus.append(tau)
    assert max(taus) <= 0.1
    assert c.n_steps == 3


def test_release_reaches_zero_in_steps():
    c = VelocityControllerState(n_steps=4)
    seen = []
    for _ in range(8):
        c, tau = release_step(c)
        seen.append(c.n_steps)
    assert seen[:4] == [3, 2, 1, 0]
    assert seen[-1] == 0


def test_motion_chain_transitions():
    s = Region.POSITIVE_NEUTRAL
    assert region_transition(s, WalkerState(0, 0.01), CP, 8, 0.5) == s
    assert region_transition(s, WalkerState(0, 0.06), CP, 8, 0.5) == Region.ACCELERATING
    assert region_transition(Region.ACCELERATING, WalkerState(1, 0.46), CP, 8, 0.5) == Region.CONSTANT_VELOCITY
    assert region_transition(Region.CONSTANT_VELOCITY, WalkerState(3, 0.5), CP, 8, 0.5) == Region.CONSTANT_VELOCITY
    assert region_transition(Region.CONSTANT_VELOCITY, WalkerState(7.5, 0.5), CP, 8, 0.5) == Region.DECELERATING
    assert region_transition(Region.DECELERATING, WalkerState(8.0, 0.1), CP, 8, 0.5) == Region.NEGATIVE_NEUTRAL
    assert region_transition(Region.BRAKED, WalkerState(0, 1.0), CP, 8, 0.5) == Region.BRAKED


def test_legal_transitions():
    for a, b in zip(MOTION_CHAIN, MOTION_CHAIN[1:]):
        assert is_legal_transition(a, b)
    assert not is_legal_transition(Region.POSITIVE_NEUTRAL, Region.CONSTANT_VELOCITY)
    assert not is_legal_transition(Region.NEGATIVE_NEUTRAL, Region.ACCELERATING)
    assert all(is_legal_transition(r, Region.BRAKED) for r in MOTION_CHAIN)


def test_decel_setpoint_ramps_to_creep_floor():
    assert region_setpoint(Region.DECELERATING, CP, 0.5, 0.0) == 0.5
    assert region_setpoint(Region.DECELERATING, CP, 0.5, 1.0) == pytest.approx(0.25)
    assert region_setpoint(Region.DECELERATING, CP, 0.5, 10.0) == CP.creep_velocity
    assert region_setpoint(Region.NEGATIVE_NEUTRAL, CP, 0.5) == 0.0


def test_brake_update_formula():
    b = BrakeControllerState(p_prev=10.0, p_ref=10.0, engaged=True)
    b, p = brake_control_step(b, 10.2)
    assert p == pytest.approx(9.8)
    b, p = brake_control_step(b, 10.05)
    assert p == pytest.approx(9.75)


def test_brake_requires_engagement():
    with pytest.raises(StateError):
        brake_control_step(BrakeControllerState(), 0.0)


def test_brake_engage_captures_wheel_angle():
    b = brake_engage(WalkerState(1.5, 0.2), WalkerParams())
    assert b.engaged and b.p_ref == pytest.approx(20.0) and b.p_prev == b.p_ref


def test_brake_torque_saturates():
    assert brake_torque(10.0, 0.0, 0.0, CP, WalkerParams()) == 1.2
    assert brake_torque(0.0, 0.1, 0.0, CP, WalkerParams()) == pytest.approx(-0.5)


def test_params_validated():
    with pytest.raises(ConfigError) as exc:
        ControllerParams(step=0)
    assert exc.value.field == "controller.step"


@pytest.mark.parametrize("c_t, expected", [(0.30, 0.53), (0.48, 0.50), (0.60, 0.47)])
def test_torque_law_examples(c_t, expected):
    assert velocity_control_step(ctrl(tau=0.50), c_t)[1] == pytest.approx(expected, abs=1e-15)


def test_stopping_distance_trigger_example():
    # remaining 0.4 m against 0.5^2 / (2 * 0.25) = 0.5 m
    assert region_transition(Region.CONSTANT_VELOCITY, WalkerState(7.6, 0.5), CP, 8.0, 0.5) == Region.DECELERATING


def test_engage_at_four_meters():
    assert brake_engage(WalkerState(4.0, 0.0), WalkerParams()).p_ref == pytest.approx(53.3333333333, abs=1e-9)
    assert brake_engage(WalkerState(0.0, 0.0), WalkerParams()).p_ref == 0.0


def test_brake_at_reference_makes_no_correction():
    b = BrakeControllerState(p_prev=10.0, p_ref=10.0, engaged=True)
    assert brake_control_step(b, 10.0)[1] == 10.0
