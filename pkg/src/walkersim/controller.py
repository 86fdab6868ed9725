"""Walker motion and braking controllers.

Motion uses an incremental torque law: each control tick the commanded
torque moves by one fixed step toward closing the velocity error, or holds
when the error is inside the deadband. The run is split into five motion
regions plus a braked state entered on STOP.

Braking is a position-hold loop on the wheel angle. The commanded position
integrates the drift away from the angle captured at STOP, and the actuator
tracks that command with a PD law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import ConfigError, StateError
from .plant import WalkerParams, WalkerState


class Region(str, Enum):
    POSITIVE_NEUTRAL = "PositiveNeutral"
    ACCELERATING = "Accelerating"
    CONSTANT_VELOCITY = "ConstantVelocity"
    DECELERATING = "Decelerating"
    NEGATIVE_NEUTRAL = "NegativeNeutral"
    BRAKED = "Braked"

    def __str__(self):
        return self.value


MOTION_CHAIN = (
    Region.POSITIVE_NEUTRAL,
    Region.ACCELERATING,
    Region.CONSTANT_VELOCITY,
    Region.DECELERATING,
    Region.NEGATIVE_NEUTRAL,
)


def is_legal_transition(src: Region, dst: Region) -> bool:
    if src == dst or dst == Region.BRAKED:
        return True
    if src == Region.BRAKED:
        return False
    return MOTION_CHAIN.index(dst) == MOTION_CHAIN.index(src) + 1


@dataclass(frozen=True)
class ControllerParams:
    deadband: float = 0.05  # [m/s]
    step: float = 0.03  # [Nm] per control tick
    tau_cap: float = 5.0  # [Nm] anti-windup bound on the commanded torque
    v_start: float = 0.05  # [m/s] push speed that leaves PositiveNeutral
    a_dec: float = 0.25  # [m/s^2]
    decel_margin: float = 0.05  # [m]
    creep_velocity: float = 0.1  # [m/s] floor of the decel ramp until the target is reached
    rest_velocity: float = 0.005  # [m/s]
    brake_kp: float = 5.0  # [Nm/rad]
    brake_kd: float = 0.5  # [Nm s/rad]
    brake_period: float = 0.2  # [s] update period of the position command

    def __post_init__(self):
        for name in ("deadband", "step", "tau_cap", "v_start", "a_dec", "rest_velocity", "brake_period"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0", f"controller.{name}")
        for name in ("decel_margin", "creep_velocity", "brake_kp", "brake_kd"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0", f"controller.{name}")


@dataclass(frozen=True)
class VelocityControllerState:
    """Memory of the incremental torque law.

    The commanded torque is kept as ``tau_origin + n_steps * step`` so that
    every tick-to-tick change is exactly one step, with no accumulated
    rounding. ``tau_prev`` exposes the resulting value.
    """

    v_ref: float = 0.0
    region: Region = Region.POSITIVE_NEUTRAL
    deadband: float = 0.05
    step: float = 0.03
    tau_cap: float = 5.0
    n_steps: int = 0
    tau_origin: float = 0.0
    region_entry_t: float = 0.0

    @classmethod
    def at(cls, tau_prev: float, v_ref: float, **kw) -> "VelocityControllerState":
        return cls(v_ref=v_ref, tau_origin=tau_prev, **kw)

    @classmethod
    def from_params(cls, params: ControllerParams) -> "VelocityControllerState":
        return cls(deadband=params.deadband, step=params.step, tau_cap=params.tau_cap)

    @property
    def tau_prev(self) -> float:
        return self.tau_origin + self.n_steps * self.step


def _torque_after(ctrl: VelocityControllerState, n_steps: int) -> tuple[VelocityControllerState, float]:
    tau = ctrl.tau_origin + n_steps * ctrl.step
    if abs(tau) > ctrl.tau_cap:
        return ctrl, ctrl.tau_prev
    return replace(ctrl, n_steps=n_steps), tau


def velocity_control_step(ctrl: VelocityControllerState, c_t: float) -> tuple[VelocityControllerState, float]:
    """One tick of the incremental torque law against measured velocity ``c_t``.

    Both comparisons are strict: an error exactly on the deadband edge holds
    the torque.
    """
    if ctrl.v_ref - c_t > ctrl.deadband:
        return _torque_after(ctrl, ctrl.n_steps + 1)
    if c_t - ctrl.v_ref > ctrl.deadband:
        return _torque_after(ctrl, ctrl.n_steps - 1)
    return ctrl, ctrl.tau_prev


def release_step(ctrl: VelocityControllerState) -> tuple[VelocityControllerState, float]:
    """Step the commanded torque one increment toward zero (neutral regions)."""
    tau = ctrl.tau_prev
    if abs(tau) < 0.5 * ctrl.step:
        return ctrl, tau
    return _torque_after(ctrl, ctrl.n_steps - 1 if tau > 0 else ctrl.n_steps + 1)


def stopping_distance(velocity: float, a_dec: float) -> float:
    return velocity * velocity / (2.0 * a_dec)


def region_transition(
    region: Region,
    state: WalkerState,
    params: ControllerParams,
    target_distance: float,
    target_velocity: float,
) -> Region:
    """Next motion region given the (measured) walker state.

    At most one edge of the chain is taken per tick. Braked is absorbing here;
    entering it is the kernel's job when a STOP arrives.
    """
    v = state.velocity
    if region == Region.POSITIVE_NEUTRAL:
        if v > params.v_start:
            return Region.ACCELERATING
    elif region == Region.ACCELERATING:
        if v >= target_velocity - params.deadband:
            return Region.CONSTANT_VELOCITY
    elif region == Region.CONSTANT_VELOCITY:
        remaining = target_distance - state.position
        if remaining <= stopping_distance(v, params.a_dec) + params.decel_margin:
            return Region.DECELERATING
    elif region == Region.DECELERATING:
        if v < params.rest_velocity or state.position >= target_distance:
            return Region.NEGATIVE_NEUTRAL
    return region


def region_setpoint(region: Region, params: ControllerParams, target_velocity: float,
                    time_in_region: float = 0.0) -> float:
    if region in (Region.ACCELERATING, Region.CONSTANT_VELOCITY):
        return target_velocity
    if region == Region.DECELERATING:
        ramp = target_velocity - params.a_dec * time_in_region
        return max(ramp, min(params.creep_velocity, target_velocity), 0.0)
    return 0.0


@dataclass(frozen=True)
class BrakeControllerState:
    p_prev: float = 0.0  # [rad] last commanded wheel angle
    p_ref: float = 0.0  # [rad] wheel angle captured at STOP
    engaged: bool = False


def wheel_angle(position: float, params: WalkerParams) -> float:
    return position / params.wheel_radius


def brake_engage(state: WalkerState, params: WalkerParams) -> BrakeControllerState:
    p_ref = wheel_angle(state.position, params)
    return BrakeControllerState(p_prev=p_ref, p_ref=p_ref, engaged=True)


def brake_control_step(brake: BrakeControllerState, b_prev: float) -> tuple[BrakeControllerState, float]:
    """Position command update: the drift from ``p_ref`` measured at the last
    tick is subtracted from the previous command."""
    if not brake.engaged:
        raise StateError("brake_control_step called while brake is not engaged")
    p_t = brake.p_prev + (brake.p_ref - b_prev)
    return replace(brake, p_prev=p_t), p_t


def brake_torque(p_cmd: float, b_t: float, omega: float, params: ControllerParams,
                 walker: WalkerParams) -> float:
    """Torque of the actuator in position mode tracking ``p_cmd``."""
    tau = params.brake_kp * (p_cmd - b_t) - params.brake_kd * omega
    if not math.isfinite(tau):
        raise StateError(f"brake torque diverged: {tau}")
    lim = walker.torque_limit
    return min(max(tau, -lim), lim)
