"""Longitudinal point-mass model of the walker.

The walker is treated as a single mass on a straight path, driven by the two
wheel actuators and the user's push, and slowed by rolling resistance and the
user's own coupling to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericInputError

GRAVITY = 9.81
# Below this speed the walker counts as stationary for friction purposes.
REST_EPS = 1e-6


@dataclass(frozen=True)
class WalkerParams:
    wheel_radius: float = 0.075  # [m], 15 cm wheels
    mass: float = 12.0  # [kg], walker plus effective user coupling
    rolling_resistance_coeff: float = 0.02
    torque_limit: float = 1.2  # [Nm], actuator continuous rating
    n_driven_wheels: int = 2
    user_damping: float = 20.0  # [N s/m], viscous drag of the user holding the frame
    static_force_threshold: float = 2.5  # [N]
    push_force: float = 20.0  # [N]
    push_duration: float = 0.5  # [s]
    velocity_noise_std: float = 0.005  # [m/s]

    def __post_init__(self):
        if not self.wheel_radius > 0:
            raise ConfigError("wheel_radius must be > 0", "plant.wheel_radius")
        if not self.mass > 0:
            raise ConfigError("mass must be > 0", "plant.mass")
        if not self.torque_limit > 0:
            raise ConfigError("torque_limit must be > 0", "plant.torque_limit")
        if not self.rolling_resistance_coeff >= 0:
            raise ConfigError("rolling_resistance_coeff must be >= 0", "plant.rolling_resistance_coeff")
        if int(self.n_driven_wheels) != self.n_driven_wheels or self.n_driven_wheels < 1:
            raise ConfigError("n_driven_wheels must be a positive integer", "plant.n_driven_wheels")
        for name in ("user_damping", "static_force_threshold", "push_force", "push_duration", "velocity_noise_std"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0", f"plant.{name}")

    @property
    def rolling_force(self) -> float:
        return self.rolling_resistance_coeff * self.mass * GRAVITY


@dataclass(frozen=True)
class WalkerState:
    position: float = 0.0  # [m]
    velocity: float = 0.0  # [m/s]

    @property
    def kinetic_energy_per_mass(self) -> float:
        return 0.5 * self.velocity * self.velocity


def saturate_torque(tau: float, params: WalkerParams) -> float:
    """Clamp a commanded torque to the actuator rating."""
    lim = params.torque_limit
    return min(max(tau, -lim), lim)


def wheel_force(tau: float, params: WalkerParams) -> float:
    """Total longitudinal force from a per-wheel torque (unsaturated)."""
    return params.n_driven_wheels * tau / params.wheel_radius


def plant_step(
    state: WalkerState,
    tau_cmd: float,
    push_force: float,
    dt: float,
    params: WalkerParams,
    disturbance_torque: float = 0.0,
) -> WalkerState:
    """Advance the walker by one semi-implicit Euler step.

    ``tau_cmd`` is the per-wheel commanded torque and is saturated here.
    ``disturbance_torque`` is an external per-wheel torque (e.g. a slope or a
    user leaning on the frame) that bypasses the actuator limit.
    """
    if not dt > 0:
        raise NumericInputError(f"dt must be > 0, got {dt}")
    for name, val in (("position", state.position), ("velocity", state.velocity),
                      ("tau_cmd", tau_cmd), ("push_force", push_force),
                      ("disturbance_torque", disturbance_torque), ("dt", dt)):
        if not math.isfinite(val):
            raise NumericInputError(f"non-finite {name}: {val}")

    drive = wheel_force(saturate_torque(tau_cmd, params), params)
    applied = drive + push_force + wheel_force(disturbance_torque, params)
    v = state.velocity

    if abs(v) < REST_EPS:
        if abs(applied) <= params.static_force_threshold:
            return WalkerState(state.position, 0.0)
        resist = 0.0
    else:
        resist = math.copysign(params.rolling_force, v) + params.user_damping * v

    v_new = v + (applied - resist) / params.mass * dt
    # resistive forces bring the walker to rest, they never reverse it
    if v != 0.0 and v_new * v < 0.0 and abs(applied) <= abs(resist):
        v_new = 0.0
    return WalkerState(state.position + v_new * dt, v_new)


def measure_velocity(state: WalkerState, noise_std: float, rng: np.random.Generator | None) -> float:
    if noise_std < 0:
        raise ConfigError("noise_std must be >= 0", "plant.velocity_noise_std")
    if noise_std == 0:
        return state.velocity
    return state.velocity + float(rng.normal(0.0, noise_std))
