"""Pneumatic walking-assist device.

A force sensor under the left sole opens a solenoid valve on ground contact,
filling artificial muscles on the right leg from a regulated CO2 supply. On
lift-off the valve vents. Pressure follows a first-order lag toward the
regulator cap while filling and toward zero while venting.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError

MAX_PRESSURE = 0.3  # [MPa], regulator setting


@dataclass(frozen=True)
class ContactSensorParams:
    on_threshold: float = 50.0  # [N]
    off_threshold: float = 30.0  # [N]
    debounce: float = 0.05  # [s]

    def __post_init__(self):
        if not (self.on_threshold > self.off_threshold > 0):
            raise ConfigError("need on_threshold > off_threshold > 0", "sensor.on_threshold")
        if not self.debounce >= 0:
            raise ConfigError("debounce must be >= 0", "sensor.debounce")


@dataclass(frozen=True)
class MuscleParams:
    max_pressure: float = MAX_PRESSURE
    tau_fill: float = 0.15  # [s]
    tau_vent: float = 0.25  # [s]

    def __post_init__(self):
        if not 0 < self.max_pressure <= MAX_PRESSURE:
            raise ConfigError(f"max_pressure must be in (0, {MAX_PRESSURE}]", "pwad.max_pressure")
        if not (self.tau_fill > 0 and self.tau_vent > 0):
            raise ConfigError("time constants must be > 0", "pwad.tau_fill")


@dataclass(frozen=True)
class MuscleState:
    pressure: float = 0.0  # [MPa]
    valve_open: bool = False


class Valve(str, Enum):
    OPEN = "open"
    VENT = "vent"


def detect_contact(force: float, previous: bool, params: ContactSensorParams, time_since_change: float) -> bool:
    """Debounced hysteresis contact flag for one sample."""
    if time_since_change < params.debounce:
        return previous
    if not previous and force > params.on_threshold:
        return True
    if previous and force < params.off_threshold:
        return False
    return previous


def contact_series(force: np.ndarray, dt: float, params: ContactSensorParams) -> np.ndarray:
    """Apply ``detect_contact`` sample by sample over a force trace."""
    out = np.zeros(len(force), dtype=bool)
    flag = False
    since = float("inf")
    for i, f in enumerate(force):
        new = detect_contact(float(f), flag, params, since)
        since = 0.0 if new != flag else since + dt
        flag = new
        out[i] = flag
    return out


def valve_logic(left_contact: bool) -> Valve:
    return Valve.OPEN if left_contact else Valve.VENT


def pressure_step(m: MuscleState, valve: Valve, dt: float, params: MuscleParams = MuscleParams()) -> MuscleState:
    if not dt > 0:
        raise ConfigError("dt must be > 0", "dt")
    if valve == Valve.OPEN:
        target, tau = params.max_pressure, params.tau_fill
    else:
        target, tau = 0.0, params.tau_vent
    p = m.pressure + dt / tau * (target - m.pressure)
    p = min(max(p, 0.0), params.max_pressure)
    return MuscleState(pressure=p, valve_open=valve == Valve.OPEN)


def assist_gain(m: MuscleState, params: MuscleParams = MuscleParams()) -> float:
    return m.pressure / params.max_pressure


@dataclass
class PwadTrace:
    contact: np.ndarray
    valve_open: np.ndarray
    pressure: np.ndarray  # pressure at the start of each tick
    gain: np.ndarray


def simulate_pwad(left_force: np.ndarray, dt: float, sensor: ContactSensorParams = ContactSensorParams(),
                  muscle: MuscleParams = MuscleParams(), enabled: bool = True) -> PwadTrace:
    """Run contact detection, valve and muscle over a left-sole force trace.

    Sample ``k`` reports the pressure held during tick ``k``; the valve
    command decided at tick ``k`` acts on the following sample.
    """
    n = len(left_force)
    contact = contact_series(np.asarray(left_force, dtype=float), dt, sensor)
    if not enabled:
        zeros = np.zeros(n)
        return PwadTrace(contact, np.zeros(n, dtype=bool), zeros, zeros.copy())
    pressure = np.empty(n)
    valve = np.empty(n, dtype=bool)
    m = MuscleState()
    for k in range(n):
        pressure[k] = m.pressure
        cmd = valve_logic(bool(contact[k]))
        valve[k] = cmd == Valve.OPEN
        m = pressure_step(m, cmd, dt, muscle)
    return PwadTrace(contact, valve, pressure, pressure / muscle.max_pressure)
