"""Fixed-step scenario runner.

One call simulates one walking trial. The gait traces and the assist device
are resolved first: the device only reacts to the left-foot force, which
does not depend on the walker. Then the walker loop runs tick by tick. Each
telemetry row holds the state at the start of the tick together with the
region and torque decided from it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .controller import (
    BrakeControllerState,
    Region,
    VelocityControllerState,
    brake_control_step,
    brake_engage,
    brake_torque,
    region_setpoint,
    region_transition,
    release_step,
    velocity_control_step,
    wheel_angle,
)
from .config import ScenarioConfig, TimelineEvent, check_timeline
from .gaitgen import FootForceTrace, GroundTruth, synthesize_trial
from .plant import WalkerState, measure_velocity, plant_step, saturate_torque
from .pwad import PwadTrace, simulate_pwad

log = logging.getLogger(__name__)

TELEMETRY_COLUMNS = ("tick", "t", "region", "tau_cmd", "velocity", "position", "p_muscle", "f_left", "f_right",
                     "tau_applied", "valve")

# stream indices of the per-run seed sequence
_SENSOR_STREAM, _GAIT_STREAM = 0, 1


@dataclass(frozen=True)
class SimClock:
    dt: float
    tick: int = 0

    @property
    def t(self) -> float:
        return self.tick * self.dt

    def advance(self) -> "SimClock":
        return SimClock(self.dt, self.tick + 1)


@dataclass
class RunRecord:
    config: ScenarioConfig
    tick: np.ndarray
    t: np.ndarray
    region: list[str]
    tau_cmd: np.ndarray
    tau_applied: np.ndarray
    velocity: np.ndarray
    position: np.ndarray
    p_muscle: np.ndarray
    valve: np.ndarray
    f_left: np.ndarray
    f_right: np.ndarray
    events: list[dict]
    status: str  # "complete", "stopped" (STOP issued, ran to cap) or "incomplete"
    left_trace: FootForceTrace
    right_trace: FootForceTrace
    truth: GroundTruth
    pwad: PwadTrace = field(repr=False, default=None)

    def __len__(self):
        return len(self.tick)

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    @property
    def final_position(self) -> float:
        return float(self.position[-1])

    @property
    def final_velocity(self) -> float:
        return float(self.velocity[-1])

    def rows(self) -> Iterable[tuple]:
        for k in range(len(self.tick)):
            yield (int(self.tick[k]), float(self.t[k]), self.region[k], float(self.tau_cmd[k]),
                   float(self.velocity[k]), float(self.position[k]), float(self.p_muscle[k]),
                   float(self.f_left[k]), float(self.f_right[k]), float(self.tau_applied[k]), int(self.valve[k]))


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    seqs = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(seqs[_SENSOR_STREAM]), np.random.default_rng(seqs[_GAIT_STREAM])


def _gait_and_pwad(cfg: ScenarioConfig, gait_rng: np.random.Generator, n_ticks: int):
    gait = cfg.gait_params
    muscle = cfg.pwad.muscle
    override = cfg.pwad.assist_override
    if not cfg.pwad_enabled:
        assist = None
    elif override is not None:
        assist = float(override)
    else:
        def assist(left_force):
            return simulate_pwad(left_force, cfg.dt, cfg.sensor, muscle).gain

    left, right, truth = synthesize_trial(gait, cfg.target_distance, assist, gait_rng, cfg.dt)
    n = max(n_ticks, len(left))
    lf = np.zeros(n)
    lf[: len(left)] = left.force
    if cfg.pwad_enabled and override is not None:
        p = np.full(n, override * muscle.max_pressure)
        trace = PwadTrace(np.zeros(n, dtype=bool), np.zeros(n, dtype=bool), p, np.full(n, float(override)))
    else:
        trace = simulate_pwad(lf, cfg.dt, cfg.sensor, muscle, enabled=cfg.pwad_enabled)
    return left, right, truth, trace


def scripted_events(config: ScenarioConfig, timeline: Iterable[TimelineEvent] = ()) -> RunRecord:
    """Run one trial with scripted commands.

    ``STOP`` engages the position-hold brake at the first tick with
    ``t >= event.t``. ``DISTURB`` sets a constant external per-wheel torque
    [Nm]. Events left over when the run ends are logged as ignored.
    """
    timeline = tuple(timeline)
    check_timeline(timeline)
    cfg = config
    dt = cfg.dt
    plant, cp = cfg.plant, cfg.controller
    n_cap = int(math.floor(cfg.max_time / dt + 1e-9)) + 1
    sensor_rng, gait_rng = _streams(cfg.rng_seed)

    left, right, truth, pw = _gait_and_pwad(cfg, gait_rng, 0)
    n_force = len(left)

    ticks, ts, regions = [], [], []
    tau_cmd_l, tau_app_l, vel_l, pos_l = [], [], [], []
    events: list[dict] = []

    state = WalkerState()
    ctrl = VelocityControllerState.from_params(cp)
    brake = BrakeControllerState()
    brake_every = max(1, int(round(cp.brake_period / dt)))
    brake_tick0 = 0
    brake_cmd = 0.0
    disturbance = 0.0
    stopped = False
    pending = list(timeline)
    region = Region.POSITIVE_NEUTRAL
    entry_t = 0.0
    pushing = plant.push_force > 0 and plant.push_duration > 0
    status = "incomplete"
    b_prev = wheel_angle(state.position, plant)
    clock = SimClock(dt)

    while clock.tick < n_cap:
        k, t = clock.tick, clock.t
        c_t = measure_velocity(state, plant.velocity_noise_std, sensor_rng)

        while pending and pending[0].t <= t + 1e-12:
            ev = pending.pop(0)
            if ev.command == "STOP":
                if brake.engaged:
                    events.append({"tick": k, "t": t, "kind": "brake", "action": "reengaged",
                                   "replaced_p_ref": brake.p_ref})
                brake = brake_engage(state, plant)
                brake_tick0 = k
                brake_cmd = brake.p_ref
                events.append({"tick": k, "t": t, "kind": "stop", "p_ref": brake.p_ref})
                if region != Region.BRAKED:
                    events.append({"tick": k, "t": t, "kind": "region", "from": region.value,
                                   "to": Region.BRAKED.value})
                region = Region.BRAKED
                stopped = True
            else:
                disturbance = float(ev.value)
                events.append({"tick": k, "t": t, "kind": "disturbance", "torque": disturbance})

        if region != Region.BRAKED:
            new_region = region_transition(region, WalkerState(state.position, c_t), cp,
                                           cfg.target_distance, cfg.target_velocity)
            if new_region != region:
                events.append({"tick": k, "t": t, "kind": "region", "from": region.value, "to": new_region.value})
                region, entry_t = new_region, t

        b_t = wheel_angle(state.position, plant)
        if region == Region.BRAKED:
            if (k - brake_tick0) % brake_every == 0 and k > brake_tick0:
                brake, brake_cmd = brake_control_step(brake, b_prev)
            tau = brake_torque(brake_cmd, b_t, state.velocity / plant.wheel_radius, cp, plant)
        else:
            v_ref = region_setpoint(region, cp, cfg.target_velocity, t - entry_t)
            if v_ref != ctrl.v_ref or region != ctrl.region:
                ctrl = VelocityControllerState(v_ref=v_ref, region=region, deadband=ctrl.deadband, step=ctrl.step,
                                               tau_cap=ctrl.tau_cap, n_steps=ctrl.n_steps,
                                               tau_origin=ctrl.tau_origin, region_entry_t=entry_t)
            if region in (Region.POSITIVE_NEUTRAL, Region.NEGATIVE_NEUTRAL):
                ctrl, tau = release_step(ctrl)
            else:
                ctrl, tau = velocity_control_step(ctrl, c_t)
        b_prev = b_t

        ticks.append(k)
        ts.append(t)
        regions.append(region.value)
        tau_cmd_l.append(tau)
        tau_app_l.append(saturate_torque(tau, plant))
        vel_l.append(state.velocity)
        pos_l.append(state.position)

        if region == Region.NEGATIVE_NEUTRAL and abs(state.velocity) < cp.rest_velocity:
            status = "complete"
            break

        push = 0.0
        if pushing:
            if region == Region.POSITIVE_NEUTRAL and t < plant.push_duration:
                push = plant.push_force
            else:
                pushing = False
                events.append({"tick": k, "t": t, "kind": "push_end"})
        state = plant_step(state, tau, push, dt, plant, disturbance)
        clock = clock.advance()
    else:
        status = "stopped" if stopped else "incomplete"
        events.append({"tick": clock.tick - 1, "t": (clock.tick - 1) * dt, "kind": "cap",
                       "max_time": cfg.max_time})
        log.warning("run %s hit the %.1f s cap", cfg.trial_id, cfg.max_time)

    for ev in pending:
        events.append({"tick": ticks[-1], "t": ts[-1], "kind": "ignored", "command": ev.command,
                       "at": ev.t})

    n = len(ticks)
    if n > len(pw.pressure):
        left_full = np.zeros(n)
        left_full[:n_force] = left.force
        if cfg.pwad_enabled and cfg.pwad.assist_override is not None:
            p = np.full(n, pw.pressure[0])
            pw = PwadTrace(np.zeros(n, dtype=bool), np.zeros(n, dtype=bool), p, np.full(n, pw.gain[0]))
        else:
            pw = simulate_pwad(left_full, dt, cfg.sensor, cfg.pwad.muscle, enabled=cfg.pwad_enabled)
    f_left = np.zeros(n)
    f_right = np.zeros(n)
    m = min(n, n_force)
    f_left[:m] = left.force[:m]
    f_right[:m] = right.force[:m]

    prev_valve = False
    for k in range(n):
        v = bool(pw.valve_open[k])
        if v != prev_valve:
            events.append({"tick": k, "t": ts[k], "kind": "valve", "state": "open" if v else "vent"})
            prev_valve = v
    events.sort(key=lambda e: e["tick"])

    return RunRecord(
        config=cfg,
        tick=np.asarray(ticks, dtype=np.int64),
        t=np.asarray(ts, dtype=float),
        region=regions,
        tau_cmd=np.asarray(tau_cmd_l, dtype=float),
        tau_applied=np.asarray(tau_app_l, dtype=float),
        velocity=np.asarray(vel_l, dtype=float),
        position=np.asarray(pos_l, dtype=float),
        p_muscle=np.asarray(pw.pressure[:n], dtype=float),
        valve=np.asarray(pw.valve_open[:n], dtype=bool),
        f_left=f_left,
        f_right=f_right,
        events=events,
        status=status,
        left_trace=left,
        right_trace=right,
        truth=truth,
        pwad=pw,
    )


def run_scenario(config: ScenarioConfig) -> RunRecord:
    return scripted_events(config, config.timeline)
