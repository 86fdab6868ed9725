"""Scenario configuration and its JSON representation.

A scenario file looks like::

    {
      "schema_version": "1.0",
      "target_distance": 8.0,
      "target_velocity": 0.5,
      "condition": "A",
      "trial_id": "T1",
      "rng_seed": 42,
      "dt": 0.01,
      "max_time": 120.0,
      "plant": {"mass": 12.0},
      "controller": {"deadband": 0.05},
      "pwad": {"tau_fill": 0.15},
      "sensor": {"on_threshold": 50.0},
      "gait": {"cadence": 110.0},
      "timeline": [{"t": 5.0, "command": "STOP"}]
    }

Every section is optional; omitted keys take the defaults of the matching
parameter dataclass, and the gait section overrides the condition preset.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .controller import ControllerParams
from .errors import ConfigError
from .gaitgen import Condition, GaitParams, condition_preset
from .plant import WalkerParams
from .pwad import ContactSensorParams, MuscleParams

SCHEMA_VERSION = "1.0"
COMMANDS = ("STOP", "DISTURB")


def check_schema_version(version, where: str = "schema_version") -> None:
    if version is None:
        return
    try:
        major = int(str(version).split(".")[0])
    except ValueError:
        raise ConfigError(f"unreadable schema_version {version!r}", where) from None
    if major != int(SCHEMA_VERSION.split(".")[0]):
        raise ConfigError(f"unsupported schema major version {version!r}", where)


@dataclass(frozen=True)
class TimelineEvent:
    t: float
    command: str
    value: float | None = None


@dataclass(frozen=True)
class PwadParams:
    """Assist-device settings. ``assist_override`` pins the gain stream to a
    constant and bypasses the muscle model."""

    muscle: MuscleParams = MuscleParams()
    assist_override: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    target_distance: float = 8.0  # [m]
    target_velocity: float = 0.5  # [m/s]
    condition: Condition = Condition.A
    trial_id: str = "T1"
    rng_seed: int = 0
    dt: float = 0.01  # [s]
    max_time: float = 120.0  # [s] simulated-time cap
    plant: WalkerParams = WalkerParams()
    controller: ControllerParams = ControllerParams()
    pwad: PwadParams = PwadParams()
    sensor: ContactSensorParams = ContactSensorParams()
    gait: GaitParams | None = None  # None -> condition preset
    timeline: tuple[TimelineEvent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "condition", _parse_condition(self.condition))
        if not (isinstance(self.target_distance, (int, float)) and self.target_distance > 0
                and math.isfinite(self.target_distance)):
            raise ConfigError(f"target_distance must be > 0, got {self.target_distance}", "target_distance")
        if not (isinstance(self.target_velocity, (int, float)) and self.target_velocity > 0
                and math.isfinite(self.target_velocity)):
            raise ConfigError(f"target_velocity must be > 0, got {self.target_velocity}", "target_velocity")
        if not (isinstance(self.dt, (int, float)) and 0 < self.dt <= 0.1):
            raise ConfigError(f"dt must lie in (0, 0.1], got {self.dt}", "dt")
        if not self.max_time > 0:
            raise ConfigError("max_time must be > 0", "max_time")
        if isinstance(self.rng_seed, bool) or not isinstance(self.rng_seed, int) or not 0 <= self.rng_seed < 2 ** 64:
            raise ConfigError("rng_seed must be an integer in [0, 2**64)", "rng_seed")
        ov = self.pwad.assist_override
        if ov is not None and not 0 <= ov <= 1:
            raise ConfigError("assist_override must lie in [0, 1]", "pwad.assist_override")
        if self.condition == Condition.A and ov:
            raise ConfigError("condition A has the assist device disabled", "pwad.assist_override")
        check_timeline(self.timeline)

    @property
    def pwad_enabled(self) -> bool:
        return self.condition == Condition.B

    @property
    def gait_params(self) -> GaitParams:
        return self.gait if self.gait is not None else condition_preset(self.condition)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return dataclasses.replace(self, rng_seed=seed)


def _parse_condition(value) -> Condition:
    try:
        return Condition(value)
    except ValueError:
        raise ConfigError(f"condition must be 'A' or 'B', got {value!r}", "condition") from None


def check_timeline(timeline) -> None:
    last = -math.inf
    for i, ev in enumerate(timeline):
        if ev.command not in COMMANDS:
            raise ConfigError(f"unknown command {ev.command!r}", f"timeline[{i}].command")
        if not math.isfinite(ev.t):
            raise ConfigError("event time must be finite", f"timeline[{i}].t")
        if ev.t < last:
            raise ConfigError("timeline must be sorted by t", f"timeline[{i}].t")
        if ev.command == "DISTURB" and (ev.value is None or not math.isfinite(ev.value)):
            raise ConfigError("DISTURB needs a finite value [Nm]", f"timeline[{i}].value")
        last = ev.t


def _build(cls, data: dict, section: str, base=None):
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be an object", section)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(f"unknown key {key!r}", f"{section}.{key}")
    for key, val in data.items():
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ConfigError(f"{section}.{key} must be a number", f"{section}.{key}")
    try:
        if base is not None:
            return dataclasses.replace(base, **data)
        return cls(**data)
    except ConfigError as exc:
        raise ConfigError(str(exc), exc.field or section) from None
    except TypeError as exc:
        raise ConfigError(str(exc), section) from None


TOP_KEYS = {"schema_version", "target_distance", "target_velocity", "condition", "trial_id", "rng_seed",
            "dt", "max_time", "plant", "controller", "pwad", "sensor", "gait", "timeline"}


def scenario_from_dict(data: dict[str, Any]) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a JSON object")
    for key in data:
        if key not in TOP_KEYS:
            raise ConfigError(f"unknown key {key!r}", key)
    check_schema_version(data.get("schema_version"))
    kw: dict[str, Any] = {}
    for key in ("target_distance", "target_velocity", "dt", "max_time"):
        if key in data:
            val = data[key]
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigError(f"{key} must be a number", key)
            kw[key] = float(val)
    if "rng_seed" in data:
        kw["rng_seed"] = data["rng_seed"]
    if "trial_id" in data:
        kw["trial_id"] = str(data["trial_id"])
    condition = _parse_condition(data.get("condition", "A"))
    kw["condition"] = condition
    if "plant" in data:
        kw["plant"] = _build(WalkerParams, data["plant"], "plant")
    if "controller" in data:
        kw["controller"] = _build(ControllerParams, data["controller"], "controller")
    if "sensor" in data:
        kw["sensor"] = _build(ContactSensorParams, data["sensor"], "sensor")
    if "pwad" in data:
        pw = dict(data["pwad"]) if isinstance(data["pwad"], dict) else data["pwad"]
        if not isinstance(pw, dict):
            raise ConfigError("section 'pwad' must be an object", "pwad")
        enabled = pw.pop("enabled", None)
        if enabled is not None and bool(enabled) != (condition == Condition.B):
            raise ConfigError("pwad.enabled must match the condition (B enables it, A disables it)", "pwad.enabled")
        override = pw.pop("assist_override", None)
        if override is not None and (not isinstance(override, (int, float)) or isinstance(override, bool)):
            raise ConfigError("pwad.assist_override must be a number", "pwad.assist_override")
        kw["pwad"] = PwadParams(_build(MuscleParams, pw, "pwad"), None if override is None else float(override))
    if "gait" in data:
        kw["gait"] = _build(GaitParams, data["gait"], "gait", base=condition_preset(condition))
    if "timeline" in data:
        tl = data["timeline"]
        if not isinstance(tl, list):
            raise ConfigError("timeline must be a list", "timeline")
        events = []
        for i, ev in enumerate(tl):
            if not isinstance(ev, dict) or "t" not in ev or "command" not in ev:
                raise ConfigError("timeline entries need 't' and 'command'", f"timeline[{i}]")
            extra = set(ev) - {"t", "command", "value"}
            if extra:
                raise ConfigError(f"unknown key {sorted(extra)[0]!r}", f"timeline[{i}].{sorted(extra)[0]}")
            value = ev.get("value")
            events.append(TimelineEvent(float(ev["t"]), str(ev["command"]),
                                        None if value is None else float(value)))
        kw["timeline"] = tuple(events)
    return ScenarioConfig(**kw)


def _section(obj) -> dict:
    return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}


def scenario_to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    pwad = _section(cfg.pwad.muscle)
    if cfg.pwad.assist_override is not None:
        pwad["assist_override"] = cfg.pwad.assist_override
    return {
        "schema_version": SCHEMA_VERSION,
        "target_distance": cfg.target_distance,
        "target_velocity": cfg.target_velocity,
        "condition": cfg.condition.value,
        "trial_id": cfg.trial_id,
        "rng_seed": cfg.rng_seed,
        "dt": cfg.dt,
        "max_time": cfg.max_time,
        "plant": _section(cfg.plant),
        "controller": _section(cfg.controller),
        "pwad": pwad,
        "sensor": _section(cfg.sensor),
        "gait": _section(cfg.gait_params),
        "timeline": [{k: v for k, v in dataclasses.asdict(ev).items() if v is not None} for ev in cfg.timeline],
    }


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", "config") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          f"line {exc.lineno}") from None
    return scenario_from_dict(data)
