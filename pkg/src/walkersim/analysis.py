"""Gait events, stride segmentation and trial-level gait features.

A step is one heel strike of either foot; a stride runs from a heel strike
to the next heel strike of the same foot, with stance ending at toe off.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .errors import EventSequenceError, FormatError, InsufficientDataError
from .gaitgen import Foot, FootForceTrace, GroundTruth
from .pwad import ContactSensorParams, detect_contact


class EventKind(str, Enum):
    HEEL_STRIKE = "HeelStrike"
    TOE_OFF = "ToeOff"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class GaitEvent:
    kind: EventKind
    foot: Foot
    t: float


@dataclass(frozen=True)
class StrideRecord:
    foot: Foot
    start_t: float
    stance_duration: float
    swing_duration: float

    @property
    def stride_duration(self) -> float:
        return self.stance_duration + self.swing_duration

    @property
    def stance_pct(self) -> float:
        return 100.0 * self.stance_duration / self.stride_duration

    @property
    def swing_pct(self) -> float:
        return 100.0 * self.swing_duration / self.stride_duration


@dataclass(frozen=True)
class GaitFeatures:
    gait_duration: float  # first to last event, excluded steps included [s]
    step_count: int
    mean_stance_pct_left: float
    mean_stance_pct_right: float
    mean_swing_pct_left: float
    mean_swing_pct_right: float
    est_stride_length: float  # [m]
    steady_gait_duration: float  # from the first analysed heel strike [s]
    n_strides_left: int
    n_strides_right: int
    excluded_steps: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GaitFeatures":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def check_uniform(t: np.ndarray, rtol: float = 1e-6) -> float:
    if len(t) < 2:
        return float("nan")
    d = np.diff(t)
    dt = float(d[0])
    if not dt > 0:
        raise FormatError("time stamps must be strictly increasing", row=2)
    bad = np.flatnonzero(np.abs(d - dt) > rtol * dt)
    if len(bad):
        raise FormatError(f"non-uniform sampling at sample {bad[0] + 1}", row=int(bad[0]) + 2)
    return dt


def _crossing(t: np.ndarray, f: np.ndarray, i: int, level: float) -> float:
    """Linear-interpolated time at which the trace crossed ``level`` between
    samples ``i - 1`` and ``i``; falls back to ``t[i]``."""
    if i == 0:
        return float(t[0])
    f0, f1 = f[i - 1], f[i]
    if (f0 - level) * (f1 - level) < 0:
        return float(t[i - 1] + (level - f0) / (f1 - f0) * (t[i] - t[i - 1]))
    return float(t[i])


def detect_events(trace: FootForceTrace, params: ContactSensorParams = ContactSensorParams()) -> list[GaitEvent]:
    """Heel strikes and toe offs from a vertical-force trace.

    Contact uses the same debounced hysteresis as the assist-device sensor.
    Event times are interpolated to the threshold crossing. A stance still
    open at the end of the trace is dropped.
    """
    t, f = trace.t, trace.force
    if len(t) == 0:
        return []
    dt = check_uniform(t)
    events: list[GaitEvent] = []
    flag = False
    since = float("inf")
    for i in range(len(f)):
        new = detect_contact(float(f[i]), flag, params, since)
        if new != flag:
            if new:
                events.append(GaitEvent(EventKind.HEEL_STRIKE, trace.foot, _crossing(t, f, i, params.on_threshold)))
            else:
                events.append(GaitEvent(EventKind.TOE_OFF, trace.foot, _crossing(t, f, i, params.off_threshold)))
            since = 0.0
        else:
            since += dt
        flag = new
    if events and events[-1].kind == EventKind.HEEL_STRIKE:
        events.pop()
    return events


def segment_strides(events: list[GaitEvent]) -> list[StrideRecord]:
    """One stride per consecutive heel-strike pair of each foot."""
    strides = []
    for foot in (Foot.LEFT, Foot.RIGHT):
        idx = [i for i, e in enumerate(events) if e.foot == foot]
        seq = [events[i] for i in idx]
        for j, e in enumerate(seq):
            expect = EventKind.HEEL_STRIKE if j % 2 == 0 else EventKind.TOE_OFF
            if e.kind != expect:
                raise EventSequenceError(
                    f"{foot} events must alternate HeelStrike/ToeOff; index {idx[j]} is {e.kind}", index=idx[j])
            if j > 0 and e.t <= seq[j - 1].t:
                raise EventSequenceError(f"{foot} events out of time order at index {idx[j]}", index=idx[j])
        for j in range(0, len(seq) - 2, 2):
            hs, to, nxt = seq[j], seq[j + 1], seq[j + 2]
            strides.append(StrideRecord(foot, hs.t, to.t - hs.t, nxt.t - to.t))
    strides.sort(key=lambda s: (s.start_t, s.foot.value))
    return strides


def compute_features(strides: list[StrideRecord], events: list[GaitEvent], path_length: float,
                     exclude_first_steps: int = 2) -> GaitFeatures:
    """Trial features with the first ``exclude_first_steps`` heel strikes
    (counted over both feet) left out of the phase averages.

    Duration and step count cover the whole trial.
    """
    if exclude_first_steps < 0:
        raise ValueError("exclude_first_steps must be >= 0")
    hs = sorted(e.t for e in events if e.kind == EventKind.HEEL_STRIKE)
    if len(hs) < exclude_first_steps + 1:
        raise InsufficientDataError(
            f"{len(hs)} steps found, need at least {exclude_first_steps + 1}")
    excluded = set(hs[:exclude_first_steps])
    kept = [s for s in strides if s.start_t not in excluded]
    left = [s for s in kept if s.foot == Foot.LEFT]
    right = [s for s in kept if s.foot == Foot.RIGHT]
    if not left or not right:
        raise InsufficientDataError("no strides left for one leg after excluding the first steps")
    times = [e.t for e in events]

    def mean_pct(group, attr):
        return float(np.mean([getattr(s, attr) for s in group]))

    return GaitFeatures(
        gait_duration=max(times) - min(times),
        step_count=len(hs),
        mean_stance_pct_left=mean_pct(left, "stance_pct"),
        mean_stance_pct_right=mean_pct(right, "stance_pct"),
        mean_swing_pct_left=mean_pct(left, "swing_pct"),
        mean_swing_pct_right=mean_pct(right, "swing_pct"),
        est_stride_length=2.0 * path_length / len(hs),
        steady_gait_duration=max(times) - hs[exclude_first_steps],
        n_strides_left=len(left),
        n_strides_right=len(right),
        excluded_steps=exclude_first_steps,
    )


def analyze_traces(left: FootForceTrace, right: FootForceTrace, path_length: float,
                   sensor: ContactSensorParams = ContactSensorParams(), exclude_first_steps: int = 2):
    """Full pipeline on a pair of traces; returns (features, events, strides)."""
    events = sorted(detect_events(left, sensor) + detect_events(right, sensor), key=lambda e: (e.t, e.foot.value))
    strides = segment_strides(events)
    return compute_features(strides, events, path_length, exclude_first_steps), events, strides


def truth_events(truth: GroundTruth) -> list[GaitEvent]:
    ev = [GaitEvent(EventKind.HEEL_STRIKE, foot, t) for t, foot in truth.heel_strikes]
    ev += [GaitEvent(EventKind.TOE_OFF, foot, t) for t, foot in truth.toe_offs]
    return sorted(ev, key=lambda e: (e.t, e.foot.value))


def features_from_truth(truth: GroundTruth, path_length: float, exclude_first_steps: int = 2) -> GaitFeatures:
    """Features computed from the generator's own event times."""
    events = truth_events(truth)
    return compute_features(segment_strides(events), events, path_length, exclude_first_steps)
