"""Synthetic plantar-force traces for a straight-line walking trial.

Each foot gets a trapezoidal vertical-force profile: force rises over a short
edge at heel strike, holds at ``peak_force`` through stance and falls to zero
at toe off. Left and right feet are half a stride apart.

Assistance from the right-leg muscle enters through a per-sample gain stream
in [0, 1]. For right stride ``k`` the generator averages the gain over the
left stance that precedes right heel strike ``k`` and uses that mean to
shorten right stance and lengthen the stride. The left foot is never
affected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ConfigError, DegenerateTrialError


class Foot(str, Enum):
    LEFT = "Left"
    RIGHT = "Right"

    def __str__(self):
        return self.value


class Condition(str, Enum):
    A = "A"  # walker only
    B = "B"  # walker plus pneumatic assist

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class GaitParams:
    cadence: float = 110.0  # [steps/min]
    stance_fraction_left: float = 0.58
    stance_fraction_right: float = 0.60
    stride_length: float = 0.55  # [m]
    peak_force: float = 700.0  # [N]
    force_noise_std: float = 5.0  # [N]
    assist_stance_reduction: float = 0.0
    assist_stride_gain: float = 0.0
    fog_rate: float = 0.0  # [episodes/min]
    fog_duration: float = 1.5  # [s]
    edge_duration: float = 0.03  # [s] force rise/fall time
    stance_jitter_std: float = 0.005  # stride-to-stride sd of the stance fraction
    stride_length_jitter: float = 0.02  # relative sd of stride length
    lead_in: float = 0.1  # [s] quiet samples before the first heel strike
    tail: float = 0.2  # [s] quiet samples after the last toe off

    def __post_init__(self):
        for name in ("stance_fraction_left", "stance_fraction_right"):
            val = getattr(self, name)
            if not 0.5 < val < 0.9:
                raise ConfigError(f"{name} must lie in (0.5, 0.9), got {val}", f"gait.{name}")
        for name in ("cadence", "stride_length", "peak_force", "edge_duration"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0", f"gait.{name}")
        for name in ("force_noise_std", "assist_stance_reduction", "assist_stride_gain", "fog_rate",
                     "fog_duration", "stance_jitter_std", "stride_length_jitter", "lead_in", "tail"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0", f"gait.{name}")
        lo = min(self.stance_fraction_left, self.stance_fraction_right) - self.assist_stance_reduction
        if lo - 3 * self.stance_jitter_std <= 0.5:
            raise ConfigError("assist reduction and jitter push stance below 50%", "gait.assist_stance_reduction")
        swing = (1 - max(self.stance_fraction_left, self.stance_fraction_right) - 3 * self.stance_jitter_std)
        if 2 * self.edge_duration >= swing * self.stride_period:
            raise ConfigError("edge_duration too long for the swing phase", "gait.edge_duration")

    @property
    def stride_period(self) -> float:
        return 120.0 / self.cadence

    @property
    def double_support_fraction(self) -> float:
        """Two double-support intervals per stride, set by the stance fractions."""
        return (self.stance_fraction_left - 0.5) + (self.stance_fraction_right - 0.5)

    @property
    def speed(self) -> float:
        return self.stride_length / self.stride_period

    def noiseless(self) -> "GaitParams":
        return replace(self, force_noise_std=0.0, stance_jitter_std=0.0, stride_length_jitter=0.0)


def condition_preset(condition: Condition | str) -> GaitParams:
    """Gait parameters for condition A (walker only) or B (walker + assist).

    The two presets differ only in the assist terms.
    """
    condition = Condition(condition)
    if condition == Condition.A:
        return GaitParams()
    return GaitParams(assist_stance_reduction=0.02, assist_stride_gain=0.08)


@dataclass
class FootForceTrace:
    foot: Foot
    t: np.ndarray
    force: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.force = np.asarray(self.force, dtype=float)
        if self.t.shape != self.force.shape:
            raise ValueError("t and force must have the same length")

    def __len__(self):
        return len(self.t)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else float("nan")

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.force.tolist()))


@dataclass
class StrideSchedule:
    """Per-stride random draws, indexed by left heel strike."""

    stance_left: np.ndarray
    stance_right: np.ndarray  # before assist
    length_scale: np.ndarray  # multiplicative jitter on stride length
    fog: np.ndarray  # freeze duration inserted at left heel strike k [s]

    def __len__(self):
        return len(self.stance_left)


@dataclass(frozen=True)
class TruthStride:
    foot: Foot
    index: int
    hs_t: float
    to_t: float
    next_hs_t: float
    stance_fraction: float  # fraction used to build the stride
    length: float
    assist_mean: float
    fog: bool

    @property
    def stance(self) -> float:
        return self.to_t - self.hs_t

    @property
    def period(self) -> float:
        return self.next_hs_t - self.hs_t

    @property
    def swing(self) -> float:
        return self.period - self.stance


@dataclass
class GroundTruth:
    strides: list[TruthStride]
    heel_strikes: list[tuple[float, Foot]]  # in time order; one per step
    toe_offs: list[tuple[float, Foot]]
    step_lengths: list[float]
    distance: float  # cumulative step distance at the last heel strike
    end_t: float
    fog_strides: list[int] = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return len(self.heel_strikes)

    def strides_for(self, foot: Foot) -> list[TruthStride]:
        return [s for s in self.strides if s.foot == foot]

    def mean_stance_fraction(self, foot: Foot) -> float:
        strides = self.strides_for(foot)
        return float(np.mean([s.stance_fraction for s in strides]))


def _clipped_normal(rng: np.random.Generator, sd: float, n: int) -> np.ndarray:
    if sd == 0:
        return np.zeros(n)
    return np.clip(rng.normal(0.0, sd, n), -3 * sd, 3 * sd)


def draw_schedule(params: GaitParams, n_strides: int, rng: np.random.Generator) -> StrideSchedule:
    return StrideSchedule(
        stance_left=params.stance_fraction_left + _clipped_normal(rng, params.stance_jitter_std, n_strides),
        stance_right=params.stance_fraction_right + _clipped_normal(rng, params.stance_jitter_std, n_strides),
        length_scale=1.0 + _clipped_normal(rng, params.stride_length_jitter, n_strides),
        fog=np.zeros(n_strides),
    )


def inject_fog(schedule: StrideSchedule, params: GaitParams, rng: np.random.Generator) -> StrideSchedule:
    """Add freezing-of-gait episodes drawn from a Poisson process.

    Episode onsets are drawn on the un-frozen time axis. An episode in stride
    ``k`` freezes the walker at left heel strike ``k`` for ``fog_duration``:
    both feet stay loaded and the stride makes no extra progress.
    """
    if params.fog_rate < 0:
        raise ConfigError("fog_rate must be >= 0", "gait.fog_rate")
    if params.fog_rate == 0 or len(schedule) == 0:
        return schedule
    period = params.stride_period
    horizon = len(schedule) * period
    mean_gap = 60.0 / params.fog_rate
    fog = schedule.fog.copy()
    t = float(rng.exponential(mean_gap))
    while t < horizon:
        fog[int(t // period)] += params.fog_duration
        t += float(rng.exponential(mean_gap))
    return replace(schedule, fog=fog)


def _render(intervals: Sequence[tuple[float, float]], t: np.ndarray, peak: float, edge: float) -> np.ndarray:
    force = np.zeros(len(t))
    for a, b in intervals:
        i0 = int(np.searchsorted(t, a, side="left"))
        i1 = int(np.searchsorted(t, b, side="right"))
        if i1 <= i0:
            continue
        seg = t[i0:i1]
        shape = np.minimum(np.minimum((seg - a) / edge, (b - seg) / edge), 1.0)
        force[i0:i1] = peak * np.clip(shape, 0.0, 1.0)
    return force


def _noise(sd: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if sd == 0:
        return np.zeros(n)
    return rng.normal(0.0, sd, n)


AssistInput = Union[None, float, np.ndarray, Callable[[np.ndarray], np.ndarray]]


def synthesize_trial(
    params: GaitParams,
    distance: float,
    assist: AssistInput,
    rng: np.random.Generator,
    dt: float = 0.01,
    n_samples_min: int = 0,
) -> tuple[FootForceTrace, FootForceTrace, GroundTruth]:
    """Generate left/right force traces covering ``distance`` meters.

    ``assist`` is the per-sample gain stream on the grid ``i * dt``. It may be
    None (no assist), a constant, an array, or a callable that receives the
    rendered left-foot force and returns the stream. The callable form lets
    a contact-triggered device close the loop. Left timing never depends on
    assistance, so the left trace can be rendered before the stream exists.

    The traces are padded with zeros to at least ``n_samples_min`` samples.
    """
    if not dt > 0:
        raise ConfigError("dt must be > 0", "dt")
    if not distance >= params.stride_length:
        raise DegenerateTrialError(
            f"distance {distance} m is shorter than one stride ({params.stride_length} m)")

    sched_rng, fog_rng, noise_l_rng, noise_r_rng = rng.spawn(4)
    T0 = params.stride_period
    min_scale = 1.0 - 3 * params.stride_length_jitter
    n_strides = int(math.ceil(distance / (params.stride_length * min_scale))) + 3
    sched = draw_schedule(params, n_strides, sched_rng)
    sched = inject_fog(sched, params, fog_rng)

    # freeze k is inserted right after left heel strike k
    shift_before = np.concatenate(([0.0], np.cumsum(sched.fog)))  # shift_before[k] = sum fog[:k]
    base = params.lead_in + np.arange(n_strides) * T0
    hs_l = base + shift_before[:-1]
    to_l = base + shift_before[1:] + sched.stance_left * T0
    hs_r = base + 0.5 * T0 + shift_before[1:]
    # right stance k outlasts left heel strike k+1, so it also absorbs freeze k+1
    fog_next = np.append(sched.fog[1:], 0.0)
    right_base_to = base + 0.5 * T0 + shift_before[1:] + fog_next

    horizon_end = float(max(to_l[-1], right_base_to[-1] + sched.stance_right[-1] * T0)) + params.tail
    n_horizon = max(int(math.ceil(horizon_end / dt)) + 1, n_samples_min)
    grid = np.arange(n_horizon) * dt
    noise_l = _noise(params.force_noise_std, n_horizon, noise_l_rng)
    left_force_h = np.maximum(
        _render(list(zip(hs_l, to_l)), grid, params.peak_force, params.edge_duration) + noise_l, 0.0)

    if assist is None:
        stream = np.zeros(n_horizon)
    elif callable(assist):
        stream = np.asarray(assist(left_force_h), dtype=float)
    elif np.ndim(assist) == 0:
        stream = np.full(n_horizon, float(assist))
    else:
        stream = np.asarray(assist, dtype=float)
    if np.any(stream < 0) or np.any(stream > 1):
        raise ConfigError("assist gains must lie in [0, 1]", "assist")

    # walk the steps until the path is covered
    heel_strikes: list[tuple[float, Foot]] = [(float(hs_l[0]), Foot.LEFT)]
    step_lengths = [0.5 * params.stride_length]
    covered = step_lengths[0]
    right_fraction = np.empty(n_strides)
    assist_mean = np.zeros(n_strides)
    stride_len = np.empty(n_strides)
    last_left, last_right = 0, -1
    k = 0
    while covered < distance:
        if k >= n_strides - 1:
            raise DegenerateTrialError("stride horizon exhausted before covering the distance")
        i0 = int(np.searchsorted(grid, hs_l[k], side="left"))
        i1 = int(np.searchsorted(grid, hs_r[k], side="left"))
        if i1 > len(stream):
            raise ConfigError("assist stream does not cover the trial", "assist")
        g = float(np.mean(stream[i0:i1])) if i1 > i0 else 0.0
        assist_mean[k] = g
        right_fraction[k] = sched.stance_right[k] - params.assist_stance_reduction * g
        stride_len[k] = params.stride_length * sched.length_scale[k] * (1.0 + params.assist_stride_gain * g)
        half = 0.5 * stride_len[k]
        # right step k
        heel_strikes.append((float(hs_r[k]), Foot.RIGHT))
        step_lengths.append(half)
        covered += half
        last_right = k
        if covered >= distance:
            break
        # left step k+1
        heel_strikes.append((float(hs_l[k + 1]), Foot.LEFT))
        step_lengths.append(half)
        covered += half
        last_left = k + 1
        k += 1

    to_r = right_base_to + right_fraction * T0
    to_r[last_right] = hs_r[last_right] + right_fraction[last_right] * T0 + (
        sched.fog[last_right + 1] if last_right + 1 <= last_left else 0.0)
    left_iv = [(float(hs_l[j]), float(to_l[j])) for j in range(last_left + 1)]
    right_iv = [(float(hs_r[j]), float(to_r[j])) for j in range(last_right + 1)]
    end_t = max(left_iv[-1][1], right_iv[-1][1] if right_iv else 0.0) + params.tail
    n = max(int(math.ceil(end_t / dt)) + 1, n_samples_min)
    if n > n_horizon:
        raise DegenerateTrialError("trial outgrew the rendering horizon")
    t = grid[:n].copy()
    # the horizon trace carries strides past the end of the trial; re-render
    # left and keep the same noise samples
    left_force = np.maximum(_render(left_iv, t, params.peak_force, params.edge_duration) + noise_l[:n], 0.0)
    right_force = np.maximum(_render(right_iv, t, params.peak_force, params.edge_duration)
                             + _noise(params.force_noise_std, n, noise_r_rng), 0.0)

    strides = []
    for j in range(last_left):
        strides.append(TruthStride(Foot.LEFT, j, float(hs_l[j]), float(to_l[j]), float(hs_l[j + 1]),
                                   float(sched.stance_left[j]), float(stride_len[j]), float(assist_mean[j]),
                                   bool(sched.fog[j] > 0)))
    for j in range(last_right):
        strides.append(TruthStride(Foot.RIGHT, j, float(hs_r[j]), float(to_r[j]), float(hs_r[j + 1]),
                                   float(right_fraction[j]), float(stride_len[j]), float(assist_mean[j]),
                                   bool(sched.fog[j + 1] > 0)))
    strides.sort(key=lambda s: (s.hs_t, s.foot.value))
    toe_offs = sorted([(b, Foot.LEFT) for _, b in left_iv] + [(b, Foot.RIGHT) for _, b in right_iv])
    truth = GroundTruth(
        strides=strides,
        heel_strikes=heel_strikes,
        toe_offs=toe_offs,
        step_lengths=step_lengths,
        distance=covered,
        end_t=float(end_t),
        fog_strides=[j for j in range(last_left + 1) if sched.fog[j] > 0],
    )
    return FootForceTrace(Foot.LEFT, t, left_force), FootForceTrace(Foot.RIGHT, t.copy(), right_force), truth
