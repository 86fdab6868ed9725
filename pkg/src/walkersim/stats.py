"""Normality check and two-sample comparison of gait features.

Shapiro-Wilk follows Royston's approximation (Applied Statistics algorithm
AS R94). t-test p-values come from the regularized incomplete beta function,
evaluated with a Lentz continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .errors import DegenerateSampleError, SampleSizeError, WalkerSimError

ALPHA = 0.05
_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class SampleSet:
    values: tuple[float, ...]
    label: str = ""

    def __init__(self, values: Sequence[float], label: str = ""):
        vals = tuple(float(v) for v in values)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"sample {label!r} contains non-finite values")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "label", label)

    def __len__(self):
        return len(self.values)

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class NormalityResult:
    w_statistic: float
    p_value: float
    normal_at_alpha: bool
    alpha: float = ALPHA
    n: int = 0


class TTestVariant(str, Enum):
    STUDENT = "student"
    WELCH = "welch"
    PAIRED = "paired"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    significant: bool
    alpha: float = ALPHA
    variant: str = TTestVariant.STUDENT.value
    mean_a: float = float("nan")
    mean_b: float = float("nan")


# ---------------------------------------------------------------- special functions

def _poly(coefs: Sequence[float], x: float) -> float:
    """c[0] + c[1] x + c[2] x^2 + ..."""
    out = 0.0
    for c in reversed(coefs):
        out = out * x + c
    return out


def _betacf(a: float, b: float, x: float, eps: float = 1e-16, max_iter: int = 500) -> float:
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isnan(t):
        return float("nan")
    if math.isinf(t):
        return 0.0
    return betainc(0.5 * df, 0.5, df / (df + t * t))


# ---------------------------------------------------------------- Shapiro-Wilk

_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _swilk_coefficients(n: int) -> np.ndarray:
    """Upper-half coefficients a_1..a_{n//2} (a_1 pairs the extremes)."""
    nn2 = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    an25 = n + 0.25
    m = np.array([_STD_NORMAL.inv_cdf((i - 0.375) / an25) for i in range(1, nn2 + 1)])
    summ2 = 2.0 * float(np.sum(m * m))
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a = np.empty(nn2)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        i1 = 2
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a1 ** 2 - 2.0 * a2 ** 2))
        a[1] = a2
    else:
        i1 = 1
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 ** 2))
    a[0] = a1
    a[i1:] = -m[i1:] / fac
    return a


def shapiro_wilk(sample: SampleSet | Sequence[float], alpha: float = ALPHA) -> NormalityResult:
    """Shapiro-Wilk W and its p-value for 3 <= n <= 5000."""
    x = np.sort(sample.array() if isinstance(sample, SampleSet) else np.asarray(sample, dtype=float))
    n = len(x)
    if n < 3 or n > 5000:
        raise SampleSizeError(f"Shapiro-Wilk needs 3 <= n <= 5000, got n={n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    rng_ = x[-1] - x[0]
    if rng_ <= 1e-19 * max(1.0, abs(x[0])):
        raise DegenerateSampleError("all sample values are identical")

    a = _swilk_coefficients(n)
    xs = (x - x[0]) / rng_  # W is affine invariant; scaling keeps sums well conditioned
    nn2 = n // 2
    num = float(np.dot(a, xs[::-1][:nn2] - xs[:nn2]))
    ssq = float(np.sum((xs - xs.mean()) ** 2))
    w = min(num * num / ssq, 1.0)

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        p = min(max(p, 0.0), 1.0)
        return NormalityResult(w, p, p >= alpha, alpha, n)

    w1 = 1.0 - w
    if w1 <= 0:
        return NormalityResult(w, 1.0, True, alpha, n)
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return NormalityResult(w, 1e-99, False, alpha, n)
        y = -math.log(gamma - y)
        mean = _poly(_C3, n)
        sd = math.exp(_poly(_C4, n))
    else:
        xx = math.log(n)
        mean = _poly(_C5, xx)
        sd = math.exp(_poly(_C6, xx))
    p = 1.0 - _STD_NORMAL.cdf((y - mean) / sd)
    return NormalityResult(w, p, p >= alpha, alpha, n)


# ---------------------------------------------------------------- t-test

def _mean_var(x: np.ndarray) -> tuple[float, float]:
    m = float(np.mean(x))
    return m, float(np.sum((x - m) ** 2) / (len(x) - 1))


def t_test(a: SampleSet | Sequence[float], b: SampleSet | Sequence[float],
           variant: TTestVariant | str = TTestVariant.STUDENT, alpha: float = ALPHA) -> TTestResult:
    """Two-sided two-sample t-test of mean(a) - mean(b)."""
    variant = TTestVariant(variant)
    xa = a.array() if isinstance(a, SampleSet) else np.asarray(a, dtype=float)
    xb = b.array() if isinstance(b, SampleSet) else np.asarray(b, dtype=float)
    if len(xa) < 2 or len(xb) < 2:
        raise SampleSizeError(f"t-test needs n >= 2 per sample, got {len(xa)} and {len(xb)}")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(xb))):
        raise ValueError("samples contain non-finite values")
    na, nb = len(xa), len(xb)
    ma, va = _mean_var(xa)
    mb, vb = _mean_var(xb)

    if variant == TTestVariant.PAIRED:
        if na != nb:
            raise SampleSizeError(f"paired t-test needs equal sizes, got {na} and {nb}")
        md, vd = _mean_var(xa - xb)
        df = float(na - 1)
        diff, se2 = md, vd / na
    elif variant == TTestVariant.STUDENT:
        df = float(na + nb - 2)
        sp2 = ((na - 1) * va + (nb - 1) * vb) / df
        diff, se2 = ma - mb, sp2 * (1.0 / na + 1.0 / nb)
    else:
        qa, qb = va / na, vb / nb
        diff, se2 = ma - mb, qa + qb
        df = (qa + qb) ** 2 / (qa * qa / (na - 1) + qb * qb / (nb - 1)) if se2 > 0 else float(na + nb - 2)

    if se2 == 0.0:
        if diff == 0.0:
            t, p = 0.0, 1.0
        else:
            t, p = math.copysign(math.inf, diff), 0.0
    else:
        t = diff / math.sqrt(se2)
        p = t_sf_two_sided(t, df)
    return TTestResult(t, df, p, p < alpha, alpha, variant.value, ma, mb)


# ---------------------------------------------------------------- condition comparison

class ComparisonError(WalkerSimError):
    pass


@dataclass
class StatReport:
    variant: str
    alpha: float
    n_trials_a: int
    n_trials_b: int
    normality: dict[str, dict | None]
    tests: dict[str, dict]
    per_leg_tests: dict[str, dict]
    deltas: list[dict]  # per matched trial: B minus A
    trials_a: list[dict] = field(default_factory=list)
    trials_b: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _pooled(features, attr_left, attr_right) -> list[float]:
    out = []
    for f in features:
        out += [getattr(f, attr_left), getattr(f, attr_right)]
    return out


def _run(label: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except WalkerSimError as exc:
        raise ComparisonError(f"{label}: {exc}") from exc


def compare_conditions(features_a, features_b, variant: TTestVariant | str = TTestVariant.STUDENT,
                       alpha: float = ALPHA, labels_a=None, labels_b=None) -> StatReport:
    """Condition A vs B on stance and swing percentages.

    Left and right legs of every trial are pooled into one sample per
    condition (2 trials x 2 legs gives n = 4), each sample is checked with
    Shapiro-Wilk, then compared with a t-test. Per-leg t-tests and per-trial
    deltas are reported alongside.
    """
    if not features_a or not features_b:
        raise ComparisonError("both conditions need at least one trial")
    variant = TTestVariant(variant)
    labels_a = labels_a or [f"T{i + 1}" for i in range(len(features_a))]
    labels_b = labels_b or [f"T{i + 1}" for i in range(len(features_b))]

    samples = {
        "stance_A": SampleSet(_pooled(features_a, "mean_stance_pct_left", "mean_stance_pct_right"), "stance_A"),
        "stance_B": SampleSet(_pooled(features_b, "mean_stance_pct_left", "mean_stance_pct_right"), "stance_B"),
        "swing_A": SampleSet(_pooled(features_a, "mean_swing_pct_left", "mean_swing_pct_right"), "swing_A"),
        "swing_B": SampleSet(_pooled(features_b, "mean_swing_pct_left", "mean_swing_pct_right"), "swing_B"),
    }
    normality = {}
    for key, s in samples.items():
        normality[key] = asdict(_run(f"normality of {key}", shapiro_wilk, s, alpha))

    tests = {}
    for feat in ("stance", "swing"):
        tests[feat] = asdict(_run(f"t-test on {feat}", t_test, samples[f"{feat}_A"], samples[f"{feat}_B"],
                                  variant, alpha))

    per_leg = {}
    for feat in ("stance", "swing"):
        for leg in ("left", "right"):
            attr = f"mean_{feat}_pct_{leg}"
            xa = [getattr(f, attr) for f in features_a]
            xb = [getattr(f, attr) for f in features_b]
            key = f"{feat}_{leg}"
            if len(xa) >= 2 and len(xb) >= 2 and (variant != TTestVariant.PAIRED or len(xa) == len(xb)):
                per_leg[key] = asdict(_run(f"t-test on {key}", t_test, xa, xb, variant, alpha))

    deltas = []
    for i in range(min(len(features_a), len(features_b))):
        fa, fb = features_a[i], features_b[i]
        deltas.append({
            "trial": labels_b[i] if labels_a[i] == labels_b[i] else f"{labels_a[i]}/{labels_b[i]}",
            "stance_left": fb.mean_stance_pct_left - fa.mean_stance_pct_left,
            "stance_right": fb.mean_stance_pct_right - fa.mean_stance_pct_right,
            "swing_left": fb.mean_swing_pct_left - fa.mean_swing_pct_left,
            "swing_right": fb.mean_swing_pct_right - fa.mean_swing_pct_right,
            "step_count": fb.step_count - fa.step_count,
            "gait_duration": fb.gait_duration - fa.gait_duration,
        })

    return StatReport(
        variant=variant.value,
        alpha=alpha,
        n_trials_a=len(features_a),
        n_trials_b=len(features_b),
        normality=normality,
        tests=tests,
        per_leg_tests=per_leg,
        deltas=deltas,
        trials_a=[dict(label=lab, **f.to_dict()) for lab, f in zip(labels_a, features_a)],
        trials_b=[dict(label=lab, **f.to_dict()) for lab, f in zip(labels_b, features_b)],
    )
