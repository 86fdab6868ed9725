"""Batches of scenario runs followed by the A vs B comparison.

A batch file::

    {
      "schema_version": "1.0",
      "base": {"target_distance": 8.0},
      "runs": [
        {"label": "A-T1", "condition": "A", "trial_id": "T1", "rng_seed": 1},
        {"label": "B-T1", "condition": "B", "trial_id": "T1", "rng_seed": 1}
      ],
      "comparison": {"A": ["A-T1"], "B": ["B-T1"]}
    }

Each run is ``base`` updated with the run's own keys (sections are merged
one level deep). Without a comparison block, runs are grouped by condition.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import GaitFeatures, analyze_traces
from .config import ScenarioConfig, check_schema_version, scenario_from_dict
from .errors import ConfigError, WalkerSimError
from .gaitgen import Condition
from .io import fmt, write_json, write_run_outputs
from .kernel import run_scenario
from .plots import write_plots
from .stats import ALPHA, StatReport, TTestVariant, compare_conditions

log = logging.getLogger(__name__)

SECTIONS = ("plant", "controller", "pwad", "sensor", "gait")


@dataclass(frozen=True)
class BatchSpec:
    labels: tuple[str, ...]
    configs: tuple[ScenarioConfig, ...]
    comparison: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.labels) != len(self.configs):
            raise ConfigError("labels and configs differ in length", "runs")
        if len(set(self.labels)) != len(self.labels):
            raise ConfigError("run labels must be unique", "runs")
        for cond, labs in self.comparison.items():
            if cond not in ("A", "B"):
                raise ConfigError(f"comparison keys are 'A' and 'B', got {cond!r}", "comparison")
            for lab in labs:
                if lab not in self.labels:
                    raise ConfigError(f"comparison references unknown run {lab!r}", f"comparison.{cond}")

    def group(self, cond: str) -> tuple[str, ...]:
        if self.comparison:
            return tuple(self.comparison.get(cond, ()))
        return tuple(lab for lab, c in zip(self.labels, self.configs) if c.condition.value == cond)

    def with_seed_offset(self, offset: int) -> "BatchSpec":
        """Shift every run's seed by ``offset``; matched A/B pairs stay matched."""
        cfgs = tuple(c.with_seed(c.rng_seed + offset) for c in self.configs)
        return BatchSpec(self.labels, cfgs, self.comparison)


def default_batch(n_trials: int = 2, seed: int = 1, **overrides) -> BatchSpec:
    """n_trials x A plus n_trials x B; trial k of both conditions shares a seed."""
    labels, cfgs = [], []
    for cond in (Condition.A, Condition.B):
        for k in range(n_trials):
            tid = f"T{k + 1}"
            labels.append(f"{cond.value}-{tid}")
            cfgs.append(ScenarioConfig(condition=cond, trial_id=tid, rng_seed=seed + k, **overrides))
    comp = {c: tuple(lab for lab in labels if lab.startswith(c + "-")) for c in ("A", "B")}
    return BatchSpec(tuple(labels), tuple(cfgs), comp)


def _merge(base: dict, run: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in run.items():
        if key in SECTIONS and isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key].update(val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def batch_from_dict(data: dict) -> BatchSpec:
    if not isinstance(data, dict):
        raise ConfigError("batch must be a JSON object")
    extra = set(data) - {"schema_version", "base", "runs", "comparison"}
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"unknown key {key!r}", key)
    check_schema_version(data.get("schema_version"))
    base = data.get("base", {})
    if not isinstance(base, dict):
        raise ConfigError("base must be an object", "base")
    runs = data.get("runs")
    if not isinstance(runs, list) or not runs:
        raise ConfigError("runs must be a non-empty list", "runs")
    labels, cfgs = [], []
    for i, run in enumerate(runs):
        if not isinstance(run, dict):
            raise ConfigError("run entries must be objects", f"runs[{i}]")
        run = dict(run)
        label = str(run.pop("label", f"run{i + 1}"))
        try:
            cfgs.append(scenario_from_dict(_merge(base, run)))
        except ConfigError as exc:
            raise ConfigError(str(exc), f"runs[{i}].{exc.field}" if exc.field else f"runs[{i}]") from None
        labels.append(label)
    comp = data.get("comparison") or {}
    if not isinstance(comp, dict):
        raise ConfigError("comparison must be an object", "comparison")
    comp = {k: tuple(str(x) for x in v) for k, v in comp.items()}
    return BatchSpec(tuple(labels), tuple(cfgs), comp)


def load_batch(path: str | Path) -> BatchSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", "config") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          f"line {exc.lineno}") from None
    return batch_from_dict(data)


@dataclass
class RunOutcome:
    label: str
    status: str
    features: GaitFeatures | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "complete" and self.features is not None


def execute_run(label: str, cfg: ScenarioConfig, out_dir: str | Path | None, exclude_steps: int = 2) -> RunOutcome:
    """Simulate, analyze and (optionally) write one run. Never raises for domain errors."""
    try:
        rec = run_scenario(cfg)
    except WalkerSimError as exc:
        return RunOutcome(label, "error", error=str(exc))
    feats, err = None, None
    try:
        feats, _, _ = analyze_traces(rec.left_trace, rec.right_trace, cfg.target_distance, cfg.sensor,
                                     exclude_steps)
    except WalkerSimError as exc:
        err = f"analysis failed: {exc}"
    if out_dir is not None:
        write_run_outputs(rec, feats, out_dir)
    if err is None and not rec.complete:
        err = f"run ended with status {rec.status!r}"
    return RunOutcome(label, rec.status, feats, err)


@dataclass
class BatchResult:
    outcomes: list[RunOutcome]
    report: StatReport | None
    warnings: list[str]

    @property
    def failed(self) -> list[RunOutcome]:
        return [o for o in self.outcomes if not o.ok]


def _summary(spec: BatchSpec, result: BatchResult) -> str:
    lines = ["walkersim batch summary", ""]
    lines.append(f"{'run':<12}{'status':<12}{'steps':>6}{'dur[s]':>9}{'stL%':>8}{'stR%':>8}{'swL%':>8}{'swR%':>8}")
    for o in result.outcomes:
        f = o.features
        if f is None:
            lines.append(f"{o.label:<12}{o.status:<12}  {o.error or ''}")
            continue
        lines.append(f"{o.label:<12}{o.status:<12}{f.step_count:>6d}{f.gait_duration:>9.2f}"
                     f"{f.mean_stance_pct_left:>8.2f}{f.mean_stance_pct_right:>8.2f}"
                     f"{f.mean_swing_pct_left:>8.2f}{f.mean_swing_pct_right:>8.2f}")
    rep = result.report
    if rep is not None:
        lines += ["", "per-trial deltas (B minus A, percentage points)"]
        for d in rep.deltas:
            lines.append(f"  {d['trial']:<10} stance L {d['stance_left']:+6.2f}  stance R {d['stance_right']:+6.2f}"
                         f"  steps {d['step_count']:+d}  duration {d['gait_duration']:+6.2f} s")
        lines += ["", f"Shapiro-Wilk (alpha {rep.alpha})"]
        for key, nr in rep.normality.items():
            lines.append(f"  {key:<10} W={nr['w_statistic']:.4f} p={nr['p_value']:.4f} "
                         f"{'normal' if nr['normal_at_alpha'] else 'non-normal'}")
        lines += ["", f"t-test ({rep.variant}, alpha {rep.alpha})"]
        for key, tr in rep.tests.items():
            lines.append(f"  {key:<10} t={tr['t_statistic']:.4f} df={tr['degrees_of_freedom']:.2f} p={tr['p_value']:.4f} "
                         f"{'significant' if tr['significant'] else 'not significant'}")
    for w in result.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


FEATURE_FIELDS = tuple(f.name for f in dataclasses.fields(GaitFeatures))


def features_csv(spec: BatchSpec, outcomes: list[RunOutcome]) -> str:
    """One row per run; feature cells are empty when analysis failed."""
    lines = [",".join(("label", "condition", "trial_id", "rng_seed", "status") + FEATURE_FIELDS)]
    for cfg, o in zip(spec.configs, outcomes):
        cells = [o.label, cfg.condition.value, cfg.trial_id, str(cfg.rng_seed), o.status]
        d = o.features.to_dict() if o.features is not None else {}
        cells += [fmt(d[k]) if k in d else "" for k in FEATURE_FIELDS]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def run_batch(spec: BatchSpec, out_dir: str | Path | None = None, jobs: int = 1,
              variant: TTestVariant | str = TTestVariant.STUDENT, alpha: float = ALPHA,
              exclude_steps: int = 2) -> BatchResult:
    """Run every scenario, then compare conditions once all runs have joined.

    Each run writes only under ``out_dir/runs/<label>``. A failed run keeps
    its outputs and the outputs of the others, but the comparison is skipped.
    """
    out = Path(out_dir) if out_dir is not None else None
    dirs = [None if out is None else out / "runs" / lab for lab in spec.labels]
    args = list(zip(spec.labels, spec.configs, dirs, [exclude_steps] * len(dirs)))
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(args), os.cpu_count() or 1)) as pool:
            outcomes = list(pool.map(execute_run, *zip(*args)))
    else:
        outcomes = [execute_run(*a) for a in args]

    warnings: list[str] = []
    report = None
    by_label = {o.label: o for o in outcomes}
    failed = [o for o in outcomes if not o.ok]
    ga, gb = spec.group("A"), spec.group("B")
    if failed:
        for o in failed:
            warnings.append(f"run {o.label} failed: {o.error}")
        warnings.append("comparison skipped because of failed runs")
    elif not ga or not gb:
        warnings.append("comparison skipped: the batch does not contain both conditions")
    else:
        fa = [by_label[lab].features for lab in ga]
        fb = [by_label[lab].features for lab in gb]
        tid = {lab: cfg.trial_id for lab, cfg in zip(spec.labels, spec.configs)}
        try:
            report = compare_conditions(fa, fb, variant, alpha, [tid[lab] for lab in ga], [tid[lab] for lab in gb])
        except WalkerSimError as exc:
            warnings.append(f"comparison failed: {exc}")
    for w in warnings:
        log.warning(w)

    result = BatchResult(outcomes, report, warnings)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        runs = [{"label": o.label, "status": o.status, "error": o.error,
                 "features": None if o.features is None else o.features.to_dict()} for o in outcomes]
        write_json({"runs": runs, "warnings": warnings,
                    "report": None if report is None else report.to_dict()}, out / "report.json")
        (out / "summary.txt").write_text(_summary(spec, result))
        (out / "features.csv").write_text(features_csv(spec, outcomes))
        if report is not None:
            write_plots(report.to_dict(), out)
    return result
