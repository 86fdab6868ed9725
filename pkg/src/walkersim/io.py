"""Readers and writers for telemetry, force traces, event logs and reports.

Floats are written with ``repr`` so every file round-trips bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .analysis import GaitFeatures, check_uniform
from .config import SCHEMA_VERSION, check_schema_version
from .errors import FormatError
from .gaitgen import Foot, FootForceTrace
from .kernel import TELEMETRY_COLUMNS, RunRecord

FORCE_HEADER = ("t", "force")

RUN_FILES = {
    "telemetry": "telemetry.csv",
    "events": "events.jsonl",
    "force_left": "force_left.csv",
    "force_right": "force_right.csv",
    "features": "features.json",
}


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_rows(path: Path, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_telemetry_csv(record: RunRecord, path: str | Path) -> None:
    _write_rows(Path(path), TELEMETRY_COLUMNS, record.rows())


def read_telemetry_csv(path: str | Path) -> dict[str, list]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TELEMETRY_COLUMNS:
            raise FormatError(f"unexpected telemetry header {header}", row=1)
        cols: dict[str, list] = {c: [] for c in TELEMETRY_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TELEMETRY_COLUMNS):
                raise FormatError(f"expected {len(TELEMETRY_COLUMNS)} fields, got {len(row)}", row=lineno)
            for name, val in zip(TELEMETRY_COLUMNS, row):
                if name == "region":
                    cols[name].append(val)
                elif name in ("tick", "valve"):
                    cols[name].append(int(val))
                else:
                    cols[name].append(float(val))
    return cols


def write_force_csv(trace: FootForceTrace, path: str | Path) -> None:
    _write_rows(Path(path), FORCE_HEADER, zip(trace.t.tolist(), trace.force.tolist()))


def read_force_csv(path: str | Path, foot: Foot | str) -> FootForceTrace:
    """Two-column ``t,force`` CSV; errors carry the 1-based line number."""
    foot = Foot(foot)
    t, f = [], []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(FORCE_HEADER):
            raise FormatError(f"expected header 't,force', got {header}", row=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise FormatError(f"expected 2 fields, got {len(row)}", row=lineno)
            try:
                ti, fi = float(row[0]), float(row[1])
            except ValueError:
                raise FormatError(f"non-numeric value in {row}", row=lineno) from None
            if not (math.isfinite(ti) and math.isfinite(fi)):
                raise FormatError("non-finite value", row=lineno)
            if fi < 0:
                raise FormatError("negative force", row=lineno)
            t.append(ti)
            f.append(fi)
    trace = FootForceTrace(foot, np.asarray(t), np.asarray(f))
    check_uniform(trace.t)
    return trace


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(obj: dict, path: str | Path) -> None:
    obj = {"schema_version": SCHEMA_VERSION, **obj}
    Path(path).write_text(dumps(obj))


def read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"JSON parse error: {exc.msg}", row=exc.lineno) from None
    if not isinstance(data, dict):
        raise FormatError("expected a JSON object")
    check_schema_version(data.get("schema_version"))
    return data


def write_events_jsonl(events: list[dict], path: str | Path) -> None:
    with open(path, "w") as fh:
        for ev in events:
            fh.write(json.dumps({"schema_version": SCHEMA_VERSION, **ev}, sort_keys=True) + "\n")


def read_events_jsonl(path: str | Path) -> list[dict]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise FormatError(f"bad JSON line: {exc.msg}", row=lineno) from None
    return out


def features_payload(record: RunRecord, features: GaitFeatures | None) -> dict:
    cfg = record.config
    return {
        "trial_id": cfg.trial_id,
        "condition": cfg.condition.value,
        "rng_seed": cfg.rng_seed,
        "status": record.status,
        "final_position": record.final_position,
        "walker_duration": float(record.t[-1]),
        "features": None if features is None else features.to_dict(),
    }


def write_run_outputs(record: RunRecord, features: GaitFeatures | None, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: out / v for k, v in RUN_FILES.items()}
    write_telemetry_csv(record, paths["telemetry"])
    write_events_jsonl(record.events, paths["events"])
    write_force_csv(record.left_trace, paths["force_left"])
    write_force_csv(record.right_trace, paths["force_right"])
    write_json(features_payload(record, features), paths["features"])
    return paths
