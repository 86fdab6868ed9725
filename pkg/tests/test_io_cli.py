import json

import numpy as np
import pytest

from walkersim.analysis import GaitFeatures, analyze_traces
from walkersim.batch import BatchSpec, batch_from_dict, default_batch, run_batch
from walkersim.cli import main
from walkersim.config import ScenarioConfig
from walkersim.errors import ConfigError, FormatError
from walkersim.gaitgen import Foot
from walkersim.io import (
    RUN_FILES,
    read_events_jsonl,
    read_force_csv,
    read_json,
    read_telemetry_csv,
    write_force_csv,
    write_json,
    write_run_outputs,
)
from walkersim.kernel import run_scenario
from walkersim.plots import PLOT_FILES, PlotKind, plot_svg, write_plots
from walkersim.stats import compare_conditions


@pytest.fixture(scope="module")
def record():
    return run_scenario(ScenarioConfig(condition="B", rng_seed=2))


def err_json(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_force_csv_round_trip_is_exact(tmp_path, record):
    write_force_csv(record.left_trace, tmp_path / "l.csv")
    write_force_csv(record.right_trace, tmp_path / "r.csv")
    left = read_force_csv(tmp_path / "l.csv", Foot.LEFT)
    right = read_force_csv(tmp_path / "r.csv", "Right")
    assert np.array_equal(left.force, record.left_trace.force)
    assert np.array_equal(left.t, record.left_trace.t)
    f_file, _, _ = analyze_traces(left, right, 8.0)
    f_mem, _, _ = analyze_traces(record.left_trace, record.right_trace, 8.0)
    assert f_file == f_mem


def test_truncated_csv_reports_row(tmp_path, record):
    write_force_csv(record.left_trace, tmp_path / "l.csv")
    lines = (tmp_path / "l.csv").read_text().splitlines()[:40]
    lines.append("0.39")
    (tmp_path / "t.csv").write_text("\n".join(lines) + "\n")
    with pytest.raises(FormatError) as exc:
        read_force_csv(tmp_path / "t.csv", Foot.LEFT)
    assert exc.value.row == 41


@pytest.mark.parametrize("body, row", [
    ("time,force\n0,0\n", 1),
    ("t,force\n0,0\n0.01,abc\n", 3),
    ("t,force\n0,0\n0.01,-5\n", 3),
    ("t,force\n0,0\n0.01,0\n0.03,0\n", 3),
])
def test_bad_csv(tmp_path, body, row):
    (tmp_path / "x.csv").write_text(body)
    with pytest.raises(FormatError) as exc:
        read_force_csv(tmp_path / "x.csv", Foot.LEFT)
    assert exc.value.row == row


def test_run_outputs(tmp_path, record):
    paths = write_run_outputs(record, None, tmp_path)
    assert sorted(p.name for p in paths.values()) == sorted(RUN_FILES.values())
    tel = read_telemetry_csv(paths["telemetry"])
    assert tel["tau_cmd"] == record.tau_cmd.tolist()
    assert tel["p_muscle"] == record.p_muscle.tolist()
    events = read_events_jsonl(paths["events"])
    assert len(events) == len(record.events) and events[0]["schema_version"] == "1.0"
    assert read_json(paths["features"])["features"] is None


def test_reader_rejects_unknown_major(tmp_path):
    (tmp_path / "r.json").write_text(json.dumps({"schema_version": "3.1"}))
    with pytest.raises(ConfigError):
        read_json(tmp_path / "r.json")


def test_cli_run_writes_five_files_deterministically(tmp_path):
    assert main(["run", "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--out", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(RUN_FILES.values())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_seed_override(tmp_path):
    assert main(["run", "--out", str(tmp_path), "--seed", "17"]) == 0
    assert read_json(tmp_path / "features.json")["rng_seed"] == 17


def test_cli_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"plant": {"mass": "heavy"}}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    err = err_json(capsys)["error"]
    assert err["type"] == "ConfigError" and err["field"] == "plant.mass"


def test_cli_incomplete_run(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"max_time": 2.0}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert err_json(capsys)["error"]["status"] == "incomplete"
    assert (tmp_path / "o" / "telemetry.csv").exists()


def test_cli_analyze_matches_in_process(tmp_path, record, capsys):
    write_force_csv(record.left_trace, tmp_path / "l.csv")
    write_force_csv(record.right_trace, tmp_path / "r.csv")
    assert main(["analyze", "--left", str(tmp_path / "l.csv"), "--right", str(tmp_path / "r.csv"),
                 "--out", str(tmp_path / "f.json")]) == 0
    got = GaitFeatures.from_dict(read_json(tmp_path / "f.json")["features"])
    ref, _, _ = analyze_traces(record.left_trace, record.right_trace, 8.0)
    assert got == ref


def test_cli_analyze_format_error(tmp_path, capsys):
    (tmp_path / "l.csv").write_text("t,force\n0.0,0.0\n0.01\n")
    (tmp_path / "r.csv").write_text("t,force\n0.0,0.0\n")
    assert main(["analyze", "--left", str(tmp_path / "l.csv"), "--right", str(tmp_path / "r.csv")]) == 4
    assert err_json(capsys)["error"]["row"] == 3


def test_cli_usage_error():
    assert main(["fly"]) == 2


def synthetic_report(n):
    rng = np.random.default_rng(0)
    def feats(dur, steps, right):
        sl, sr = 58 + rng.normal(), right + rng.normal()
        return GaitFeatures(dur + rng.normal(0, .2), steps, sl, sr, 100 - sl, 100 - sr, .5, dur - 1, 12, 12, 2)

    fa = [feats(16, 30, 60) for _ in range(n)]
    fb = [feats(15, 28, 58) for _ in range(n)]
    return compare_conditions(fa, fb).to_dict()


def test_svg_is_pure_function_of_report(tmp_path):
    rep = synthetic_report(2)
    for kind in PlotKind:
        assert plot_svg(kind, rep) == plot_svg(kind, json.loads(json.dumps(rep)))
        assert plot_svg(kind, rep).startswith("<svg")
    other = synthetic_report(3)
    assert plot_svg(PlotKind.STANCE_PCT, rep) != plot_svg(PlotKind.STANCE_PCT, other)


def test_fifty_trials_still_four_svgs(tmp_path):
    specs = write_plots(synthetic_report(50), tmp_path)
    assert len(specs) == 4
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(PLOT_FILES.values())


def test_cli_plot(tmp_path):
    write_json({"report": synthetic_report(2)}, tmp_path / "report.json")
    assert main(["plot", "--report", str(tmp_path / "report.json"), "--out", str(tmp_path / "svg")]) == 0
    assert len(list((tmp_path / "svg").glob("*.svg"))) == 4


def test_batch_spec_validation():
    with pytest.raises(ConfigError) as exc:
        batch_from_dict({"runs": [{"label": "x"}], "comparison": {"A": ["y"]}})
    assert exc.value.field == "comparison.A"
    with pytest.raises(ConfigError) as exc:
        batch_from_dict({"runs": [{"label": "x", "dt": 5}]})
    assert exc.value.field == "runs[0].dt"


def test_batch_file_merges_base(tmp_path):
    spec = batch_from_dict({"base": {"plant": {"mass": 14.0}, "target_distance": 6.0},
                            "runs": [{"label": "a", "condition": "A", "plant": {"push_force": 25.0}}]})
    cfg = spec.configs[0]
    assert cfg.plant.mass == 14.0 and cfg.plant.push_force == 25.0 and cfg.target_distance == 6.0


def test_single_condition_batch_skips_comparison(tmp_path):
    spec = default_batch(1)
    spec = BatchSpec(spec.labels[:1], spec.configs[:1])
    res = run_batch(spec, tmp_path)
    assert res.report is None and any("skipped" in w for w in res.warnings)
    assert (tmp_path / "runs" / "A-T1" / "telemetry.csv").exists()
    assert not list(tmp_path.glob("*.svg"))


def test_failed_run_keeps_outputs_and_skips_comparison(tmp_path, capsys):
    body = {"runs": [{"label": "A-T1", "condition": "A"}, {"label": "B-T1", "condition": "B", "max_time": 2.0}]}
    (tmp_path / "b.json").write_text(json.dumps(body))
    assert main(["batch", "--config", str(tmp_path / "b.json"), "--out", str(tmp_path / "o")]) == 3
    assert err_json(capsys)["error"]["failed"] == ["B-T1"]
    assert (tmp_path / "o" / "runs" / "A-T1" / "features.json").exists()
    assert (tmp_path / "o" / "runs" / "B-T1" / "telemetry.csv").exists()
    assert read_json(tmp_path / "o" / "report.json")["report"] is None


def test_parallel_batch_matches_serial(tmp_path):
    spec = default_batch(2)
    run_batch(spec, tmp_path / "s", jobs=1)
    run_batch(spec, tmp_path / "p", jobs=2)
    files = sorted(p.relative_to(tmp_path / "s") for p in (tmp_path / "s").rglob("*") if p.is_file())
    assert len(files) == 4 * 5 + 3 + 4
    for f in files:
        assert (tmp_path / "s" / f).read_bytes() == (tmp_path / "p" / f).read_bytes()


def test_batch_features_csv(tmp_path):
    run_batch(default_batch(2), tmp_path)
    rows = (tmp_path / "features.csv").read_text().splitlines()
    assert rows[0].startswith("label,condition,trial_id,rng_seed,status,gait_duration")
    assert [r.split(",")[0] for r in rows[1:]] == ["A-T1", "A-T2", "B-T1", "B-T2"]
