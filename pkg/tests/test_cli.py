import filecmp
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest
import yaml

from conndecode import cli, plots
from conndecode.config import ConfigError, load_config, parse_config
from conndecode.export import export_results, fmt
from conndecode.runner import run_config
from conndecode.synth import GeneratorSpec, generate, write_synthetic

SPEC = {"n_subjects": 40, "n_nodes": 5, "planted_edges": [[0, 1, 2.0], [2, 3, -1.5]],
        "noise": 0.3, "nuisance_effect": 0.2, "seed": 4}


def make_study(tmp_path, spec=SPEC, **edits):
    write_synthetic(spec, tmp_path)
    path = tmp_path / "config.yaml"
    cfg = yaml.safe_load(path.read_text())
    cfg["cv"] = {"k_folds": 4, "nested": False}
    cfg["significance"]["n_permutations"] = 0
    for section, value in edits.items():
        if isinstance(value, dict) and isinstance(cfg.get(section), dict):
            cfg[section].update(value)
        else:
            cfg[section] = value
    path.write_text(yaml.safe_dump(cfg))
    return path


def csv_files(root):
    return sorted(p.relative_to(root) for p in Path(root).rglob("*.csv"))


def test_config_rejects_unknown_key(tmp_path):
    path = make_study(tmp_path, model={"learner": "svc", "kernel": "rbf"})
    with pytest.raises(ConfigError, match="kernel"):
        load_config(path)


def test_config_rejects_graphs_without_threshold(tmp_path):
    path = make_study(tmp_path, features={"graph_measures": ["degree"]})
    with pytest.raises(ConfigError, match="threshold"):
        load_config(path)


def test_validate_rejects_task_mismatch(tmp_path, capsys):
    path = make_study(tmp_path, model={"learner": "svc"})
    assert cli.main(["validate", str(path)]) == 2
    assert "continuous" in capsys.readouterr().err


def test_validate_ok(tmp_path, capsys):
    path = make_study(tmp_path)
    assert cli.main(["validate", str(path)]) == 0
    assert "ok" in capsys.readouterr().out


def test_lambda_alias_and_snapshot_round_trip(tmp_path):
    path = make_study(tmp_path, model={"learner": "enet_regression", "defaults": {"lambda": 0.3}})
    cfg = load_config(path)
    assert cfg.model_spec().default_params.lam == 0.3
    again = parse_config(yaml.safe_load(yaml.safe_dump(cfg.snapshot())))
    assert again.snapshot() == cfg.snapshot()


def test_queue_of_outcomes_and_thresholds(tmp_path):
    write_synthetic(SPEC, tmp_path)
    sheet = tmp_path / "variables.csv"
    rows = sheet.read_text().splitlines()
    rows = [rows[0] + ",second"] + [r + f",{i * 0.37 % 1:.3f}" for i, r in enumerate(rows[1:])]
    sheet.write_text("\n".join(rows) + "\n")
    cfg = yaml.safe_load((tmp_path / "config.yaml").read_text())
    cfg.update(outcomes=["outcome", "second"], cv={"k_folds": 4},
               features={"edges": True, "graph_measures": ["global_efficiency"]},
               thresholds=[{"rule": "proportional", "value": v} for v in (0.3, 0.5, 0.8)])
    cfg["significance"]["n_permutations"] = 0
    bundle = run_config(parse_config(cfg, tmp_path))
    assert [(e.outcome, e.label) for e in bundle.entries] == [
        (o, f"proportional_{v}") for o in ("outcome", "second") for v in (0.3, 0.5, 0.8)]
    assert not bundle.failed


def test_failing_entry_is_isolated(tmp_path):
    make_study(tmp_path, outcomes=["sparse", "outcome"])
    sheet = tmp_path / "variables.csv"
    rows = sheet.read_text().splitlines()
    # 'sparse' is known for only three subjects: too few for 4 folds
    rows = [rows[0] + ",sparse"] + [r + (f",{i}.5" if i < 3 else ",") for i, r in enumerate(rows[1:])]
    sheet.write_text("\n".join(rows) + "\n")
    code = cli.main(["run", str(tmp_path / "config.yaml"), "--no-plots"])
    assert code == 1
    assert (tmp_path / "results" / "outcome" / "raw" / "metrics.csv").exists()
    meta = yaml.safe_load((tmp_path / "results" / "run_metadata.yaml").read_text())
    assert [e["ok"] for e in meta["entries"]] == [False, True]


def test_export_regression_files(tmp_path):
    path = make_study(tmp_path)
    assert cli.main(["run", str(path), "--no-plots"]) == 0
    d = tmp_path / "results" / "outcome" / "raw"
    names = {p.name for p in d.iterdir()}
    assert {"metrics.csv", "predictions.csv", "weights.csv", "residuals.csv",
            "folds.csv", "model_weights.csv", "weights_per_fold.csv"} <= names
    assert "null_distribution.csv" not in names
    assert len((d / "predictions.csv").read_text().splitlines()) == 41
    metrics = (d / "metrics.csv").read_text()
    assert "nuisance,r_squared," in metrics and "full,r_squared," in metrics


def test_export_classification_files(tmp_path):
    spec = dict(SPEC, task="classification")
    path = make_study(tmp_path, spec=spec, model={"learner": "svc"},
                      significance={"n_permutations": 9})
    assert cli.main(["run", str(path)]) == 0
    d = tmp_path / "results" / "outcome" / "raw"
    metrics = (d / "metrics.csv").read_text().splitlines()
    keys = {line.split(",")[1] for line in metrics[1:] if line.startswith("full")}
    assert {"TP", "FP", "FN", "TN", "TP_percent", "mcc", "roc_auc", "auc_permutation_p"} <= keys
    assert (d / "null_distribution.csv").exists() and (d / "roc.csv").exists()
    null_rows = (d / "null_distribution.csv").read_text().splitlines()
    assert len(null_rows) == 10
    assert {p.name for p in d.glob("*.svg")} == {
        "confusion_matrix.svg", "roc.svg", "pr.svg", "weights.svg", "null_distribution.svg"}


def test_byte_identical_reruns(tmp_path):
    path = make_study(tmp_path, significance={"n_permutations": 5})
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", str(path), "-o", str(out1)]) == 0
    assert cli.main(["run", str(path), "-o", str(out2), "-j", "3"]) == 0
    files = csv_files(out1)
    assert files == csv_files(out2) and files
    for f in files:
        assert filecmp.cmp(out1 / f, out2 / f, shallow=False), f
    for svg in sorted(out1.rglob("*.svg")):
        assert svg.read_bytes() == (out2 / svg.relative_to(out1)).read_bytes()


def test_roc_plot_passes_through_corner():
    from conndecode.metrics import roc_curve

    curve = roc_curve([1, 1, -1, -1], [0.9, 0.8, 0.2, 0.1])
    fig = plots.roc_figure(curve)
    line = fig.axes[0].lines[1]
    pts = set(zip(line.get_xdata(), line.get_ydata()))
    assert (0.0, 1.0) in pts
    plots.plt.close(fig)


def test_scatter_has_two_series_and_fit_lines(rng):
    a = rng.standard_normal(20)
    fig = plots.scatter_figure(a, a + 0.1, 0.9, a * 0.1, 0.05)
    ax = fig.axes[0]
    assert len(ax.collections) == 2 and len(ax.lines) == 2
    plots.plt.close(fig)


def test_null_histogram_uses_sturges(rng):
    from conndecode.significance import NullDistribution

    assert plots.sturges_bins(99) == 8 and plots.sturges_bins(100) == 8
    assert plots.sturges_bins(128) == 8 and plots.sturges_bins(129) == 9
    fig = plots.null_figure(NullDistribution("auc", rng.random(99), 0.7))
    assert len(fig.axes[0].patches) == 8
    plots.plt.close(fig)


def test_svg_is_well_formed(tmp_path):
    path = make_study(tmp_path)
    assert cli.main(["run", str(path)]) == 0
    for svg in (tmp_path / "results").rglob("*.svg"):
        assert ET.parse(svg).getroot().tag.endswith("svg")


def test_fmt():
    assert fmt(None) == "undefined" and fmt(float("nan")) == "undefined"
    assert fmt(0.1) == "0.1" and fmt(np.float64(1 / 3)) == repr(1 / 3)
    assert fmt(True) == "true" and fmt(np.int64(3)) == "3"


def test_synth_deterministic_and_planted(tmp_path):
    s = GeneratorSpec(**SPEC)
    d1, r1, t1 = generate(s)
    d2, r2, t2 = generate(s)
    assert r1 == r2 and t1 == t2
    assert all(np.array_equal(a, b) for a, b in zip(d1.matrices, d2.matrices))
    e01 = np.array([m[0, 1] for m in d1.matrices])
    y = np.array([float(r[1]) for r in r1])
    assert np.corrcoef(e01, y)[0, 1] > 0.5
    with pytest.raises(ValueError):
        write_synthetic(dict(SPEC, planted_edges=[[0, 9, 1.0]]), tmp_path)


def test_synth_cli_bad_spec(tmp_path, capsys):
    spec = tmp_path / "gen.yaml"
    spec.write_text(yaml.safe_dump({"n_subjects": 2, "n_nodes": 3}))
    assert cli.main(["synth", str(spec), str(tmp_path / "out")]) == 2
    spec.write_text(yaml.safe_dump(SPEC))
    assert cli.main(["synth", str(spec), str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "config.yaml").exists()


def test_missing_config_exit_code(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "nope.yaml")]) == 2


def test_dynamic_mode(tmp_path, rng):
    (tmp_path / "ts").mkdir()
    lines, vars_ = ["subject_id,path"], ["subject_id,score"]
    for s in range(16):
        ts = rng.standard_normal((30, 4))
        ts[:, 1] += (s / 8) * ts[:, 0]
        np.savetxt(tmp_path / "ts" / f"s{s}.txt", ts, delimiter=",")
        lines.append(f"s{s},ts/s{s}.txt")
        vars_.append(f"s{s},{s / 8 + 0.1 * rng.standard_normal():.4f}")
    (tmp_path / "manifest.csv").write_text("\n".join(lines) + "\n")
    (tmp_path / "vars.csv").write_text("\n".join(vars_) + "\n")
    cfg = {"data": {"manifest": "manifest.csv", "variables": "vars.csv"},
           "mode": {"kind": "dynamic", "width": 10, "step": 5},
           "features": {"edges": True}, "outcomes": ["score"],
           "model": {"learner": "enet_regression", "defaults": {"lambda": 0.01}},
           "cv": {"k_folds": 4}}
    bundle = run_config(parse_config(cfg, tmp_path))
    e = bundle.entries[0]
    assert e.ok and e.design.p == 6
    assert e.weights.names[e.weights.weights.argmax()] == "edge_1_2"
    written = export_results(bundle, tmp_path / "out")
    assert all(Path(p).exists() for p in written)
