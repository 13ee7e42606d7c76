import csv
import json
import subprocess
import sys

import pytest

from rainer.cli import main
from rainer.config import DATA_ENV
from rainer.pipeline import strip_timing
from rainer.synthetic import synthetic_columns, write_synthetic_csv

MODELS = """\
models:
  - nb
  - name: dt
    params: {max_depth: 5}
  - name: knn
    params: {n_neighbors: 9}
  - name: dt+lr+nb
    members:
      dt: {max_depth: 5}
"""


def write_config(tmp_path, data, body="", name="c.yaml"):
    path = tmp_path / name
    path.write_text(f"data: {{input: {data}}}\nseed: 11\n{body}")
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(autouse=True)
def no_data_override(monkeypatch):
    monkeypatch.delenv(DATA_ENV, raising=False)


def test_inspect_writes_summaries(tmp_path, synthetic_csv, capsys):
    config = write_config(tmp_path, synthetic_csv)
    assert main(["inspect", "--config", str(config), "--out", str(tmp_path / "o")]) == 0
    miss = {r["column"]: r for r in read_csv(tmp_path / "o" / "missingness.csv")}
    assert float(miss["Evaporation"]["missing_fraction"]) > 0.30
    assert miss["Evaporation"]["dropped"] == "True"
    assert miss["MinTemp"]["dropped"] == "False"
    corr = read_csv(tmp_path / "o" / "correlation.csv")
    assert {r["feature"] for r in corr} >= {"MaxDifferenceTemp", "Rainfall"}
    weights = read_csv(tmp_path / "o" / "weights.csv")
    assert sum(float(r["weight"]) for r in weights) == pytest.approx(1.0)
    assert "dropped for missingness" in capsys.readouterr().out


def test_complete_file_has_no_missingness(tmp_path):
    data = write_synthetic_csv(tmp_path / "full.csv", 300, seed=1, sparse_missing=0.0,
                               dense_missing=0.0, label_missing=0.0)
    config = write_config(tmp_path, data)
    assert main(["inspect", "--config", str(config), "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "missingness.csv")
    assert len(rows) == 23
    assert all(float(r["missing_fraction"]) == 0.0 for r in rows)


def test_duplicate_feature_correlates_perfectly(tmp_path):
    cols = synthetic_columns(300, seed=2)
    cols["Temp3pm"] = list(cols["Temp9am"])
    header = list(cols)
    path = tmp_path / "dup.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(zip(*(cols[h] for h in header)))
    config = write_config(tmp_path, path)
    assert main(["inspect", "--config", str(config), "--out", str(tmp_path / "o")]) == 0
    corr = {r["feature"]: r for r in read_csv(tmp_path / "o" / "correlation.csv")}
    assert float(corr["Temp9am"]["Temp3pm"]) == pytest.approx(1.0, abs=1e-12)


def test_reduce_outputs(tmp_path, synthetic_csv):
    body = "reduce:\n  tsne: {sample: 60, perplexity: 10, n_iter: 150}\n"
    config = write_config(tmp_path, synthetic_csv, body)
    assert main(["reduce", "--config", str(config), "--out", str(tmp_path / "o")]) == 0
    scree = read_csv(tmp_path / "o" / "scree.csv")
    for dataset in ("original", "balanced"):
        part = [r for r in scree if r["dataset"] == dataset]
        assert len(part) == 17
        assert sum(float(r["ratio"]) for r in part) == pytest.approx(1.0, abs=1e-8)
    loadings = read_csv(tmp_path / "o" / "loadings.csv")
    assert {"feature", "PC1", "PC2"} <= set(loadings[0])
    scores = read_csv(tmp_path / "o" / "scores.csv")
    assert all(0.0 <= float(r["cos2"]) <= 1.0 for r in scores)
    tsne = read_csv(tmp_path / "o" / "tsne.csv")
    assert len(tsne) == 60
    assert sum(r["label"] == "1" for r in tsne) == 30
    assert len({r["row"] for r in tsne}) == 60


def run_command(tmp_path, data, command, out, body=MODELS, extra=()):
    config = write_config(tmp_path, data, "features: {strategies: [original, selected_constructed_pc2]}\n" + body)
    code = main([command, "--config", str(config), "--out", str(out), *extra])
    return code, json.loads((out / "report.json").read_text())


def test_train_report_is_complete(tmp_path, synthetic_csv):
    code, report = run_command(tmp_path, synthetic_csv, "train", tmp_path / "o")
    assert code == 0
    assert report["failed_cells"] == 0
    assert report["evaluated_on"] == "test"
    assert len(report["rows"]) == 4 * 2
    assert {(r["model"], r["strategy"]) for r in report["rows"]} == {
        (m, s) for m in ("nb", "dt", "knn", "dt+lr+nb")
        for s in ("original", "selected_constructed_pc2")}
    for row in report["rows"]:
        assert row["status"] == "ok" and row["error"] is None
        assert set(row["metrics"]) >= {"accuracy", "precision", "recall", "f1", "auc"}
        assert all(row["metrics"][k] is not None for k in ("accuracy", "auc"))
        assert row["seed"] == 11
        assert row["config_delta"] == {"balance_mode": "undersample", "impute_mode": "full"}
        assert (tmp_path / "o" / "roc" / f"{row['model']}__{row['strategy']}.csv").exists()
    dt = next(r for r in report["rows"] if r["model"] == "dt")
    assert dt["hyperparameters"]["max_depth"] == 5
    assert "PC2" in next(r for r in report["rows"]
                         if r["strategy"] == "selected_constructed_pc2")["features"]


def test_rerun_is_identical_modulo_timing(tmp_path, synthetic_csv):
    _, a = run_command(tmp_path, synthetic_csv, "train", tmp_path / "a")
    _, b = run_command(tmp_path, synthetic_csv, "train", tmp_path / "b")
    assert json.dumps(strip_timing(a), sort_keys=True) == json.dumps(strip_timing(b), sort_keys=True)
    for roc in (tmp_path / "a" / "roc").iterdir():
        assert roc.read_bytes() == (tmp_path / "b" / "roc" / roc.name).read_bytes()


def test_threads_do_not_change_numbers(tmp_path, synthetic_csv):
    _, a = run_command(tmp_path, synthetic_csv, "train", tmp_path / "a", extra=("--threads", "1"))
    _, b = run_command(tmp_path, synthetic_csv, "train", tmp_path / "b", extra=("--threads", "3"))
    assert strip_timing(a["rows"]) == strip_timing(b["rows"])
    assert a["config"]["threads"] == 1 and b["config"]["threads"] == 3


def test_single_point_grid_sets_hyperparameters(tmp_path, synthetic_csv):
    body = "tuning: {k: 3}\nmodels:\n  - name: knn\n    grid: {n_neighbors: [7]}\n"
    code, report = run_command(tmp_path, synthetic_csv, "gridsearch", tmp_path / "o", body)
    assert code == 0
    for row in report["rows"]:
        assert row["hyperparameters"]["n_neighbors"] == 7
        assert row["cv"]["k"] == 3 and len(row["cv"]["table"]) == 1


def test_train_ignores_grids(tmp_path, synthetic_csv):
    body = "models:\n  - name: knn\n    params: {n_neighbors: 9}\n    grid: {n_neighbors: [3]}\n"
    _, report = run_command(tmp_path, synthetic_csv, "train", tmp_path / "o", body)
    assert all(r["hyperparameters"]["n_neighbors"] == 9 and r["cv"] is None for r in report["rows"])


def test_failed_cell_exits_one(tmp_path, synthetic_csv):
    body = "models:\n  - nb\n  - name: knn\n    params: {n_neighbors: 100000}\n"
    code, report = run_command(tmp_path, synthetic_csv, "evaluate", tmp_path / "o", body)
    assert code == 1
    assert report["failed_cells"] == 2
    bad = [r for r in report["rows"] if r["model"] == "knn"]
    assert all(r["status"] == "error" and r["metrics"] is None for r in bad)
    assert all("n_neighbors" in r["error"] for r in bad)
    assert all(r["status"] == "ok" for r in report["rows"] if r["model"] == "nb")


def test_invalid_config_exits_two(tmp_path, synthetic_csv, capsys):
    config = write_config(tmp_path, synthetic_csv, "preprocess: {balance: sideways}\n")
    assert main(["train", "--config", str(config)]) == 2
    assert "c.yaml:3" in capsys.readouterr().err


def test_missing_input_exits_two(tmp_path):
    config = write_config(tmp_path, tmp_path / "absent.csv", MODELS)
    assert main(["train", "--config", str(config)]) == 2


def test_environment_overrides_input(tmp_path, synthetic_csv, monkeypatch):
    config = write_config(tmp_path, tmp_path / "absent.csv", MODELS)
    monkeypatch.setenv(DATA_ENV, str(synthetic_csv))
    assert main(["inspect", "--config", str(config), "--out", str(tmp_path / "o")]) == 0


def test_module_entry_point(tmp_path):
    result = subprocess.run([sys.executable, "-m", "rainer", "train", "--config",
                             str(tmp_path / "none.yaml")], capture_output=True, text=True)
    assert result.returncode == 2
    assert "cannot read config" in result.stderr
