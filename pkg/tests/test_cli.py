"""Command-line behavior: wiring, precedence, outputs, exit codes."""

import json

import numpy as np
import pytest

from nonreg.cli import main
from nonreg.data import parse_class_dataset
from nonreg.intervals import fixed_beta_interval
from nonreg.models import MixtureModel, model_from_config
from nonreg.rng import spawn

MIX_CFG = {"model": "mixture", "delta": 0.25}
DEC_CFG = {"model": "decision", "theta": [0.0, 0.5]}


@pytest.fixture
def class_csv(tmp_path):
    path = tmp_path / "class.csv"
    path.write_text("x1,y\n0.0,-1\n1.0,-1\n2.0,1\n-0.5,-1\n1.5,1\n2.5,1\n")
    return path


@pytest.fixture
def mixture_csv(tmp_path):
    data = MixtureModel(0.25).sample(40, 7)
    lines = ["x1,y"] + [f"{float(x)!r},{int(y)}" for x, y in zip(data.X[:, 1], data.y)]
    path = tmp_path / "mix.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def decision_csv(tmp_path, capsys):
    out = tmp_path / "sim"
    cfg = tmp_path / "dec.json"
    cfg.write_text(json.dumps({"model": DEC_CFG, "n": 40, "seed": 3}))
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    capsys.readouterr()
    return out / "dataset.csv"


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_fit_prints_least_squares_json(capsys, class_csv):
    code, out, _ = _run(capsys, ["fit", "--data", str(class_csv)])
    assert code == 0
    payload = json.loads(out)
    assert payload["kind"] == "class"
    assert payload["n"] == 6
    data = parse_class_dataset(class_csv)
    expected = np.linalg.lstsq(data.X, data.y, rcond=None)[0]
    assert payload["coef"] == pytest.approx(expected, abs=1e-10)
    assert len(payload["se"]) == 2


def test_fit_detects_decision_data(capsys, decision_csv):
    code, out, _ = _run(capsys, ["fit", "--data", str(decision_csv)])
    assert code == 0
    payload = json.loads(out)
    assert payload["kind"] == "decision"
    assert len(payload["rule_coef"]) == 3
    assert len(payload["rule_se"]) == 3


def test_fit_dry_run_prints_nothing(capsys, class_csv):
    code, out, _ = _run(capsys, ["fit", "--data", str(class_csv), "--dry-run"])
    assert code == 0
    assert out == ""


def test_ci_fixed_matches_library_call(capsys, mixture_csv):
    code, out, _ = _run(
        capsys,
        ["ci", "--data", str(mixture_csv), "--method", "fixed",
         "--beta=-0.125,0.25", "--alpha", "0.1"],
    )
    assert code == 0
    payload = json.loads(out)
    data = parse_class_dataset(mixture_csv)
    iv = fixed_beta_interval(data, [-0.125, 0.25], 0.10)
    assert payload["lo"] == iv.lo
    assert payload["hi"] == iv.hi
    assert payload["level"] == 0.9
    assert payload["n"] == 40
    assert payload["target"] == "misclass_rate_at_beta"


def test_ci_fixed_requires_beta(capsys, mixture_csv):
    code, _, err = _run(capsys, ["ci", "--data", str(mixture_csv), "--method", "fixed"])
    assert code == 2
    assert "--beta" in err


def test_ci_rejects_unknown_method(mixture_csv):
    with pytest.raises(SystemExit) as excinfo:
        main(["ci", "--data", str(mixture_csv), "--method", "percentile"])
    assert excinfo.value.code == 2


def test_ci_method_dataset_kind_mismatch(capsys, mixture_csv, decision_csv):
    code, _, err = _run(
        capsys, ["ci", "--data", str(mixture_csv), "--method", "value-bound"]
    )
    assert code == 2
    assert "needs a decision dataset" in err
    code, _, err = _run(
        capsys,
        ["ci", "--data", str(decision_csv), "--method", "fixed", "--beta", "0,1"],
    )
    assert code == 2
    assert "needs a classification dataset" in err


def test_ci_exit_3_on_degenerate_design(capsys, tmp_path):
    path = tmp_path / "flat.csv"
    path.write_text("x1,y\n" + "".join(f"2.0,{s}\n" for s in ("1", "-1") * 4))
    code, _, err = _run(
        capsys, ["ci", "--data", str(path), "--method", "bound", "--B", "100"]
    )
    assert code == 3
    assert "estimation failed" in err


def test_ci_bound_writes_diagnostics(capsys, mixture_csv, tmp_path):
    out = tmp_path / "diag"
    code, stdout, _ = _run(
        capsys,
        ["ci", "--data", str(mixture_csv), "--method", "bound", "--B", "100",
         "--seed", "1", "--out", str(out)],
    )
    assert code == 0
    payload = json.loads(stdout)
    assert payload["target"] == "fitted_rule_misclass_rate"
    assert payload["diagnostics"]["draws"] + payload["diagnostics"]["skipped"] == 100
    lines = (out / "draws_bound.csv").read_text().splitlines()
    assert lines[0] == "# schema=1"
    assert len(lines) == 2 + 100


def test_ci_value_bound_on_decision_data(capsys, decision_csv, tmp_path):
    out = tmp_path / "vdiag"
    code, stdout, _ = _run(
        capsys,
        ["ci", "--data", str(decision_csv), "--method", "value-bound", "--B", "100",
         "--seed", "2", "--out", str(out)],
    )
    assert code == 0
    payload = json.loads(stdout)
    assert payload["target"] == "fitted_rule_value"
    assert payload["diagnostics"]["value_scale"] > 0
    header = (out / "draws_value-bound.csv").read_text().splitlines()[1]
    assert header.endswith("value_scale")


def test_ci_flag_overrides_config(capsys, mixture_csv, tmp_path):
    cfg = tmp_path / "ci.json"
    cfg.write_text(json.dumps({"alpha": 0.5}))
    base = ["ci", "--data", str(mixture_csv), "--method", "fixed", "--beta", "0,1"]
    _, narrow, _ = _run(capsys, base + ["--config", str(cfg)])
    _, wide, _ = _run(capsys, base + ["--config", str(cfg), "--alpha", "0.05"])
    assert json.loads(narrow)["level"] == 0.5
    assert json.loads(wide)["level"] == 0.95


def test_seed_env_flag_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"model": MIX_CFG, "n": 20}))

    def run(out, extra):
        assert main(["simulate", "--config", str(cfg), "--out", str(out)] + extra) == 0
        capsys.readouterr()
        return (out / "dataset.csv").read_bytes()

    flagged = run(tmp_path / "a", ["--seed", "99"])
    monkeypatch.setenv("NONREG_SEED", "99")
    assert run(tmp_path / "b", []) == flagged
    monkeypatch.setenv("NONREG_SEED", "100")
    assert run(tmp_path / "c", []) != flagged
    assert run(tmp_path / "d", ["--seed", "99"]) == flagged


def test_bad_seed_env_is_a_validation_error(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"model": MIX_CFG, "n": 20}))
    monkeypatch.setenv("NONREG_SEED", "lots")
    code, _, err = _run(capsys, ["simulate", "--config", str(cfg), "--out", str(tmp_path / "e")])
    assert code == 2
    assert "NONREG_SEED" in err


def test_simulate_file_matches_first_study_replication(capsys, tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"model": MIX_CFG, "n": 25, "seed": 6}))
    out = tmp_path / "s"
    code, stdout, _ = _run(capsys, ["simulate", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    assert "25 rows" in stdout
    parsed = parse_class_dataset(out / "dataset.csv")
    model = model_from_config(MIX_CFG)
    direct = model.sample(25, spawn(6, 1, 0, 0))
    assert np.array_equal(parsed.X, direct.X)
    assert np.array_equal(parsed.y, direct.y)


def test_simulate_dry_run_writes_nothing(capsys, tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"model": MIX_CFG, "n": 20}))
    out = tmp_path / "dry"
    code, _, _ = _run(capsys, ["simulate", "--config", str(cfg), "--out", str(out), "--dry-run"])
    assert code == 0
    assert not out.exists()


def test_simulate_needs_model_and_n(capsys, tmp_path):
    cfg = tmp_path / "nomodel.json"
    cfg.write_text(json.dumps({"n": 20}))
    code, _, err = _run(capsys, ["simulate", "--config", str(cfg)])
    assert code == 2
    assert "model" in err
    cfg2 = tmp_path / "non.json"
    cfg2.write_text(json.dumps({"model": MIX_CFG}))
    code, _, err = _run(capsys, ["simulate", "--config", str(cfg2)])
    assert code == 2
    assert "--n" in err


def test_interaction_columns_narrow_the_rule_block(capsys, decision_csv, tmp_path):
    cfg = tmp_path / "narrow.json"
    cfg.write_text(json.dumps({"data": {"interaction_columns": ["x1"]}}))
    code, out, _ = _run(
        capsys, ["fit", "--data", str(decision_csv), "--config", str(cfg)]
    )
    assert code == 0
    assert len(json.loads(out)["rule_coef"]) == 2


def test_histogram_writes_one_csv_per_model(capsys, tmp_path):
    cfg = tmp_path / "hist.json"
    cfg.write_text(
        json.dumps(
            {
                "models": [MIX_CFG, {"model": "local", "c": 1.0}],
                "sizes": [12],
                "replications": 3,
                "seed": 2,
            }
        )
    )
    out = tmp_path / "hist"
    code, stdout, _ = _run(capsys, ["histogram", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    mix = out / "draws_mixture-delta0.25.csv"
    loc = out / "draws_local-c1.0.csv"
    assert mix.exists() and loc.exists()
    assert mix.read_text().splitlines()[0] == "# schema=1"
    assert len(mix.read_text().splitlines()) == 2 + 2 * 3
    assert "mixture-delta0.25" in stdout
    assert "local-c1.0" in stdout
    assert "iqr_misclass" in stdout


def test_coverage_run_and_dry_run(capsys, tmp_path):
    cfg = tmp_path / "cov.json"
    cfg.write_text(
        json.dumps(
            {
                "model": MIX_CFG,
                "sizes": [16],
                "replications": 2,
                "methods": ["fixed"],
                "seed": 4,
            }
        )
    )
    out = tmp_path / "cov"
    code, stdout, _ = _run(
        capsys, ["coverage", "--config", str(cfg), "--out", str(out), "--dry-run"]
    )
    assert code == 0
    assert stdout.strip() == "config ok"
    assert not out.exists()

    code, stdout, _ = _run(capsys, ["coverage", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    assert (out / "coverage.csv").exists()
    report = json.loads((out / "coverage.json").read_text())
    assert report["schema"] == 1
    assert report["rows"][0]["method"] == "fixed"
    assert "coverage" in stdout


def test_blocked_out_path_fails_before_the_study(capsys, tmp_path):
    cfg = tmp_path / "cov.json"
    cfg.write_text(
        json.dumps(
            {"model": MIX_CFG, "sizes": [16], "replications": 1, "methods": ["fixed"]}
        )
    )
    blocker = tmp_path / "taken"
    blocker.write_text("file, not a directory")
    code, _, err = _run(capsys, ["coverage", "--config", str(cfg), "--out", str(blocker)])
    assert code == 2
    assert "error" in err


def test_bad_config_reports_exit_2(capsys, tmp_path, mixture_csv):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = _run(capsys, ["coverage", "--config", str(bad)])
    assert code == 2
    assert "not valid JSON" in err

    unknown = tmp_path / "unknown.json"
    unknown.write_text(
        json.dumps({"model": MIX_CFG, "sizes": [16], "replications": 1, "modle": 1})
    )
    code, _, err = _run(capsys, ["coverage", "--config", str(unknown)])
    assert code == 2
    assert "unknown config keys" in err

    code, _, err = _run(capsys, ["fit", "--data", str(tmp_path / "absent.csv")])
    assert code == 2
    assert "cannot read data" in err

    code, _, err = _run(
        capsys,
        ["ci", "--data", str(mixture_csv), "--method", "fixed", "--beta", "a,b"],
    )
    assert code == 2
    assert "comma-separated" in err
