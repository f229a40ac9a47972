"""
Integration tests for the kinchem command line
"""
import json

import numpy as np
import pytest

from main import main
from models.config import GridParams, ModelParams, OutputParams, TimeParams
import problem_details
from problem_details import ConfigError
from services import persistence
from services.runner import SimulationRunner
from tests.conftest import small_config


def _problem(err: str) -> dict:
    """The problem record is the last JSON document on stderr."""
    return json.loads(err[err.rindex('{\n  "type"'):])


def _write_config(path, config):
    path.write_text(config.model_dump_json(indent=2), encoding="utf-8")
    return path


def test_gamma_star_command(capsys):
    assert main(["gamma-star"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["gamma_star"] == pytest.approx(0.639, abs=5e-3)
    assert data["value"] == pytest.approx(0.806, abs=5e-3)


def test_missing_command_is_a_usage_error():
    assert main([]) == 1


def test_unknown_command_prints_a_problem(capsys):
    assert main(["frobnicate"]) == 1
    problem = _problem(capsys.readouterr().err)
    assert problem["status"] == 1
    assert problem["code"] == "USAGE"


def test_thresholds_command(capsys):
    assert main(["thresholds", "--model", "ball", "--chi0", "1", "--R", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["M_critical"] == 32.0


def test_thresholds_with_degradation(capsys):
    code = main(["thresholds", "--alpha", "0.1", "--mass", "64", "--I0", "0.5", "--mu0", "1"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["alpha_criterion"] is not None


def test_empty_preset_looks_global(tmp_path, capsys):
    assert main(["preset", "empty", "--out", str(tmp_path)]) == 0
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["verdict"]["verdict"] == "global-looking"
    assert manifest["schema"] == "kinchem/1"
    rows = persistence.read_csv(tmp_path / "diagnostics.csv")
    assert all(row["M"] == 0.0 for row in rows)
    assert (tmp_path / "manifest.json").exists()


def test_preset_show(capsys):
    assert main(["preset", "supercritical-disk", "--show"]) == 0
    assert json.loads(capsys.readouterr().out)["initial"]["mass"] == 64.0


def test_unknown_preset():
    assert main(["preset", "nope"]) == 1


def test_invalid_config_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "initial": {"family": "uniform-disk", "mass": -1.0}\n}\n')
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "out")]) == 1
    problem = _problem(capsys.readouterr().err)
    assert problem["code"] == "CONFIG_INVALID"
    assert problem["errors"][0]["line"] == 2


def test_runs_are_byte_reproducible(tmp_path, capsys):
    config_path = _write_config(tmp_path / "run.json", small_config())
    for name in ("a", "b"):
        assert main(["simulate", "--config", str(config_path), "--out", str(tmp_path / name)]) == 0
    capsys.readouterr()
    assert (tmp_path / "a" / "diagnostics.csv").read_bytes() == (tmp_path / "b" / "diagnostics.csv").read_bytes()


def test_resume_matches_an_uninterrupted_run(tmp_path, capsys):
    config = small_config(output=OutputParams(cadence=5, checkpoint_every=2))
    full = SimulationRunner(config, tmp_path / "full").run()
    first = sorted((tmp_path / "full").glob("checkpoint-0*.txt"))[0]

    resumed = SimulationRunner(config).run(resume=persistence.load_checkpoint(first))
    assert resumed.state.t == full.state.t
    assert np.array_equal(resumed.state.g, full.state.g)
    assert resumed.state.outflow == full.state.outflow

    config_path = _write_config(tmp_path / "run.json", config)
    assert main(["simulate", "--config", str(config_path), "--resume", str(first), "--out", str(tmp_path / "cli")]) == 0
    capsys.readouterr()


def test_resume_rejects_a_foreign_checkpoint(tmp_path):
    other = small_config()
    checkpoint = persistence.save_checkpoint(
        tmp_path / "c.txt", SimulationRunner(small_config(mass=1.0)).run().state
    )
    config = other.model_copy(update={"grid": other.grid.model_copy(update={"Nr": 64})})
    config_path = _write_config(tmp_path / "run.json", config)
    assert main(["simulate", "--config", str(config_path), "--resume", str(checkpoint), "--out", str(tmp_path / "out")]) == 1


def test_problem_table_matches_the_error_exit_codes():
    """Blow-up is a run outcome, never a problem record"""
    pending = list(problem_details.KinchemError.__subclasses__())
    codes = {problem_details.KinchemError.exit_code}
    while pending:
        cls = pending.pop()
        codes.add(cls.exit_code)
        pending.extend(cls.__subclasses__())
    assert set(problem_details.PROBLEMS) == codes
    assert problem_details.EXIT_BLOWUP not in codes


def test_resume_checks_the_speed_count():
    state = SimulationRunner(small_config()).run().state
    other = small_config(grid=GridParams(Nr=32, Nw=6, Nphi=16, r_max=4.0))
    with pytest.raises(ConfigError):
        SimulationRunner(other).run(resume=state)


def test_circle_resume_ignores_the_speed_node_setting():
    """The circle carries one speed whatever Nw says"""
    circle = ModelParams(velocity_set="sphere")
    half = SimulationRunner(small_config(model=circle, time=TimeParams(t_end=0.05))).run().state
    config = small_config(model=circle, time=TimeParams(t_end=0.1), grid=GridParams(Nr=32, Nw=6, Nphi=16, r_max=4.0))
    resumed = SimulationRunner(config).run(resume=half)
    assert resumed.state.vset.n_speeds == 1
    assert resumed.state.t == pytest.approx(0.1)


@pytest.mark.slow
def test_supercritical_preset_suspects_blowup(tmp_path, capsys):
    assert main(["preset", "supercritical-disk", "--out", str(tmp_path)]) == 2
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["verdict"]["verdict"] == "blow-up suspected"
    assert manifest["virial"]["delta"] > 0
    assert manifest["virial"]["holds"]


@pytest.mark.slow
def test_subcritical_preset_looks_global(tmp_path, capsys):
    assert main(["preset", "subcritical-comparison", "--out", str(tmp_path)]) == 0
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["verdict"]["verdict"] == "global-looking"
    rows = persistence.read_csv(tmp_path / "diagnostics.csv")
    assert all(row["excess"] <= 0.0 for row in rows)
    norms = [key for key in rows[0] if key.startswith("norm_")]
    assert norms
    for key in norms:
        assert rows[-1][key] < rows[0][key]
