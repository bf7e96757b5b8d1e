import json
import math

import pytest
from pydantic import ValidationError
from sqlmodel import select

from vortexsheet import db
from vortexsheet.config import Config
from vortexsheet.errors import (
    ComputationFailure,
    ConfigError,
    InvariantSuiteFailure,
    JacobianViolation,
    MachRangeError,
    StepSizeError,
    ValidationFailure,
)
from vortexsheet.models import RunRecord, SystemLog
from vortexsheet.schemas import EvolveSettings, IllposedSettings, RunConfig, ShearState
from vortexsheet.storage import ArtifactStore, format_cell


# config

def test_missing_file_falls_back_to_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv("VORTEXSHEET_OUT_DIR", raising=False)
    cfg = Config(str(tmp_path / "absent.toml"))
    assert cfg.get("state.sound_speed") is None
    assert cfg.log_level == "INFO"
    assert cfg.out_dir == "results"
    assert cfg.ledger_enabled is True
    assert cfg.ledger_db_file == "results/ledger.db"
    assert cfg.section("state") == {}


def test_state_values_come_only_from_sections(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("[state]\neps0 = 0.2\n")
    cfg = Config(str(path))
    assert cfg.section("state") == {"eps0": 0.2}
    for name in ("sound_speed", "eps0", "angle", "output_format", "app_name"):
        assert not hasattr(cfg, name)


def test_required_file_must_exist(tmp_path):
    with pytest.raises(ConfigError):
        Config(str(tmp_path / "absent.toml"), required=True)


def test_invalid_toml(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[state\nsound_speed = 1\n")
    with pytest.raises(ConfigError):
        Config(str(bad))


def test_dotted_lookup(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('[state]\nsound_speed = 2.5\n[illposed]\nj = 4\n')
    cfg = Config(str(path))
    assert cfg.get("state.sound_speed") == 2.5
    assert cfg.get("state.missing", 7) == 7
    assert cfg.section("illposed") == {"j": 4}
    section = cfg.section("illposed")
    section["j"] = 9
    assert cfg.get("illposed.j") == 4


def test_out_dir_environment_override(tmp_path, monkeypatch):
    path = tmp_path / "run.toml"
    path.write_text('[output]\nout_dir = "from-file"\n')
    monkeypatch.setenv("VORTEXSHEET_OUT_DIR", "from-env")
    assert Config(str(path)).out_dir == "from-env"


# schemas

def test_evolve_half_width_defaults_to_forty_over_eta():
    assert EvolveSettings(eta=4.0).half_width == 10.0
    assert EvolveSettings(eta=4.0, grid_l=3.0).half_width == 3.0


def test_illposed_orders_validated():
    with pytest.raises(ValidationError):
        IllposedSettings(j=3, k=4)
    with pytest.raises(ValidationError):
        IllposedSettings(j=2, k=2)
    with pytest.raises(ValidationError):
        IllposedSettings(band_min=5, band_max=4)


def test_run_config_rejects_bad_state():
    with pytest.raises(ValidationError) as info:
        RunConfig.model_validate({"subcommand": "roots", "state": {"sound_speed": -1.0}})
    assert ("state", "sound_speed") in [e["loc"] for e in info.value.errors()]


def test_shear_state_mach():
    state = ShearState.from_mach(0.7, sound_speed=3.0)
    assert state.shear_velocity == pytest.approx(2.1)
    assert state.mach == pytest.approx(0.7)


# errors

@pytest.mark.parametrize(
    "error, code",
    [
        (ValidationFailure("x"), 1),
        (ConfigError("x"), 1),
        (MachRangeError("x"), 1),
        (StepSizeError("x"), 1),
        (ComputationFailure("x"), 2),
        (JacobianViolation("x"), 2),
        (InvariantSuiteFailure("x"), 3),
    ],
)
def test_exit_codes(error, code):
    assert error.exit_code == code


def test_suite_failure_keeps_artifacts():
    error = InvariantSuiteFailure("failed", ["a.json"])
    assert error.artifacts == ["a.json"]


# storage

def test_format_cell():
    assert format_cell(0.1) == "0.10000000000000001"
    assert format_cell(math.nan) == "nan"
    assert format_cell(-math.inf) == "-inf"
    assert format_cell(3) == "3"
    assert format_cell(True) == "true"
    assert format_cell(None) == ""


def test_csv_artifact(tmp_path):
    store = ArtifactStore(str(tmp_path))
    path = store.write_csv("table.csv", ["a", "b"], [{"a": 1, "b": 0.5}, {"a": 2, "b": math.nan}])
    assert path.read_text() == "a,b\n1,0.5\n2,nan\n"
    assert [p.name for p in tmp_path.iterdir()] == ["table.csv"]


def test_json_artifact_is_strict_and_sorted(tmp_path):
    store = ArtifactStore(str(tmp_path))
    path = store.write_json("doc.json", {"b": math.nan, "a": [1.0, math.inf]})
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1.0, None], "b": None}


def test_identical_rewrite_leaves_file_untouched(tmp_path):
    store = ArtifactStore(str(tmp_path))
    path = store.write_json("doc.json", {"x": 1})
    stamp = path.stat().st_mtime_ns
    store.write_json("doc.json", {"x": 1})
    assert path.stat().st_mtime_ns == stamp
    store.write_json("doc.json", {"x": 2})
    assert json.loads(path.read_text()) == {"x": 2}


def test_table_formats(tmp_path):
    store = ArtifactStore(str(tmp_path))
    rows = [{"n": 1, "v": 0.25, "extra": "dropped"}]
    assert store.write_table("t", ["n", "v"], rows).name == "t.csv"
    as_json = store.write_table("t", ["n", "v"], rows, "json")
    assert json.loads(as_json.read_text()) == [{"n": 1, "v": 0.25}]
    with pytest.raises(ValidationFailure):
        store.write_table("t", ["n"], rows, "xml")


@pytest.mark.parametrize("name", ["", "../escape.csv", "/abs/path.csv"])
def test_artifact_names_stay_inside_out_dir(tmp_path, name):
    with pytest.raises(ValidationFailure):
        ArtifactStore(str(tmp_path)).path_for(name)


# ledger

def test_events_are_not_persisted_without_ledger():
    assert not db.ledger_enabled()
    db.log_system_event("INFO", "nothing to store", "test")
    assert db.start_run("roots", "0" * 64) is None


def test_run_lifecycle(memory_ledger):
    run_id = db.start_run("roots", "ab" * 32)
    assert run_id is not None
    db.log_system_event("warning", "inside the run", "symbol")
    db.finish_run(run_id, 2, ["out/a.csv", "out/b.json"])
    db.log_system_event("INFO", "after the run", "cli")

    with db.get_session() as session:
        record = session.get(RunRecord, run_id)
        events = session.exec(select(SystemLog).order_by(SystemLog.id)).all()
    assert record.exit_code == 2
    assert record.artifacts.split("\n") == ["out/a.csv", "out/b.json"]
    assert record.finished_at is not None
    assert [(e.level, e.component, e.run_id) for e in events] == [
        ("WARNING", "symbol", run_id),
        ("INFO", "cli", None),
    ]


def test_file_ledger_creates_parent_directory(tmp_path):
    db_file = tmp_path / "nested" / "ledger.db"
    db.configure_ledger(f"sqlite:///{db_file.as_posix()}")
    assert db.start_run("verify", "cd" * 32) is not None
    assert db_file.exists()
