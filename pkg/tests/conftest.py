import pytest

from vortexsheet import db
from vortexsheet.schemas import ShearState


@pytest.fixture(autouse=True)
def no_ledger():
    """Keep test runs out of the on-disk ledger."""
    db.configure_ledger(None)
    yield
    db.configure_ledger(None)


@pytest.fixture
def memory_ledger():
    db.configure_ledger("sqlite://")
    db.init_database()
    yield
    db.configure_ledger(None)


@pytest.fixture
def unit_state():
    """c = 1, v = 1: Mach 1, where X1^2 = sqrt(5) - 2."""
    return ShearState(sound_speed=1.0, shear_velocity=1.0)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.delenv("VORTEXSHEET_OUT_DIR", raising=False)
    monkeypatch.delenv("VORTEXSHEET_CONFIG", raising=False)
    return tmp_path / "results"
