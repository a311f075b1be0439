import inspect
import json
from pathlib import Path

import pytest

import cavityring
from cavityring.exceptions import InvalidInputError, OutputError
from cavityring.output import sha256_text, write_atomic
from cavityring.run_config import load_run_config
from cavityring.sweep import MANIFEST_NAME, SweepPoint, grid_points, run_sweep

RUN_CONFIGS = Path(__file__).parent / "run_configs"


@pytest.fixture
def grid_run():
    return load_run_config(RUN_CONFIGS / "sweep_grid.json")


def test_grid_points_are_g_major(grid_run):
    points = grid_points(grid_run)
    assert [(p.g, p.chi, p.gamma) for p in points] == [
        (1.0, 0.0, 0.5),
        (1.0, 1.0, 0.5),
        (2.0, 0.0, 0.5),
        (2.0, 1.0, 0.5),
    ]


def test_grid_needs_a_sweep_section():
    with pytest.raises(InvalidInputError):
        grid_points(load_run_config(RUN_CONFIGS / "base_system.yaml"))


def test_point_file_names():
    assert SweepPoint(g=1.0, chi=0.0, gamma=0.5).filename("csv") == "g1_chi0_gamma0.5.csv"
    assert SweepPoint(g=0.25, chi=-0.0, gamma=2.0).filename("json") == "g0.25_chi0_gamma2.json"


def test_sweep_writes_files_and_manifest(grid_run, tmp_path):
    entries = run_sweep(grid_run, tmp_path)
    assert len(entries) == 4
    manifest = json.loads((tmp_path / MANIFEST_NAME).read_text())
    assert manifest["command"] == "evolve"
    assert [entry["file"] for entry in manifest["entries"]] == [entry.file for entry in entries]
    for entry in manifest["entries"]:
        text = (tmp_path / entry["file"]).read_text()
        assert text.startswith("tau,x,y,u,w,S,ground\n")
        assert len(text.splitlines()) == 52
        assert entry["sha256"] == sha256_text(text)
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted([MANIFEST_NAME] + [e.file for e in entries])


def test_sweep_is_deterministic_and_worker_independent(grid_run, tmp_path):
    run_sweep(grid_run, tmp_path / "serial")
    run_sweep(grid_run, tmp_path / "again")
    run_sweep(grid_run, tmp_path / "parallel", jobs=2)
    for name in ["g1_chi0_gamma0.5.csv", "g2_chi1_gamma0.5.csv", MANIFEST_NAME]:
        serial = (tmp_path / "serial" / name).read_bytes()
        assert (tmp_path / "again" / name).read_bytes() == serial
        assert (tmp_path / "parallel" / name).read_bytes() == serial


def test_spectrum_sweep(tmp_path):
    run = load_run_config(RUN_CONFIGS / "sweep_spectrum.yaml")
    entries = run_sweep(run, tmp_path)
    assert [entry.file for entry in entries] == ["g1_chi0.5_gamma0.json", "g2_chi0.5_gamma0.json"]
    document = json.loads((tmp_path / "g2_chi0.5_gamma0.json").read_text())
    assert len(document["levels"]) == 2
    assert all(level["deviation"] <= 1e-10 for level in document["levels"])


def test_unwritable_directory(grid_run, tmp_path, mocker):
    mocker.patch("cavityring.sweep.os.access", return_value=False)
    with pytest.raises(OutputError):
        run_sweep(grid_run, tmp_path / "out")
    assert list((tmp_path / "out").iterdir()) == []


def test_failed_write_removes_partial_results(grid_run, tmp_path, mocker):
    calls = []

    def flaky(target, text):
        calls.append(target)
        if len(calls) == 3:
            raise OutputError(f"Cannot write {target}: disk full")
        return write_atomic(target, text)

    mocker.patch("cavityring.sweep.write_atomic", side_effect=flaky)
    with pytest.raises(OutputError):
        run_sweep(grid_run, tmp_path)
    assert list(tmp_path.iterdir()) == []


def test_jobs_must_be_positive(grid_run, tmp_path):
    with pytest.raises(InvalidInputError):
        run_sweep(grid_run, tmp_path, jobs=0)


def test_sweep_module_is_not_shadowed_by_the_command():
    assert inspect.ismodule(cavityring.sweep)
    assert cavityring.sweep.run_sweep is run_sweep
    assert cavityring.cli.get_command(None, "sweep").name == "sweep"
