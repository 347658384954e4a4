import dataclasses
import subprocess
import sys

import pytest

from randlam import analytics, rng
from randlam.cli import main
from randlam.experiments import (
    RunConfig,
    cmd_converge,
    cmd_dimension,
    cmd_mean_table,
    cmd_render,
    cmd_selftest,
    cmd_simulate,
    digest,
    dyadic_schedule,
)


def test_streams_are_keyed_and_prefix_stable():
    a = rng.selfsimilar_pairs(7, 3, 100)
    assert (rng.selfsimilar_pairs(7, 3, 40) == a[:40]).all()
    assert not (rng.selfsimilar_pairs(7, 4, 100) == a).all()
    assert not (rng.selfsimilar_pairs(8, 3, 100) == a).all()


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(n_trials=0)
    with pytest.raises(ValueError):
        RunConfig(mode="fast")


def test_simulate_writes_files(tmp_path):
    files = cmd_simulate(RunConfig(n_trials=500, replicates=2, out=tmp_path), replay=True)
    for name in ("summary.csv", "lamination.csv", "lamination.svg", "height.csv",
                 "height.svg", "snapshot.csv", "replay.csv", "manifest.txt"):
        assert (tmp_path / name).read_text() == files[name]
    manifest = dict(line.split("=", 1) for line in files["manifest.txt"].splitlines())
    assert manifest["sha256:summary.csv"] == digest(files["summary.csv"])
    assert manifest["mode"] == "self-similar"


def test_homogeneous_simulate_counts_every_chord():
    files = cmd_simulate(RunConfig(mode="homogeneous", n_trials=1000))
    row = files["summary.csv"].splitlines()[1].split(",")
    assert row[2] == "1000"


@pytest.mark.parametrize("run", [
    lambda c: cmd_simulate(c),
    lambda c: cmd_converge(dataclasses.replace(c, schedule=(100, 400))),
    lambda c: cmd_converge(dataclasses.replace(c, mode="homogeneous", schedule=(100, 400))),
    lambda c: cmd_dimension(dataclasses.replace(c, depth=8, grid=2048)),
])
def test_outputs_independent_of_workers(run):
    base = RunConfig(n_trials=400, replicates=6, depth=6, grid=257, seed=5)
    one = run(dataclasses.replace(base, workers=1))
    many = run(dataclasses.replace(base, workers=8))
    for name in one:
        if name.endswith(".csv") or name.endswith(".svg"):
            assert one[name] == many[name], name


def test_unwritable_output_reports_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        cmd_simulate(RunConfig(n_trials=10, out=blocker / "sub"))


def test_dyadic_schedule():
    assert dyadic_schedule(1000) == (100, 200, 400, 800)


def test_mean_table_csv(tmp_path):
    text = cmd_mean_table([1, 2], tmp_path)
    lines = text.splitlines()
    assert lines[0] == "n,mu_selfsim,mu_homog,c_n_beta_half,residual"
    assert float(lines[1].split(",")[1]) == pytest.approx(1 / 3)
    assert (tmp_path / "mean_table.csv").read_text() == text


def test_render_round_trip(tmp_path):
    cmd_simulate(RunConfig(n_trials=300, out=tmp_path))
    svg = cmd_render(tmp_path / "lamination.csv", tmp_path / "again.svg")
    assert svg == (tmp_path / "lamination.svg").read_text()
    cmd_render(tmp_path / "height.csv")
    assert (tmp_path / "height.svg").exists()


def test_selftest_passes_and_detects_perturbation():
    assert cmd_selftest().ok
    bad = dataclasses.replace(analytics.constants(), c=analytics.constants().c + 1e-6)
    report = cmd_selftest(bad)
    assert not report.ok
    assert any(line.startswith("FAIL constants") for line in report.lines())


def test_cli_selftest_and_simulate(tmp_path, capsys):
    assert main(["selftest"]) == 0
    assert main(["simulate", "--n", "200", "--seed", "3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "summary.csv").exists()
    assert main(["simulate", "--n", "0", "--out", str(tmp_path)]) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "randlam", "mean-table", "--n", "10"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith("n,mu_selfsim")
