import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ladm import AdmissibleClass, OrthonormalBasis, dominant_basis
from ladm.experiments import (
    CurveSet,
    preset_config,
    run_figure,
    step_analysis,
    summary_table,
    validity_pairs,
    verify_outputs,
)
from ladm.io import read_matrix
from tests.conftest import make_class, random_subspace


@pytest.fixture(scope="module")
def fig1_small(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1")
    cfg = preset_config(1, scale="desk", seed=0, q_max=12, out_dir=out)
    curves = run_figure(cfg)
    return out, curves


# ---------------------------------------------------------------- step analysis


def test_step_analysis_constant_sequence(rng):
    cls = make_class(seed=0)
    V = random_subspace(rng, 60, cls.h)
    rows = step_analysis([V, V, V], cls)
    assert all(r.step_len < 1e-12 for r in rows)
    assert all(abs(r.paso1_lhs) < 1e-12 for r in rows)


def test_step_analysis_jump_to_eigenspace(rng):
    cls = make_class(seed=1)
    V0 = random_subspace(rng, 60, cls.h)
    V1 = dominant_basis(cls.model, cls.h)
    rows = step_analysis([V0, V1], cls)
    assert rows[0].paso1_lhs <= rows[0].step_len + 1e-9


# ---------------------------------------------------------------- curve output


def test_run_writes_expected_files(fig1_small):
    out, curves = fig1_small
    for m in (1, 2, 3):
        assert (out / f"fig1_plot{m}.csv").exists()
    assert (out / "fig1_meta.txt").exists()
    assert (out / "fig1_summary.csv").exists()
    assert curves.violations() == 0


def test_emitted_sines_clamped(fig1_small):
    out, curves = fig1_small
    for plot in ("plot1", "plot2"):
        columns, rows = curves.plots[plot]
        for i, col in enumerate(columns):
            if col == "q" or col.startswith("dim"):
                continue
            vals = np.array([row[i] for row in rows])
            vals = vals[np.isfinite(vals)]
            if col.startswith(("d_", "witness_", "bound_", "sum_")):
                assert np.all(vals <= 1.0 + 1e-12)


def test_summary_mentions_never_crossed(fig1_small):
    _, curves = fig1_small
    text = summary_table(curves)
    assert "—" in text  # at 12 iterations nothing reaches 1e-8
    assert text.splitlines()[-1].startswith("violations,total,0")


def test_validity_pairs_mapping():
    cols = ["q", "witness_h_wq", "sum_bound_wq", "bound_filter_p5_5", "witness_filter_p5_5",
            "bound_amd3_wq", "witness_r_wq"]
    pairs = validity_pairs(cols)
    assert ("sum_bound_wq", "witness_h_wq") in pairs
    assert ("bound_filter_p5_5", "witness_filter_p5_5") in pairs
    assert ("bound_amd3_wq", "witness_r_wq") in pairs


def test_verify_outputs_counts(fig1_small, tmp_path):
    out, _ = fig1_small
    checked, violations = verify_outputs(out)
    assert checked > 0 and violations == 0
    # corrupt one measured value above its bound and expect a hit
    victim = out / "fig1_plot2.csv"
    lines = victim.read_text().splitlines()
    header = lines[0].split(",")
    row = lines[1].split(",")
    row[header.index("witness_h_vq")] = "2.0"
    row[header.index("bound_amd1_vq")] = "0.5"
    bad_dir = tmp_path / "bad"
    bad_dir.mkdir()
    (bad_dir / "fig9_plot2.csv").write_text("\n".join([lines[0], ",".join(row)]) + "\n")
    _, violations = verify_outputs(bad_dir)
    assert violations == 1


def test_determinism_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_figure(preset_config(2, scale="desk", seed=7, q_max=6, out_dir=a))
    run_figure(preset_config(2, scale="desk", seed=7, q_max=6, out_dir=b))
    for f in sorted(a.iterdir()):
        assert (b / f.name).read_bytes() == f.read_bytes()


def test_preset_validation():
    with pytest.raises(ValueError):
        preset_config(6)
    with pytest.raises(ValueError):
        preset_config(1, scale="galactic")


# ---------------------------------------------------------------- CLI surface


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "ladm.cli", *args],
                          capture_output=True, text=True)


def test_cli_run_verify_roundtrip(tmp_path):
    out = tmp_path / "run"
    res = run_cli("run", "--preset", "fig1", "--scale", "desk", "--seed", "3",
                  "--q-max", "5", "--out", str(out))
    assert res.returncode == 0, res.stderr
    res = run_cli("verify", "--out", str(out))
    assert res.returncode == 0, res.stderr
    assert "0 violations" in res.stdout


def test_cli_gen_matrix(tmp_path):
    cfg = tmp_path / "spec.cfg"
    cfg.write_text("\n".join([
        "n = 40", "j = 2", "h = 4", "k = 8",
        "decay.kind = exponential", "decay.params = 10.0,0.01",
        "delta = 1e-3", "seed = 5",
    ]) + "\n")
    out = tmp_path / "A.bin"
    res = run_cli("gen-matrix", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0, res.stderr
    A = read_matrix(out)
    assert A.shape == (40, 40)
    assert np.allclose(A, A.T)


def test_cli_run_from_config(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("\n".join([
        "n = 60", "j = 3", "h = 6", "k = 12",
        "decay.kind = exponential", "decay.params = 10.0,0.01",
        "delta = 1e-2", "seed = 2",
        "method = sim", "r = 8", "q_max = 4", "splits = 0:2;1:1",
    ]) + "\n")
    out = tmp_path / "out"
    res = run_cli("run", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0, res.stderr
    header = (out / "fig0_plot1.csv").read_text().splitlines()[0]
    assert "bound_filter_p0_2" in header and "bound_filter_p1_1" in header


def test_cli_verify_flags_violation(tmp_path):
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "fig1_plot2.csv").write_text(
        "q,witness_h_vq,bound_amd1_vq\n0,0.9,0.1\n")
    res = run_cli("verify", "--out", str(bad))
    assert res.returncode == 2


def test_cli_error_exit_code(tmp_path):
    res = run_cli("gen-matrix", "--config", str(tmp_path / "missing.cfg"),
                  "--out", str(tmp_path / "x.bin"))
    assert res.returncode == 1
