import json
import subprocess
import sys

import numpy as np
import pytest

from annealdyn.cli import main
from annealdyn.io import read_csv


def write_cfg(path, **doc):
    base = {"model": [[3, 1.0]], "schedule": {"kind": "quench", "tau": 10}, "grid": {"dt": 0.1}}
    base.update(doc)
    path.write_text(json.dumps(base))
    return str(path)


def test_run_outputs(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json", output_dir=str(tmp_path / "out"))
    assert main(["run", "--config", cfg]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["tau"] == 10 and summary["dt"] == 0.1 and "z_final" in summary
    trace = read_csv(tmp_path / "out" / "trace.csv")
    assert list(trace) == ["t", "s", "z", "epsilon", "constraint_residual"]
    assert trace["epsilon"][-1] == summary["epsilon_final"]
    assert "epsilon_final=" in capsys.readouterr().out


def test_run_quench_example(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", schedule={"kind": "quench", "tau": 50})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["epsilon_final"] < -1.0


def test_run_free_noise_zero_energy(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", schedule={"kind": "zero", "tau": 5})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["epsilon_final"] == 0.0


def test_keldysh_run_and_kernel_dump(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", schedule={"kind": "anneal", "tau": 2}, solver="keldysh")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o"), "--dump-kernels"]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert "z_final" not in summary
    assert "A" in read_csv(tmp_path / "o" / "trace.csv")
    dump = np.load(tmp_path / "o" / "kernels.npz")
    n = int(dump["n"])
    assert dump["C"].shape == (n * (n + 1) // 2,)


@pytest.mark.parametrize("extra, code", [
    (["--solver", "keldysh"], 2),
    (["--dt", "0.3"], 2),
    (["--memory-cap", "100"], 4),
    (["--seed", "3"], 2),
])
def test_exit_codes(tmp_path, extra, code, capsys):
    cfg = write_cfg(tmp_path / "c.json")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")] + extra) == code
    assert "annealdyn:" in capsys.readouterr().err


def test_blow_up_exit_code(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", model=[[3, 1.0], [14, 1.0]],
                    schedule={"kind": "quench", "tau": 50}, grid={"dt": 0.5})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_missing_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2


def test_threshold(capsys, tmp_path):
    assert main(["threshold", "--model", "3:1,14:1"]) == 0
    assert capsys.readouterr().out.strip() == "-1.91419648938"
    cfg = write_cfg(tmp_path / "c.json")
    assert main(["threshold", "--config", cfg]) == 0
    assert capsys.readouterr().out.strip() == "-1.15470053838"


def test_sweep_and_fit(tmp_path, capsys):
    out = tmp_path / "s"
    cfg = write_cfg(tmp_path / "c.json", sweep=[12.5, 25, 50, 100], output_dir=str(out))
    assert main(["sweep", "--config", cfg]) == 0
    line = capsys.readouterr().out
    assert "threshold=-1.154701" in line
    energies = read_csv(out / "energies.csv")
    assert energies["tau"].tolist() == [12.5, 25.0, 50.0, 100.0]
    fit = json.loads((out / "fit.json").read_text())
    assert 0.55 <= fit["alpha"] <= 0.8
    assert (out / "trace_tau100.csv").exists()
    assert main(["fit", str(out / "energies.csv")]) == 0
    refit = json.loads((out / "refit.json").read_text())
    assert refit["alpha"] == fit["alpha"]
    assert main(["fit", str(out / "energies.csv"), "--fit-tau-min", "25"]) == 2


def test_sweep_s0_scan(tmp_path, capsys):
    out = tmp_path / "s"
    cfg = write_cfg(tmp_path / "c.json", model=[[3, 1.0], [14, 1.0]],
                    schedule={"kind": "two_stage", "tau": 10, "s0": [0.5, 0.6]},
                    grid={"dt": 0.05}, sweep=[5, 10, 20, 40], output_dir=str(out))
    assert main(["sweep", "--config", cfg]) == 0
    energies = read_csv(out / "energies.csv")
    assert sorted(set(energies["s0"].tolist())) == [0.5, 0.6]
    fit = json.loads((out / "fit.json").read_text())
    assert fit["s0"] in (0.5, 0.6) and len(fit["scan"]) == 2
    assert fit["epsilon_inf"] == min(f["epsilon_inf"] for f in fit["scan"])


def test_sweep_needs_four_points(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", sweep=[12.5, 25, 50])
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_sweep_memory_precheck(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", sweep=[12.5, 25, 50, 100], memory_cap_bytes=10**6)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 4
    assert not (tmp_path / "o" / "energies.csv").exists()


def test_oracle_command(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", schedule={"kind": "quench", "tau": 1}, grid={"dt": 0.02},
                    oracle={"n_spins": 16, "n_samples": 4, "dt": 0.01, "t_max": 1})
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path / "o"), "--seed", "2"]) == 0
    rep = json.loads((tmp_path / "o" / "comparison.json").read_text())
    assert rep["n_samples"] == 4 and rep["n_points"] == 51
    assert "finite_n_corrected" in rep
    assert list(read_csv(tmp_path / "o" / "oracle.csv")) == [
        "t", "epsilon_mean", "epsilon_stderr", "c_t0_mean", "c_t0_stderr", "n_samples"]


def test_oracle_contract(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", oracle={"n_samples": 1})
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    cfg = write_cfg(tmp_path / "c.json", model=[[4, 1.0]], oracle={"n_samples": 4, "t_max": 1})
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_reruns_are_bit_identical(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", sweep=[12.5, 25, 50, 100])
    for d in ("a", "b"):
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "annealdyn.cli", "threshold", "--model", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "-1"
