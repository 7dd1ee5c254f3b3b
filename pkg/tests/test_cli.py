import subprocess
import sys

import numpy as np
import pytest

from neumann_patterns.cli import EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK, run
from neumann_patterns.formats import read_csv, read_field


def test_solve_writes_outputs(tmp_path, capsys):
    code = run(["solve", "--shape", "disk", "--h", "1/16", "--eps", "0.1", "--init", "const:1.2", "--out",
                str(tmp_path)])
    assert code == EXIT_OK
    rows = read_csv(tmp_path / "results.csv")
    assert rows[0]["converged"] == "true" and rows[0]["classification"] == "constant"
    assert float(rows[0]["constant_value"]) == pytest.approx(1.25643120863, abs=1e-10)
    mask, u = read_field(tmp_path / "field.txt")
    assert mask.n_cells == u.size
    assert "constant" in capsys.readouterr().out


def test_solve_not_converged_exit_code(tmp_path):
    code = run(["solve", "--h", "1/8", "--eps", "0.1", "--init", "const:0.7", "--maxit", "1", "--out",
                str(tmp_path)])
    assert code == EXIT_NOT_CONVERGED


@pytest.mark.parametrize("argv", [
    ["solve", "--shape", "hexagon"],
    ["solve", "--f", "exp:gamma=2"],
    ["solve", "--h", "-1"],
    ["solve", "--h", "abc"],
    ["solve", "--init", "/nonexistent/field.txt"],
    ["multistart", "--n", "0"],
    ["multistart", "--strategy", "lattice"],
    ["render", "/nonexistent.txt"],
    ["oracle", "--delta", "-1"],
    ["mpa", "--shape", "disk:radius=0.1", "--h", "1/16", "--eps", "0.05"],
])
def test_invalid_input_exit_code(tmp_path, argv, capsys):
    assert run(argv + ["--out", str(tmp_path)]) == EXIT_INVALID


def test_unknown_subcommand(capsys):
    assert run(["frobnicate"]) == EXIT_INVALID
    assert run([]) == EXIT_INVALID


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == EXIT_OK
    assert "multistart" in capsys.readouterr().out


def test_multistart_csvs_are_reproducible(tmp_path):
    args = ["multistart", "--shape", "disk", "--h", "1/16", "--eps", "0.1", "--n", "6", "--strategy", "spikes",
            "--seed", "11"]
    assert run(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert run(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("results.csv", "runs.csv", "solution_0.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert len(read_csv(tmp_path / "a" / "runs.csv")) == 6


def test_config_file_supplies_defaults_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# problem\nshape = rectangle\nh = 1/8\neps = 0.5\ninit = const:0.9\n")
    assert run(["solve", "--config", str(cfg), "--out", str(tmp_path / "a")]) == EXIT_OK
    mask, _ = read_field(tmp_path / "a" / "field.txt")
    assert (mask.nx, mask.h) == (8, 0.125)
    assert run(["solve", "--config", str(cfg), "--h", "1/4", "--out", str(tmp_path / "b")]) == EXIT_OK
    mask, _ = read_field(tmp_path / "b" / "field.txt")
    assert mask.nx == 4
    capsys.readouterr()
    cfg.write_text("colour = blue\n")
    assert run(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_INVALID
    assert "colour" in capsys.readouterr().err
    assert run(["solve", "--config", str(tmp_path / "missing.cfg")]) == EXIT_INVALID


def test_mpa_outputs(tmp_path, capsys):
    code = run(["mpa", "--shape", "disk", "--h", "1/32", "--eps", "0.05", "--out", str(tmp_path)])
    assert code == EXIT_OK
    trace = read_csv(tmp_path / "trace.csv")
    assert list(trace[0]) == ["iter", "max_index", "max_energy", "grad_norm_at_max"]
    energies = [float(r["max_energy"]) for r in trace]
    assert all(b <= a for a, b in zip(energies, energies[1:]))
    res = read_csv(tmp_path / "results.csv")[0]
    assert res["classification"] == "nonconstant"
    assert "True" in capsys.readouterr().out


def test_sweep_eigen_oracle_verify(tmp_path, capsys):
    assert run(["sweep", "--h", "1/16", "--eps", "0.1", "--eps-list", "0.1,0.05", "--n", "3", "--out",
                str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "sweep.csv")
    assert [float(r["epsilon"]) for r in rows] == [0.1, 0.05]

    assert run(["eigen", "--shape", "rectangle", "--h", "1/32", "--k", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "lambda_2" in out and "lambda_4" in out

    assert run(["oracle", "--delta", "1", "--h", "1/16"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "1.25643120863" in out and "lshape" in out
    assert run(["oracle", "--delta", "0"]) == EXIT_OK
    assert "209.439510239" in capsys.readouterr().out

    assert run(["verify", "--h", "1/16", "--n", "5", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "holds" in out and "5/5 starts converged; 1 distinct solutions, 1 constant" in out


def test_render(tmp_path, capsys):
    run(["solve", "--shape", "lshape", "--h", "1/8", "--init", "random:0.1", "--maxit", "1", "--out", str(tmp_path)])
    assert run(["render", str(tmp_path / "field.txt")]) == EXIT_OK
    data = (tmp_path / "field.pgm").read_bytes()
    assert data.startswith(b"P5\n8 8\n255\n")
    assert run(["render", str(tmp_path / "field.txt"), "--output", str(tmp_path / "x.pgm")]) == EXIT_OK
    assert (tmp_path / "x.pgm").read_bytes() == data


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "neumann_patterns", "oracle", "--delta", "0"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert "bound maximum C2" in out.stdout
    assert np.isclose(float(out.stdout.split("bound maximum C2")[1].split()[0]), 200 * np.pi / 3)
