import subprocess
import sys

import pytest

from shiftconv.cli import run_cli


@pytest.fixture
def base(tmp_path):
    return ["--cache-dir", str(tmp_path / "cache")]


def test_jutila_single_q_passes(base, tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli(base + ["--out", str(out), "verify", "jutila", "--q", "64"]) == 0
    assert "Q=64" in capsys.readouterr().out
    rows = (out / "jutila.csv").read_text().splitlines()
    assert rows[0].startswith("Q,") and rows[1].startswith("64,")


def test_voronoi_d3_single_row(base, tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli(base + ["--out", str(out), "verify", "voronoi-d3", "--qmax", "1", "--scale", "1000"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert len((out / "voronoi-d3.csv").read_text().splitlines()) == 2


def test_poisson_passes(base, tmp_path):
    out = tmp_path / "out"
    assert run_cli(base + ["--out", str(out), "verify", "poisson"]) == 0
    assert len((out / "poisson.csv").read_text().splitlines()) == 11


def test_sum_prints_value_and_majorant(base, tmp_path, capsys):
    assert run_cli(base + ["--out", str(tmp_path / "o"), "sum", "--X", "2048", "--H", "32"]) == 0
    text = capsys.readouterr().out
    assert "S(H=32, X=2048, r=1)" in text and "trivial majorant" in text


def test_sieve_fills_cache(base, tmp_path):
    assert run_cli(base + ["sieve", "--N", "500"]) == 0
    assert sorted(p.name for p in (tmp_path / "cache").iterdir()) == ["d3_500.scs", "tau_500.scs"]


@pytest.mark.parametrize("argv", [["bogus"], ["verify", "nothing"], [], ["sum", "--X", "10"]])
def test_usage_errors_exit_2(argv, base):
    assert run_cli(base + argv) == 2


def test_invalid_values_exit_2(base, tmp_path):
    assert run_cli(base + ["--out", str(tmp_path / "o"), "sum", "--X", "10", "--H", "50"]) == 2
    assert run_cli(base + ["sieve", "--N", "0"]) == 2
    assert run_cli(base + ["--out", str(tmp_path / "o"), "experiment", "--grid", str(tmp_path / "missing")]) == 2


def test_corrupt_cache_exits_2(base, tmp_path):
    assert run_cli(base + ["sieve", "--N", "300", "--kind", "tau"]) == 0
    path = tmp_path / "cache" / "tau_300.scs"
    data = bytearray(path.read_bytes())
    data[-3] ^= 1
    path.write_bytes(bytes(data))
    assert run_cli(base + ["sieve", "--N", "300", "--kind", "tau"]) == 2


GRID = "X = 2^10, 2^11, 2^12\nH_law = 0.5\nlambda = d3\n"


def _experiment(tmp_path, name, threads, cache):
    grid = tmp_path / "grid.txt"
    grid.write_text(GRID)
    out = tmp_path / name
    code = run_cli(["--cache-dir", str(cache), "--threads", str(threads), "--out", str(out), "experiment", "--grid", str(grid)])
    assert code == 0
    (csv,) = out.glob("experiment-*.csv")
    return csv


def test_experiment_csv_byte_identical_across_runs_and_threads(tmp_path):
    cache = tmp_path / "cache"
    a = _experiment(tmp_path, "a", 1, cache)
    b = _experiment(tmp_path, "b", 1, cache)
    c = _experiment(tmp_path, "c", 4, tmp_path / "cache2")
    assert a.name == b.name == c.name
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    assert (a.parent / a.name.replace(".csv", ".svg")).exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "shiftconv", "--cache-dir", str(tmp_path), "--out", str(tmp_path / "o"),
                           "verify", "jutila", "--q", "64"], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert "Q=64" in proc.stdout
