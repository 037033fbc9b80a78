import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlfkpp import cli
from nlfkpp.cli import UsageError, main, parse_config, read_csv, write_csv


def test_parse_evolve_defaults():
    cfg = parse_config(["evolve", "--D", "0.001", "--scheme", "u", "--L", "10", "--n", "1000"])
    assert cfg.command == "evolve"
    p = cfg.params
    assert p["D"] == 0.001 and p["scheme"] == "u" and p["L"] == 10.0 and p["n"] == 1000
    assert cfg.sources["D"] == "flag" and cfg.sources["t_end"] == "default"


def test_parse_steady():
    cfg = parse_config(["steady", "--lambda", "0.75", "--D", "1e-4"])
    assert cfg.params["lambda"] == 0.75 and cfg.params["D"] == 1e-4


@pytest.mark.parametrize("argv", [
    ["evolve", "--D", "-1"],
    ["evolve", "--D", "abc"],
    ["evolve", "--D", "0.01", "--bogus", "1"],
    ["evolve"],
    ["steady", "--lambda", "0", "--D", "1e-4"],
    ["tw", "--D", "0.01", "--D_min", "1", "--D_max", "0.1"],
    ["tw", "--D", "0.01", "--v", "0.1"],
    ["evolve", "--D", "0.01", "--scheme", "w", "--init", "bump"],
    ["repro", "--target", "FIG99"],
    ["nosuch"],
])
def test_usage_errors(argv):
    with pytest.raises(UsageError):
        parse_config(argv)
    assert main(argv) == 2


def test_w_scheme_defaults_to_gaussian():
    cfg = parse_config(["evolve", "--D", "0.01", "--scheme", "w"])
    assert cfg.params["init"] == "gaussian"


def test_config_file_and_override(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\nD = 0.002\nt_end = 3  # inline\n\nn = 500\n")
    cfg = parse_config(["evolve", "--config", str(f), "--n", "800"])
    assert cfg.params["D"] == 0.002 and cfg.params["t_end"] == 3.0
    assert cfg.params["n"] == 800 and cfg.sources["n"] == "flag" and cfg.sources["D"] == "file"


def test_config_file_unknown_key(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("D = 0.002\nspeed = 3\n")
    with pytest.raises(UsageError, match="unknown keys"):
        parse_config(["evolve", "--config", str(f)])
    f.write_text("D 0.002\n")
    with pytest.raises(UsageError):
        parse_config(["evolve", "--config", str(f)])


floats = st.floats(allow_nan=False, allow_infinity=False) | st.sampled_from([5e-324, -0.0, 1e308])


@given(st.lists(st.tuples(floats, floats), min_size=1, max_size=20))
def test_csv_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    write_csv(path, ["a", "b"], rows)
    header, back = read_csv(path)
    assert header == ["a", "b"]
    got = [(float(a), float(b)) for a, b in back]
    assert all(x == y or (x == 0 and y == 0) for r, g in zip(rows, got) for x, y in zip(r, g))
    assert [math.copysign(1, x) for r in got for x in r] == [math.copysign(1, x) for r in rows for x in r]


def _payload(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).glob("*.csv"))}


def test_evolve_run_deterministic(tmp_path):
    argv = ["evolve", "--D", "0.01", "--n", "200", "--t_end", "2", "--snapshots", "1,2"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    a, b = _payload(tmp_path / "a"), _payload(tmp_path / "b")
    assert set(a) == {"diagnostics.csv", "snapshot_t1.csv", "snapshot_t2.csv"}
    assert a == b
    header, rows = read_csv(tmp_path / "a" / "diagnostics.csv")
    assert header == ["time", "front", "wavelength", "u_max", "mass"]
    assert [float(r[0]) for r in rows] == [0.0, 1.0, 2.0]
    man = (tmp_path / "a" / "manifest.txt").read_text()
    for key in ("command = evolve", "D = 0.01  # flag", "L = 10.0  # default",
                "snapshots = 1.0,2.0  # flag", "file = diagnostics.csv", "version = "):
        assert key in man


def test_manifest_floats_read_back(tmp_path):
    assert main(["dispersion", "--D", "0.1", "--n_k", "5", "--out", str(tmp_path)]) == 0
    vals = dict(line.split(" = ", 1) for line in (tmp_path / "manifest.txt").read_text().splitlines())
    assert float(vals["D"].split("#")[0]) == 0.1
    header, rows = read_csv(tmp_path / "dispersion.csv")
    assert len(rows) == 5


def test_tw_outputs(tmp_path):
    argv = ["tw", "--D", "0.05", "--roots", "1,-1,3", "--n_D", "20",
            "--out", str(tmp_path)]
    assert main(argv) == 0
    header, rows = read_csv(tmp_path / "roots.csv")
    assert header == ["n", "D", "Re_sigma", "Im_sigma"]
    assert {int(r[0]) for r in rows} == {1, -1, 3} and len(rows) == 60
    header, rows = read_csv(tmp_path / "profile.csv")
    assert header == ["z", "u"]
    assert (tmp_path / "threshold.csv").exists()


def test_tongues_columns(tmp_path):
    assert main(["tongues", "--i_max", "2", "--n_D", "5", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "tongues.csv")
    assert header == ["i", "D", "lambda_minus", "lambda_plus", "Delta_i", "delta_2i_minus_1"]
    idx = [int(r[0]) for r in rows]
    assert set(idx) == {1, 2} and idx.count(1) == idx.count(2)
    assert all(float(r[2]) <= float(r[3]) for r in rows)


def test_threads_env(monkeypatch):
    monkeypatch.setenv("NLFKPP_THREADS", "3")
    assert cli.workers() == 3
    monkeypatch.setenv("NLFKPP_THREADS", "0")
    assert cli.workers() == 1
    monkeypatch.setenv("NLFKPP_THREADS", "many")
    with pytest.raises(UsageError):
        cli.workers()
    assert main(["dispersion", "--D", "0.1"]) == 2


def _square(x):
    return x * x


def test_parallel_map_order(monkeypatch):
    monkeypatch.setenv("NLFKPP_THREADS", "2")
    assert cli.parallel_map(_square, range(7)) == [x * x for x in range(7)]


def test_numerical_failure_exit_code(tmp_path):
    # lambda outside every tongue: the steady solve has no pattern to report
    assert main(["steady", "--lambda", "3.7", "--D", "0.5", "--out", str(tmp_path)]) == 1


def test_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "nlfkpp.cli", "repro", "--target", "TABLE_CONSTANTS",
                        "--out", str(tmp_path)], capture_output=True, text=True, timeout=300)
    assert r.returncode == 0, r.stderr
    header, rows = read_csv(tmp_path / "summary.csv")
    assert header == ["check", "value", "low", "high", "pass"]
    assert all(r[4] == "true" for r in rows)
    assert np.isfinite([float(r[1]) for r in rows]).all()
