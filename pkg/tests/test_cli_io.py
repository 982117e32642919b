import json

import numpy as np
import pytest

from skewspec import __version__
from skewspec.cli import run_command
from skewspec.io import RunManifest, fmt, read_csv, write_csv, write_json, write_matrix_csv


def test_fmt_round_trips():
    v = 0.1 + 0.2
    assert float(fmt(v)) == v
    assert fmt(True) == "true" and fmt(np.int64(3)) == "3" and fmt(float("inf")) == "inf"
    assert complex(fmt(1.5 - 0.25j)) == 1.5 - 0.25j


def test_csv_crlf_and_json_sorted(tmp_path):
    p = write_csv(tmp_path / "a.csv", ["x", "y"], [[1, 2.5], [3, 1 / 3]])
    raw = p.read_bytes()
    assert raw.startswith(b"x,y\r\n") and raw.count(b"\r\n") == 3
    assert float(read_csv(p)[1]["y"]) == 1 / 3
    q = write_json(tmp_path / "b.json", {"b": 1, "a": [1j, np.float64(2)]})
    assert list(json.loads(q.read_text())) == ["a", "b"]


def test_matrix_triplets(tmp_path):
    p = write_matrix_csv(tmp_path / "m.csv", np.array([[1, 0], [0, 2j]]))
    rows = read_csv(p)
    assert [(r["row"], r["col"]) for r in rows] == [("0", "0"), ("1", "1")]


def test_manifest_requires_outputs(tmp_path):
    with pytest.raises(FileNotFoundError):
        RunManifest("x", {}, __version__, 0.0, [str(tmp_path / "missing")]).write(tmp_path / "m.json")


def test_lyapunov_out_and_manifest(tmp_path, capsys):
    out = tmp_path / "lyap.csv"
    code = run_command(["lyapunov", "--kind", "szego", "--lambda", "0.5", "--omega", "golden",
                        "--z-angle", "0.3", "--steps", "2000", "--samples", "4", "--seed", "7",
                        "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 1 and abs(float(rows[0]["value"]) - 0.1438) < 0.05
    man = json.loads((tmp_path / "lyap.manifest.json").read_text())
    assert man["command"] == "lyapunov" and man["outputs"] == [str(out)]
    assert man["config"]["seed"] == 7
    assert "lyapunov szego" in capsys.readouterr().out


def test_ids_column_monotone(tmp_path):
    out = tmp_path / "ids.csv"
    assert run_command(["ids", "--g", "1", "--N", "128", "--samples", "8", "--grid", "64",
                        "--out", str(out)]) == 0
    k = [float(r["k"]) for r in read_csv(out)]
    assert all(b >= a for a, b in zip(k, k[1:])) and k[-1] == 1.0 and k[0] == 0.0


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nsamples = 9\nN = 64\ngrid = 32\ng=0.5\n")
    assert run_command(["ids", "--config", str(cfg), "--N", "96", "--outdir", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "ids.manifest.json").read_text())
    assert man["config"]["N"] == 96 and man["config"]["samples"] == 9 and man["config"]["g"] == 0.5
    assert man["config"]["seed"] == 0


def test_seed_determines_output(tmp_path):
    argv = ["return-times", "--L", "2000", "--starts", "3", "--seed", "4"]
    run_command(argv + ["--outdir", str(tmp_path / "a")])
    run_command(argv + ["--outdir", str(tmp_path / "b"), "--threads", "2"])
    a = (tmp_path / "a" / "return_times.csv").read_bytes()
    assert a == (tmp_path / "b" / "return_times.csv").read_bytes()


def test_exit_codes(tmp_path, capsys):
    assert run_command(["lyapunov", "--bogus", "1"]) == 1
    assert run_command(["nosuch"]) == 1
    assert run_command(["lyapunov", "--steps", "10", "--outdir", str(tmp_path)]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown_key = 3\n")
    assert run_command(["ids", "--config", str(bad), "--outdir", str(tmp_path)]) == 1
    assert "contract violation" in capsys.readouterr().err


def test_zero_spectrum_and_spacing(tmp_path):
    assert run_command(["zero-spectrum", "--Ns", "64,128", "--outdir", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "zero_spectrum.csv")) == 2
    assert run_command(["spacing", "--N", "1024", "--halfwidth", "0.8", "--outdir", str(tmp_path)]) == 0
    assert "ks_poisson" in json.loads((tmp_path / "spacing.json").read_text())


def test_suitability_and_wegner_small(tmp_path):
    assert run_command(["suitability", "--scales", "8,16", "--samples", "5", "--verdicts", "1",
                        "--outdir", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "verdicts.csv")) == 10
    assert run_command(["wegner", "--scales", "8", "--samples", "5", "--B-count", "5",
                        "--outdir", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "wegner.csv")) == 5


def test_verify_fast(tmp_path, capsys):
    assert run_command(["verify", "--suite", "fast", "--outdir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "[FAIL]" not in out and out.count("[PASS]") >= 10
