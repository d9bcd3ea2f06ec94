import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from goldfish import cli


def run(tmp_path, cfg, command, *extra, name="out.json"):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / name
    rc = cli.main([command, "--config", str(cfg_path), "--output", str(out), "--quiet", *extra])
    report = json.loads(out.read_text()) if out.suffix == ".json" and out.exists() else None
    return rc, report, out


def check(report, name):
    return next(c for c in report["checks"] if c["name"] == name)


def as_complex(pair):
    return complex(pair[0], pair[1])


WORKED = {"p": [0.0, math.log(2.0)], "q": [0.0, 1.0]}


def test_load_config_defaults():
    cfg = cli.load_config({})
    assert cfg.N == 3 and cfg.family.name == "goldfish" and cfg.flow.kind == "single_h"
    assert cfg.tol("drift") == 1e-8


@pytest.mark.parametrize("bad", [
    {"colour": 1},
    {"flow": {"speed": 2}},
    {"N": 0},
    {"N": 2.5},
    {"tolerances": {"drift": -1}},
    {"tolerances": {"nonsense": 1e-3}},
    {"flow": {"kind": "quantum"}},
    {"flow": {"t_span": [1, 0]}},
    {"N": 2, "initial": {"p": [0, 0, 0], "q": [0, 1, 2]}},
    {"output": {"format": "xml"}},
])
def test_load_config_rejects(bad):
    with pytest.raises(cli.ConfigError):
        cli.load_config(bad)


def test_parse_complex_forms():
    assert cli.parse_complex(2) == 2
    assert cli.parse_complex([1, -2]) == 1 - 2j
    assert cli.parse_complex("1+2j") == 1 + 2j
    with pytest.raises(cli.ConfigError):
        cli.parse_complex(True)


def test_verify_passes(tmp_path):
    rc, rep, _ = run(tmp_path, {"N": 3, "samples": 3}, "verify")
    assert rc == cli.EXIT_OK and rep["passed"]
    assert rep["schema"] == cli.SCHEMA and rep["command"] == "verify"
    assert all(c["passed"] for c in rep["checks"])
    assert {"family_inverse", "involution"} <= {c["name"] for c in rep["checks"]}


def test_verify_corrupted_family_fails(tmp_path):
    cfg = {"N": 2, "samples": 2, "family": {"name": "goldfish", "phi_offset": 1e-3}}
    rc, rep, _ = run(tmp_path, cfg, "verify")
    assert rc == cli.EXIT_FAIL and not rep["passed"]
    assert not check(rep, "family_inverse")["passed"]


def test_verify_single_particle(tmp_path):
    rc, rep, _ = run(tmp_path, {"N": 1, "samples": 2}, "verify")
    assert rc == cli.EXIT_OK


def test_usage_errors(tmp_path, capsys):
    assert run(tmp_path, {"unknown": 1}, "verify")[0] == cli.EXIT_USAGE
    assert run(tmp_path, {"tolerances": {"drift": 0}}, "verify")[0] == cli.EXIT_USAGE
    assert run(tmp_path, {"family": {"name": "toda"}}, "verify")[0] == cli.EXIT_USAGE
    assert run(tmp_path, {"N": 2, "initial": {"p": [0, 0], "q": [1, 1]}}, "simulate")[0] == cli.EXIT_USAGE
    assert cli.main(["verify", "--config", str(tmp_path / "missing.json"), "--quiet"]) == cli.EXIT_USAGE
    assert "config error" in capsys.readouterr().err


def test_simulate_worked_state(tmp_path):
    cfg = {"N": 2, "initial": WORKED, "flow": {"t_span": [0, 2], "sample_count": 3}}
    rc, rep, out = run(tmp_path, cfg, "simulate")
    assert rc == cli.EXIT_OK
    assert check(rep, "exact_vs_integrated")["passed"]
    assert check(rep, "drift_h1")["residual"] <= 1e-8
    with open(out.with_suffix(".csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    for row in rows:
        t = float(row["t"])
        assert float(row["e1_re"]) == pytest.approx(1 + t, abs=1e-8)
    assert rep["artifacts"]["trajectory_csv"].endswith("out.csv")


def test_simulate_csv_columns(tmp_path):
    cfg = {"N": 2, "initial": WORKED, "flow": {"t_span": [0, 1], "sample_count": 4}}
    rc, _, out = run(tmp_path, cfg, "simulate", "--format", "csv", name="traj.csv")
    assert rc == cli.EXIT_OK
    with open(out) as fh:
        header = next(csv.reader(fh))
    assert header[0] == "t" and header[-2:] == ["P_re", "P_im"]
    assert "q2_im" in header and "h1_re" in header
    assert len(header) == 1 + 4 * 2 * 2 + 2
    assert json.loads((tmp_path / "traj.csv.report.json").read_text())["passed"]


def test_simulate_zero_span(tmp_path):
    cfg = {"N": 2, "initial": WORKED, "flow": {"t_span": [0, 0]}}
    rc, _, out = run(tmp_path, cfg, "simulate", "--format", "csv", name="t.csv")
    assert rc == cli.EXIT_OK
    assert len(out.read_text().strip().splitlines()) == 2


def test_simulate_isochrony(tmp_path):
    cfg = {"N": 3, "seed": 4, "flow": {"kind": "tilde_h", "alpha": [0, 1],
                                        "t_span": [0, 2 * math.pi], "sample_count": 9}}
    rc, rep, _ = run(tmp_path, cfg, "simulate")
    assert rc == cli.EXIT_OK
    assert check(rep, "isochrony_positions")["passed"]
    assert check(rep, "isochrony_observables")["passed"]


def test_simulate_linear_moments(tmp_path):
    cfg = {"N": 3, "family": {"name": "linear"}, "flow": {"k": 2, "sample_count": 11}}
    rc, rep, _ = run(tmp_path, cfg, "simulate")
    assert rc == cli.EXIT_OK and check(rep, "moment_law")["passed"]


def test_simulate_collision_reports_failure(tmp_path):
    cfg = {"N": 2, "initial": {"p": [[0, math.pi], [0, math.pi]], "q": [-1, 1]},
           "flow": {"t_span": [0, 2], "sample_count": 5}}
    rc, rep, _ = run(tmp_path, cfg, "simulate")
    assert rc == cli.EXIT_FAIL
    assert not check(rep, "integration")["passed"]


def test_simulate_deterministic(tmp_path):
    cfg = {"N": 3, "seed": 11, "flow": {"k": 2, "sample_count": 5}}
    _, first, _ = run(tmp_path, cfg, "simulate")
    _, second, _ = run(tmp_path, cfg, "simulate")
    first.pop("timing")
    second.pop("timing")
    assert first == second


def test_separate_linear(tmp_path):
    cfg = {"N": 2, "family": {"name": "linear"}, "initial": {"p": [0.5, -0.2], "q": [1, 2]},
           "flow": {"sample_count": 11}}
    rc, rep, _ = run(tmp_path, cfg, "separate")
    assert rc == cli.EXIT_OK
    beta = [as_complex(b) for b in rep["data"]["beta"]]
    np.testing.assert_allclose(beta, [2.5, 3.0], atol=1e-10)
    assert check(rep, "linear_beta")["passed"]


def test_separate_zero_positions_with_P0(tmp_path):
    cfg = {"N": 2, "initial": {"q": [0, 0], "P0": [1, 1]}, "flow": {"kind": "tilde_h", "alpha": 1}}
    rc, rep, _ = run(tmp_path, cfg, "separate")
    assert rc == cli.EXIT_OK
    assert [as_complex(b) for b in rep["data"]["beta"]] == [0, 0]


def test_separate_goldfish_drift(tmp_path):
    cfg = {"N": 3, "seed": 2, "flow": {"k": 1, "sample_count": 21}}
    rc, rep, _ = run(tmp_path, cfg, "separate")
    assert rc == cli.EXIT_OK
    assert check(rep, "beta_drift")["residual"] <= 1e-6
    assert check(rep, "hamilton_jacobi")["passed"]


def test_separate_csv_table(tmp_path):
    cfg = {"N": 2, "family": {"name": "linear"}, "initial": {"p": [0, 0], "q": [1, 2]},
           "flow": {"sample_count": 3}}
    rc, _, out = run(tmp_path, cfg, "separate", "--format", "csv", name="beta.csv")
    assert rc == cli.EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [float(r["beta_re"]) for r in rows] == pytest.approx([2.5, 3.0])


def test_superint_worked_state(tmp_path):
    cfg = {"N": 2, "initial": WORKED, "samples": 3, "flow": {"sample_count": 5}}
    rc, rep, _ = run(tmp_path, cfg, "superint")
    assert rc == cli.EXIT_OK
    assert as_complex(rep["data"]["Lambda"][0][1]) == pytest.approx(1.0)
    assert "unavailable" in rep["data"]["Phi"]


def test_superint_rank(tmp_path):
    cfg = {"N": 4, "samples": 3, "flow": {"k": 2, "sample_count": 5}}
    rc, rep, _ = run(tmp_path, cfg, "superint")
    assert rc == cli.EXIT_OK
    assert set(rep["data"]["ranks"]) == {7}
    assert check(rep, "phi_drift")["passed"]


def test_superint_needs_goldfish(tmp_path):
    assert run(tmp_path, {"family": {"name": "linear"}}, "superint")[0] == cli.EXIT_USAGE


def test_stdout_and_seed_flag(capsys):
    rc = cli.main(["verify", "--seed", "3", "--quiet"])
    captured = capsys.readouterr()
    rep = json.loads(captured.out)
    assert rc == cli.EXIT_OK and rep["config"]["seed"] == 3
    assert captured.err == ""


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "goldfish.cli", "verify", "--seed", "1"],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["passed"]
    assert "all checks passed" in proc.stderr
