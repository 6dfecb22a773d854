import json
import subprocess
import sys

import numpy as np
import pytest

from fraclat import (
    HarnessConfig,
    VerificationReport,
    parse_config,
    run_suite,
    suite_names,
    sweep,
    write_mask,
)
from fraclat.harness import ConfigError
from fraclat.cli import main as cli_main


def test_parse_config_defaults_and_overrides(tmp_path):
    cfg = parse_config(text="")
    assert cfg.h == pytest.approx(1 / 128)
    text = "h=0.05\nnear_band=3\n# comment\ntol_plateau=0.2\ncorpus_size=17\n"
    cfg = parse_config(text=text)
    assert cfg.h == 0.05 and cfg.near_band == 3
    assert cfg.tol_plateau == 0.2 and cfg.corpus_size == 17
    p = tmp_path / "cfg"
    p.write_text(text)
    assert parse_config(str(p)).h == 0.05


def test_parse_config_rejects_unknown_and_malformed():
    with pytest.raises(ConfigError):
        parse_config(text="bogus_key=1\n")
    with pytest.raises(ConfigError):
        parse_config(text="h 0.05\n")
    with pytest.raises(ConfigError):
        parse_config(text="h=abc\n")


def test_unknown_suite_rejected():
    with pytest.raises(ConfigError):
        run_suite("nonexistent")


def test_scaling_suite_exact_pass():
    rep = run_suite("scaling", HarnessConfig(h=1 / 32), seed=1)
    assert rep.all_pass()
    for c in rep.checks:
        assert c.relation == "=="
        assert c.slack <= 1e-10


def test_report_roundtrip_and_determinism():
    cfg = HarnessConfig(h=1 / 32, corpus_size=10)
    r1 = run_suite("monotonicity", cfg, seed=5)
    r2 = run_suite("monotonicity", cfg, seed=5)
    assert r1.to_json() == r2.to_json()
    back = VerificationReport.from_json(r1.to_json())
    assert back.to_json() == r1.to_json()
    r3 = run_suite("monotonicity", cfg, seed=6)
    assert r3.to_json() != r1.to_json() or all(
        c.relation == "==" for c in r1.checks)


def test_report_timings_excluded_by_default():
    rep = run_suite("scaling", HarnessConfig(h=1 / 32), seed=0)
    assert "runtime_ms" not in rep.to_json()
    assert "runtime_ms" in rep.to_json(include_timings=True)
    assert all(c.runtime_ms >= 0 for c in rep.checks)


def test_csv_output_shape():
    rep = run_suite("scaling", HarnessConfig(h=1 / 32), seed=0)
    lines = rep.to_csv().strip().splitlines()
    assert lines[0].startswith("id,relation,lhs")
    assert len(lines) == len(rep.checks) + 1


def test_failing_solver_becomes_failed_check(monkeypatch):
    import fraclat.harness as hz

    def boom(*a, **k):
        raise RuntimeError("synthetic failure")
    monkeypatch.setattr(hz, "frequency", boom)
    rep = run_suite("scaling", HarnessConfig(h=1 / 32), seed=0)
    failed = [c for c in rep.checks if not c.ok]
    assert failed and any("synthetic failure" in c.note for c in failed)


def test_suite_names_catalog():
    names = suite_names()
    for expected in ("scaling", "monotonicity", "cap_identities", "cap_null",
                     "poincare", "mazya", "torsion", "sandwich",
                     "asymptotics", "slab", "capin_compare"):
        assert expected in names


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

def test_sweep_perimeter_refinement_trend():
    rows = sweep("h", [1 / 64, 1 / 128, 1 / 256], "perimeter;shape=interval:-1,1;s=0.5")
    exact = 4 * 2 ** 0.5 / 0.25
    errs = [abs(r["result"] - exact) / exact for r in rows]
    # exact 1D pair weights: already converged at every resolution
    assert max(errs) < 1e-12


def test_sweep_lambda_s_targets():
    rows = sweep("s", [0.9, 0.95], "om_s_lambda;shape=interval:0,1;p=2;q=2;h=0.0078125")
    vals = [r["result"] for r in rows]
    assert all(v > 0 for v in vals)
    drift = abs(vals[0] - vals[1]) / max(vals)
    assert drift < 0.25


def test_sweep_const_target():
    rows = sweep("ratio", [40.0, 80.0], "const:M_lp;dim=1;s=0.5;p=2")
    assert rows[0]["result"] > rows[1]["result"] > 0


def test_sweep_rejects_bad_input():
    with pytest.raises(ConfigError):
        sweep("bogus", [1, 2], "lambda")
    with pytest.raises(ConfigError):
        sweep("s", [0.3, 0.4], "unknown_target")
    with pytest.raises(ConfigError):
        sweep("s", [0.3, 0.4], "lambda;malformed")


# --------------------------------------------------------------------------
# CLI
# --------------------------------------------------------------------------

def run_cli(args, tmp_path=None):
    import io
    from contextlib import redirect_stdout
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli_main(args)
    return code, buf.getvalue()


def test_cli_perimeter_json():
    code, out = run_cli(["perimeter", "--shape", "interval:-1,1", "--s",
                         "0.5", "--h", "0.00390625"])
    assert code == 0
    data = json.loads(out)
    exact = 4 * 2 ** 0.5 / 0.25
    assert data["value"] == pytest.approx(exact, rel=0.01)


def test_cli_lambda_and_cap():
    code, out = run_cli(["lambda", "--shape", "interval:0,1", "--s", "0.5",
                         "--p", "2", "--h", "0.03125"])
    assert code == 0 and json.loads(out)["converged"]
    code, out = run_cli(["cap", "--sigma", "ball:0,0.5", "--env",
                         "interval:-1,1", "--s", "0.5", "--p", "2",
                         "--h", "0.03125"])
    assert code == 0 and json.loads(out)["value"] > 0


def test_cli_const_hand_value():
    code, out = run_cli(["const", "--name", "E", "--args", "ratio=2",
                         "--dim", "1", "--p", "2"])
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(16.0)


def test_cli_torsion_identity():
    code, out = run_cli(["torsion", "--r", "0.5", "--R", "1", "--s", "0.5",
                         "--p", "2", "--h", "0.03125"])
    data = json.loads(out)
    assert code == 0 and data["identity_gap"] < 1e-9


def test_cli_cheeger_and_inradius():
    code, out = run_cli(["cheeger", "--e", "ball:0,1", "--omega",
                         "interval:-2,2", "--s", "0.5", "--h", "0.03125"])
    assert code == 0 and json.loads(out)["value"] > 0
    code, out = run_cli(["inradius", "--shape", "interval:0,1", "--s", "0.5",
                         "--p", "2", "--gamma", "0.3", "--h", "0.03125",
                         "--stride", "8", "--r-max", "1.5"])
    data = json.loads(out)
    assert code == 0
    assert data["r_lower"] <= data["r_upper"]
    assert data["r_upper_is_heuristic"] is True


def test_cli_verify_exit_code_and_output(tmp_path):
    out_path = tmp_path / "report.json"
    cfg = tmp_path / "cfg"
    cfg.write_text("h=0.03125\n")
    code, _ = run_cli(["verify", "--suite", "scaling", "--config", str(cfg),
                       "--seed", "3", "--out", str(out_path)])
    assert code == 0
    data = json.loads(out_path.read_text())
    assert data["pass"] is True
    assert data["environment"]["seed"] == 3


def test_cli_verify_csv_format(tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text("h=0.03125\n")
    code, out = run_cli(["verify", "--suite", "scaling", "--config", str(cfg),
                         "--format", "csv"])
    assert code == 0 and out.startswith("id,relation")


def test_cli_sweep_csv():
    code, out = run_cli(["sweep", "--param", "h", "--grid",
                         "0.03125,0.015625", "--target",
                         "perimeter;shape=interval:-1,1;s=0.5",
                         "--format", "csv"])
    assert code == 0
    assert out.splitlines()[0] == "param,value,target,result"


def test_cli_mask_file_roundtrip(tmp_path):
    mask = np.zeros((12, 9), dtype=bool)
    mask[3:9, 3:6] = True
    path = tmp_path / "dom.mask"
    write_mask(str(path), 0.125, mask)
    code, out = run_cli(["perimeter", "--shape", f"mask:{path}", "--s", "0.5",
                         "--h", "0.125"])
    assert code == 0 and json.loads(out)["value"] > 0


def test_cli_entrypoint_subprocess():
    out = subprocess.run(
        [sys.executable, "-m", "fraclat.cli", "const", "--name", "c_holder",
         "--dim", "1", "--p", "2"],
        capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["value"] == pytest.approx(4.0)
