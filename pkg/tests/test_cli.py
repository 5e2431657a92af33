import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from bbkit.cli import main, run
from bbkit.config import COMMANDS, load_config
from bbkit.funcgrid import fft_workers
from bbkit.io import load_kernel

ABS = {"family": "power", "params": {"s": 1.0}}
EXP = {"family": "exp"}


def run_cfg(tmp_path, command, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    out = tmp_path / "out"
    code = main([command, "--config", str(path), "--out", str(out)])
    report = json.loads((out / f"{command}.json").read_text()) if (out / f"{command}.json").exists() else None
    return code, report, out


# weights-check ---------------------------------------------------------------


def test_weights_check_abs_passes(tmp_path):
    code, rep, out = run_cfg(tmp_path, "weights-check", {"system": ABS})
    assert code == 0 and rep["passed"] and rep["exit_code"] == 0
    verdicts = {(r["condition"], r["variant"]): r["verdict"] for r in rep["result"]["reports"]}
    assert all(v != "counterexample-found" for v in verdicts.values())
    assert {"beurling", "roumieu"} <= {v for _, v in verdicts}
    rows = list(csv.DictReader((out / "weights-check.csv").open()))
    assert rows and set(rows[0]) == {"condition", "variant", "verdict"}
    timing = json.loads((out / "weights-check.timing.json").read_text())
    assert timing["elapsed_seconds"] >= 0


def test_weights_check_exp_fails(tmp_path):
    code, rep, _ = run_cfg(tmp_path, "weights-check", {"system": EXP, "conditions": ["alpha", "M"]})
    assert code == 1
    alpha = [r for r in rep["result"]["reports"] if r["condition"] == "alpha"]
    assert alpha[0]["verdict"] == "counterexample-found"


def test_malformed_json_and_missing_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["weights-check", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["weights-check", "--config", str(tmp_path / "nope.json")]) == 2


def test_usage_errors(tmp_path):
    assert main([]) == 2
    assert main(["no-such-command", "--config", "x"]) == 2
    code, rep, _ = run_cfg(tmp_path, "weights-check", {})
    assert code == 2 and rep is None
    code, _, _ = run_cfg(tmp_path, "weights-check", {"system": ABS, "bogus": 1})
    assert code == 2


# stft-reconstruct ------------------------------------------------------------


def test_stft_reconstruct_defaults(tmp_path):
    code, rep, out = run_cfg(tmp_path, "stft-reconstruct", {})
    assert code == 0 and rep["result"]["max_error"] <= 1e-5
    rows = list(csv.DictReader((out / "stft-reconstruct.csv").open()))
    assert list(rows[0]) == ["function", "params", "error", "pairing_re", "pairing_im"]


def test_stft_reconstruct_zero_window(tmp_path):
    code, rep, _ = run_cfg(tmp_path, "stft-reconstruct", {"gamma": {"tag": "zero"}})
    assert code == 1 and "zero pairing" in rep["result"]["error"]


def test_stft_reconstruct_tolerance_zero(tmp_path):
    code, _, _ = run_cfg(tmp_path, "stft-reconstruct", {"tolerance": 0.0})
    assert code == 1


def test_stft_reconstruct_empty_functions(tmp_path):
    code, _, _ = run_cfg(tmp_path, "stft-reconstruct", {"functions": []})
    assert code == 2


# kernel-roundtrip ------------------------------------------------------------


def test_kernel_roundtrip_default(tmp_path):
    code, rep, out = run_cfg(tmp_path, "kernel-roundtrip", {})
    assert code == 0 and rep["result"]["roundtrip"]["sup_error"] <= 1e-3
    for stem in ("kernel-roundtrip.input", "kernel-roundtrip.output"):
        assert (out / f"{stem}.npy").exists() and (out / f"{stem}.json").exists()
    K_in = load_kernel(out / "kernel-roundtrip.input")
    K_out = load_kernel(out / "kernel-roundtrip.output")
    assert np.max(np.abs(K_in.values - K_out.values)) <= 1e-3
    assert not np.array_equal(K_in.values, K_out.values)


def test_kernel_roundtrip_guard(tmp_path):
    code, rep, _ = run_cfg(tmp_path, "kernel-roundtrip", {"grid": {"N": 64, "T": 4}})
    assert code == 1 and "memory guard" in rep["result"]["error"]


def test_kernel_roundtrip_empty_factors(tmp_path):
    assert run_cfg(tmp_path, "kernel-roundtrip", {"factors": []})[0] == 2


# kothe-report ----------------------------------------------------------------


def test_kothe_report_norms(tmp_path):
    payload = {"system": ABS, "J": 2, "sequences": [{"j": [-2, -1, 0, 1, 2], "re": [1, 1, 1, 1, 1]}], "norm_lambda": 1.0}
    code, rep, _ = run_cfg(tmp_path, "kothe-report", payload)
    assert code == 0
    (n,) = rep["result"]["norms"]
    assert n["l1"] == pytest.approx(21.21467585477939, rel=1e-12)
    assert all(r["agree"] for r in rep["result"]["agreement"])


# bounds-verify ---------------------------------------------------------------


def test_bounds_verify_defaults_and_determinism(tmp_path):
    code, rep, out = run_cfg(tmp_path, "bounds-verify", {})
    assert code == 0
    for section in ("stft_bounds", "adjoint_bounds", "nuclearity"):
        assert all(item["pass"] for item in rep["result"][section])
    first = (out / "bounds-verify.json").read_bytes()
    assert main(["bounds-verify", "--config", str(tmp_path / "cfg.json"), "--out", str(out)]) == 0
    assert (out / "bounds-verify.json").read_bytes() == first


def test_bounds_verify_records_failures(tmp_path):
    payload = {"nuclearity": [{"family": [{"tag": "gaussian"}], "lambda": 1.0, "mu": 0.5}]}
    code, rep, _ = run_cfg(tmp_path, "bounds-verify", payload)
    assert code == 1
    assert "divergent" in rep["result"]["nuclearity"][0]["error"]


def test_bounds_verify_empty_section(tmp_path):
    assert run_cfg(tmp_path, "bounds-verify", {"stft_bounds": []})[0] == 2


# phi0-check ------------------------------------------------------------------


def test_phi0_check(tmp_path):
    payload = {"random": {"count": 3, "support": 3, "seed": 1}}
    code, rep, _ = run_cfg(tmp_path, "phi0-check", payload)
    assert code == 0
    r = rep["result"]
    assert r["chi_half_integers_exact"] and r["half_cell_integrals"]["max_error"] <= 1e-6
    assert len(r["identity"]) == 3 and all(row["max_error"] <= 1e-5 for row in r["identity"])


# schema, env, entry point ----------------------------------------------------


def test_schema_command(tmp_path):
    assert main(["schema", "--out", str(tmp_path)]) == 0
    for name in COMMANDS:
        schema = json.loads((tmp_path / f"{name}.schema.json").read_text())
        assert schema["type"] == "object"


def test_run_direct_and_config_loader(tmp_path):
    assert run("weights-check", {"system": ABS, "conditions": ["M"], "variants": ["beurling"]}, tmp_path) == 0
    with pytest.raises(ValueError):
        load_config("nope", {})


def test_threads_env(monkeypatch):
    monkeypatch.delenv("BBKIT_THREADS", raising=False)
    assert fft_workers() == 1
    monkeypatch.setenv("BBKIT_THREADS", "3")
    assert fft_workers() == 3
    monkeypatch.setenv("BBKIT_THREADS", "junk")
    assert fft_workers() == 1


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"system": ABS, "conditions": ["M"]}))
    proc = subprocess.run([sys.executable, "-m", "bbkit.cli", "weights-check", "--config", str(cfg), "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "pass" in proc.stdout
