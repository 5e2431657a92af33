"""Batch front-end: ``bbkit <command> --config <path> [--out <dir>]``.

Exit codes: 0 every check passed, 1 a mathematical check failed, 2 usage or
config error.  Each run writes ``<command>.json`` (deterministic), an
optional ``<command>.csv`` table and ``<command>.timing.json``.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from pydantic import ValidationError

from . import io
from .config import (
    COMMANDS,
    Phi0CheckConfig,
    BoundsVerifyConfig,
    KernelRoundtripConfig,
    KotheReportConfig,
    StftReconstructConfig,
    WeightsCheckConfig,
    json_schemas,
    load_config,
)
from .kernels import kernel_stft_roundtrip, projective_bound_check, tensor_embed
from .kothe import (
    IndexedSequence,
    build_phi0,
    check_kothe_N,
    chi_function,
    kothe_from_system,
    l1_norm,
    linf_norm,
    sampling_S,
    verify_S_T_identity,
)
from .reports import NOT_APPLICABLE, ConditionReport, holds
from .stft import nuclearity_inequality_check, reconstruct, reflect, stft, verify_stft_bound, verify_adjoint_bound
from .weights import (
    ExponentialSystem,
    check_alpha,
    check_condition_M,
    check_condition_N,
    check_condition_S,
    check_condition_sq,
    check_gamma,
    system_from_config,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

Table = tuple[list[str], list[dict]]
Outcome = tuple[bool, dict, Table | None]


def _not_applicable(name: str, variant: str | None, why: str) -> ConditionReport:
    return ConditionReport(name, variant, NOT_APPLICABLE, None, None, {"reason": why})


def cmd_weights_check(cfg: WeightsCheckConfig) -> Outcome:
    W = system_from_config(cfg.system)
    search, quad = cfg.search.build(), cfg.quadrature.build()
    omega = W.omega if isinstance(W, ExponentialSystem) else None
    reports: list[ConditionReport] = []
    if "alpha" in cfg.conditions:
        reports.append(check_alpha(omega, search, dim=W.dim, method=cfg.method) if omega is not None
                       else _not_applicable("alpha", None, "system is not of the form exp(omega/lambda)"))
    for variant in cfg.variants:
        for cond in cfg.conditions:
            if cond == "M":
                reports.append(check_condition_M(W, variant, search, method=cfg.method))
            elif cond == "SQ":
                reports.append(check_condition_sq(W, variant, search, method=cfg.method))
            elif cond == "N":
                reports.append(check_condition_N(W, variant, quad, search))
            elif cond == "S":
                reports.append(check_condition_S(W, variant, search, quad))
            elif cond == "gamma":
                if omega is None or not W.radial:
                    reports.append(_not_applicable("gamma", variant, "needs a radial exp(omega/lambda) system"))
                else:
                    reports.append(check_gamma(omega, variant, quad, dim=W.dim))
    ok = all(holds(r.verdict) or r.verdict == NOT_APPLICABLE for r in reports)
    rows = [{"condition": r.condition, "variant": r.variant or "", "verdict": r.verdict} for r in reports]
    return ok, {"system": W.to_dict(), "reports": [r.to_dict() for r in reports]}, (["condition", "variant", "verdict"], rows)


def cmd_stft_reconstruct(cfg: StftReconstructConfig) -> Outcome:
    grid = cfg.grid.build()
    psi, gamma = cfg.psi.build(grid), cfg.gamma.build(grid)
    rows = []
    for spec in cfg.functions:
        rec = reconstruct(spec.build(grid), psi, gamma)
        rows.append({"function": spec.tag, "params": spec.params, "error": rec.error, "pairing_re": rec.pairing.real, "pairing_im": rec.pairing.imag})
    worst = max(r["error"] for r in rows)
    ok = worst <= cfg.tolerance
    result = {"grid": grid.to_dict(), "max_error": worst, "tolerance": cfg.tolerance, "rows": rows}
    return ok, result, (["function", "params", "error", "pairing_re", "pairing_im"], rows)


def cmd_kernel_roundtrip(cfg: KernelRoundtripConfig, out: Path | None = None) -> Outcome:
    grid = cfg.grid.build()
    phis = [a.build(grid) for a, _ in cfg.factors]
    psis = [b.build(grid) for _, b in cfg.factors]
    K = tensor_embed(phis, psis)
    rec, report = kernel_stft_roundtrip(K, cfg.psi1.build(grid), cfg.gamma1.build(grid), cfg.psi2.build(grid), cfg.gamma2.build(grid))
    ok = report.sup_error <= cfg.tolerance
    result: dict[str, Any] = {"grid": grid.to_dict(), "roundtrip": report.to_dict(), "tolerance": cfg.tolerance}
    rows = [{"check": "roundtrip", "value": report.sup_error, "bound": cfg.tolerance, "pass": ok}]
    if cfg.projective:
        pb = projective_bound_check(phis, psis)
        result["projective_bound"] = pb.to_dict()
        rows.append({"check": "projective-bound", "value": pb.lhs, "bound": pb.rhs, "pass": pb.passed})
        ok = ok and pb.passed
    if out is not None:
        io.save_kernel(K, out / "kernel-roundtrip.input")
        io.save_kernel(rec, out / "kernel-roundtrip.output")
    return ok, result, (["check", "value", "bound", "pass"], rows)


def cmd_kothe_report(cfg: KotheReportConfig) -> Outcome:
    W = system_from_config(cfg.system)
    A = kothe_from_system(W, cfg.J)
    quad = cfg.quadrature.build()
    rows, reports = [], []
    for variant in cfg.variants:
        kr = check_kothe_N(A, variant, quad, window=cfg.window)
        sr = check_condition_N(W, variant, quad)
        agree = holds(kr.verdict) == holds(sr.verdict)
        rows.append({"variant": variant, "kothe_verdict": kr.verdict, "system_verdict": sr.verdict, "agree": agree})
        reports.append({"kothe": kr.to_dict(), "system": sr.to_dict()})
    norms = []
    if cfg.sequences:
        a = A.sequence(cfg.norm_lambda)
        for s in cfg.sequences:
            c = IndexedSequence.from_dict(s.payload(cfg.J))
            norms.append({"sequence": c.to_dict(), "lambda": cfg.norm_lambda, "l1": l1_norm(c, a), "linf": linf_norm(c, a)})
    ok = all(r["agree"] for r in rows)
    result = {"system": W.to_dict(), "J": cfg.J, "window": cfg.window, "agreement": rows, "reports": reports, "norms": norms}
    return ok, result, (["variant", "kothe_verdict", "system_verdict", "agree"], rows)


def _guarded(fn: Callable[[], Any]) -> dict:
    try:
        return fn().to_dict()
    except ValueError as exc:
        return {"pass": False, "error": str(exc)}


def cmd_bounds_verify(cfg: BoundsVerifyConfig) -> Outcome:
    grid = cfg.grid.build()
    quad = cfg.quadrature.build()
    sections: dict[str, list[dict]] = {"stft_bounds": [], "adjoint_bounds": [], "nuclearity": []}
    for case in cfg.stft_bounds:
        sections["stft_bounds"].append(_guarded(lambda c=case: verify_stft_bound(
            c.phi.build(grid), c.psi.build(grid), [x.build() for x in c.v], [x.build() for x in c.w], c.C0, c.C1)))
    for case in cfg.adjoint_bounds:
        def adj(c=case):
            F = stft(c.f.build(grid), reflect(c.analysis.build(grid)))
            return verify_adjoint_bound(F, c.psi.build(grid), [x.build() for x in c.v], [x.build() for x in c.w], c.C1, quad=quad)
        sections["adjoint_bounds"].append(_guarded(adj))
    for case in cfg.nuclearity:
        def nuc(c=case):
            W = system_from_config(c.system)
            V = system_from_config(c.freq_system) if c.freq_system else W
            return nuclearity_inequality_check([f.build(grid) for f in c.family], W, V, c.lam, c.mu, quad=quad)
        sections["nuclearity"].append(_guarded(nuc))
    rows = []
    for name, items in sections.items():
        for i, rep in enumerate(items):
            rows.append({"section": name, "index": i, "lhs": rep.get("lhs"), "rhs": rep.get("rhs"), "slack": rep.get("slack"), "pass": bool(rep.get("pass")), "error": rep.get("error", "")})
    ok = all(r["pass"] for r in rows)
    return ok, {"grid": grid.to_dict(), **sections}, (["section", "index", "lhs", "rhs", "slack", "pass", "error"], rows)


def cmd_phi0_check(cfg: Phi0CheckConfig) -> Outcome:
    grid = cfg.grid.build()
    phi0 = build_phi0(cfg.phi.build(grid))
    d = grid.dim
    samples = sampling_S(phi0, cfg.J, cfg.rule)
    delta_err = float(np.max(np.abs(samples.values - IndexedSequence.unit(cfg.J, 0, d).values)))
    half = np.stack(np.meshgrid(*([np.arange(-10, 11) / 2.0] * d), indexing="ij"), axis=-1)
    chi_vals = np.asarray(chi_function(half, d))
    chi_target = np.zeros_like(chi_vals)
    chi_target[(10,) * d] = 1.0
    chi_exact = bool(np.array_equal(chi_vals, chi_target))
    seqs = [IndexedSequence.from_dict(s.payload(max(cfg.J, max(abs(j) for j in s.j)))) for s in cfg.sequences] if d == 1 else []
    if cfg.random is not None:
        rng = np.random.default_rng(cfg.random.seed)
        n = 2 * cfg.random.support + 1
        for _ in range(cfg.random.count):
            vals = rng.standard_normal((n,) * d) + 1j * rng.standard_normal((n,) * d)
            seqs.append(IndexedSequence(cfg.random.support, vals, d))
    rows = []
    for k, c in enumerate(seqs):
        rep = verify_S_T_identity(c, phi0, max(cfg.J, c.J), cfg.identity_tolerance, cfg.rule)
        rows.append({"sequence": k, "max_error": rep["max_error"], "pass": rep["pass"]})
    ok = chi_exact and delta_err <= cfg.phi0_tolerance and all(r["pass"] for r in rows)
    result = {
        "grid": grid.to_dict(),
        "chi_half_integers_exact": chi_exact,
        "half_cell_integrals": {"max_error": delta_err, "tolerance": cfg.phi0_tolerance, "values": samples.to_dict()},
        "identity": rows,
        "identity_tolerance": cfg.identity_tolerance,
    }
    return ok, result, (["sequence", "max_error", "pass"], rows)


HANDLERS: dict[str, Callable[..., Outcome]] = {
    "weights-check": cmd_weights_check,
    "stft-reconstruct": cmd_stft_reconstruct,
    "kernel-roundtrip": cmd_kernel_roundtrip,
    "kothe-report": cmd_kothe_report,
    "bounds-verify": cmd_bounds_verify,
    "phi0-check": cmd_phi0_check,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bbkit", description="Batch numerical checks for weighted time-frequency spaces.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, type=Path)
        s.add_argument("--out", type=Path, default=Path("."))
    s = sub.add_parser("schema", help="write the JSON schema of every command config")
    s.add_argument("--out", type=Path, default=Path("."))
    return p


def run(command: str, payload: Any, out: Path) -> int:
    """Validate, run and write reports; returns the exit code."""
    try:
        cfg = load_config(command, payload)
    except (ValidationError, ValueError) as exc:
        print(f"bbkit {command}: invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    handler = HANDLERS[command]
    table = None
    try:
        if command == "kernel-roundtrip":
            ok, result, table = handler(cfg, out)
        else:
            ok, result, table = handler(cfg)
    except ValueError as exc:
        ok, result = False, {"error": str(exc)}
    elapsed = time.perf_counter() - start
    code = EXIT_OK if ok else EXIT_FAIL
    report = {"command": command, "config": cfg.model_dump(mode="json", by_alias=True), "passed": ok, "exit_code": code, "result": result}
    path = io.write_json(out / f"{command}.json", report)
    if table is not None:
        io.write_csv(out / f"{command}.csv", table[0], table[1])
    io.write_json(out / f"{command}.timing.json", {"elapsed_seconds": elapsed, "finished_at": datetime.now(timezone.utc).isoformat()})
    status = "pass" if ok else "fail"
    detail = f": {result['error']}" if "error" in result else ""
    print(f"bbkit {command}: {status}{detail} -> {path}")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    if args.command == "schema":
        for name, schema in json_schemas().items():
            io.write_json(args.out / f"{name}.schema.json", schema)
        print(f"bbkit schema: wrote {len(COMMANDS)} schemas -> {args.out}")
        return EXIT_OK
    try:
        payload = json.loads(args.config.read_text())
    except OSError as exc:
        print(f"bbkit {args.command}: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"bbkit {args.command}: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(args.command, payload, args.out)


if __name__ == "__main__":
    sys.exit(main())
