"""Acceptance criteria 1 to 10. Each test records one pass/fail line in the terminal summary."""
import math
import time

import numpy as np

import conftest
import oracles
from bbkit.funcgrid import Grid, fourier_transform, library_function
from bbkit.kernels import BivariateKernel, kernel_stft, kernel_stft_roundtrip, projective_bound_check, tensor_embed
from bbkit.kothe import (
    IndexedSequence,
    build_phi0,
    check_kothe_N,
    chi_function,
    kothe_from_system,
    sampling_S,
    verify_S_T_identity,
)
from bbkit.stft import (
    nuclearity_inequality_check,
    reconstruct,
    reflect,
    stft,
    verify_adjoint_bound,
    verify_stft_bound,
)
from bbkit.weights import (
    SearchSpec,
    WeightFunction,
    check_alpha,
    check_condition_M,
    check_condition_N,
    check_gamma,
    library,
    logpower,
    make_exponential_system,
    moderate_inequality_excess,
    nachbin_integrable_majorant,
    nachbin_moderate,
    power,
)

VARIANTS = ("beurling", "roumieu")
W_ABS = make_exponential_system(power(), 1)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def ew(a):
    """``e^{a |x|}``."""
    return WeightFunction.exponential(power(1.0, a), 1) if a else WeightFunction.unit(1)


def random_library_function(rng, grid):
    tag = str(rng.choice(["gaussian", "hermite", "bump"]))
    params = {"center": float(rng.uniform(-1.5, 1.5)), "modulation": float(rng.uniform(-1.5, 1.5))}
    if tag == "gaussian":
        params["scale"] = float(rng.uniform(0.7, 1.5))
    elif tag == "hermite":
        params["order"] = int(rng.integers(0, 4))
    else:
        params["radius"] = float(rng.uniform(1.0, 2.5))
    return library_function(tag, params, grid)


def test_criterion_1_gaussian_reconstruction():
    grid = Grid.from_extent(1, 256, 8.0)
    start = time.perf_counter()
    g = library_function("gaussian", {}, grid)
    err = reconstruct(g, g, g).error
    elapsed = time.perf_counter() - start
    record(1, err <= 1e-5 and elapsed < 5.0, f"reconstruction sup-error {err:.3e} (<= 1e-05), runtime {elapsed:.3f} s (< 5 s)")


def test_criterion_2_self_duality_and_stft_oracle():
    grid = Grid.from_extent(1, 256, 8.0)
    g = library_function("gaussian", {}, grid)
    dual = float(np.max(np.abs(fourier_transform(g).values - g.values)))
    V = stft(g, g)
    t, xi = grid.axis, V.xi_grid.axis
    sub = np.arange(0, 256, 8)
    ref = oracles.direct_stft(oracles.gaussian, oracles.gaussian, t, t[sub], xi[sub])
    stft_err = float(np.max(np.abs(np.abs(V.values[np.ix_(sub, sub)]) - np.abs(ref))))
    record(2, dual <= 1e-10 and stft_err <= 1e-8, f"|F g - g| {dual:.3e} (<= 1e-10), |V_g g| vs oracle on 32x32 {stft_err:.3e} (<= 1e-08)")


def test_criterion_3_stft_and_adjoint_bounds():
    grid = Grid.from_extent(1, 256, 8.0)
    rng = np.random.default_rng(20240601)
    stft_w = [ew(1.0), ew(2.0), ew(2.0), ew(2.0)]
    adj_w = [ew(3.0), ew(1.0), ew(1.0), ew(1.0)]
    failures, slacks = 0, []
    for _ in range(20):
        phi, psi = random_library_function(rng, grid), random_library_function(rng, grid)
        for rep in (
            verify_stft_bound(phi, psi, stft_w, stft_w, 1.0, 1.0),
            verify_adjoint_bound(stft(phi, reflect(psi)), psi, adj_w, adj_w, 1.0),
        ):
            failures += not rep.passed
            slacks.append(rep.slack)
    record(3, failures == 0, f"{len(slacks)} bound reports on 20 random inputs, {failures} failures, min relative slack {min(slacks):.3e}")


def test_criterion_4_condition_checker_coherence():
    total = agree = 0
    mismatches = []
    for name, omega in sorted(library().items()):
        W = make_exponential_system(omega, 1)
        alpha = check_alpha(omega).holds
        for variant in VARIANTS:
            pairs = [("M", check_condition_M(W, variant, method="grid").holds, alpha)]
            if omega.radial:
                pairs.append(("N", check_condition_N(W, variant).holds, check_gamma(omega, variant).holds))
            for cond, lhs, rhs in pairs:
                total += 1
                agree += lhs == rhs
                if lhs != rhs:
                    mismatches.append(f"{name}/{variant}/{cond}")
    record(4, agree == total, f"{agree}/{total} agreements over {len(library())} families, both variants {mismatches or ''}".rstrip())


def test_criterion_5_kothe_system_equivalence():
    total = agree = 0
    for omega in library().values():
        W = make_exponential_system(omega, 1)
        A = kothe_from_system(W)
        for variant in VARIANTS:
            total += 1
            agree += check_kothe_N(A, variant).holds == check_condition_N(W, variant).holds
    (row,) = [w for w in check_kothe_N(kothe_from_system(W_ABS)).witness if w["lambda"] == 1.0]
    sum_err = abs(row["sum"] - oracles.GEOMETRIC_SUM)
    ok = agree == total and row["mu"] == 0.5 and sum_err <= 1e-6
    record(5, ok, f"{agree}/{total} agreements; geometric sum {row['sum']:.10f} (lambda=1, mu={row['mu']}), error {sum_err:.3e} (<= 1e-06)")


def test_criterion_6_phi0_machinery():
    j = np.arange(-10, 11)
    chi = chi_function(j / 2.0)
    chi_ok = bool(np.all(chi == (j == 0).astype(float)))
    phi0 = build_phi0()
    rng = np.random.default_rng(6)
    st_err = 0.0
    for _ in range(20):
        c = IndexedSequence(3, rng.standard_normal(7) + 1j * rng.standard_normal(7))
        st_err = max(st_err, verify_S_T_identity(c, phi0, J=5)["max_error"])
    cells = sampling_S(phi0, 10).values
    cell_err = float(np.max(np.abs(cells - IndexedSequence.unit(10).values)))
    form_err = float(np.max(np.abs(phi0.values - oracles.phi0_gaussian(phi0.grid.axis))))
    ok = chi_ok and st_err <= 1e-5 and cell_err <= 1e-6 and form_err <= 1e-6
    record(6, ok, f"chi(j/2) exact for |j| <= 10: {chi_ok}; S(T c) error {st_err:.3e} (<= 1e-05); half-cell integrals of built phi0 error {cell_err:.3e} (<= 1e-06), vs closed form {form_err:.3e}")


def test_criterion_7_kernel_roundtrip():
    grid = Grid.from_extent(1, 32, 4.0)
    start = time.perf_counter()
    g = library_function("gaussian", {}, grid)
    h1 = library_function("hermite", {"order": 1}, grid)
    errs = []
    for phis, psis in (([g], [g]), ([g, h1], [h1, g])):
        _, rep = kernel_stft_roundtrip(tensor_embed(phis, psis), g, g, g, g)
        errs.append(rep.sup_error)
    g16 = Grid.from_extent(1, 16, 4.0)
    rng = np.random.default_rng(7)
    K = BivariateKernel(g16, g16, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
    nested = kernel_stft(K, library_function("gaussian", {"scale": 1.3}, g16), library_function("hermite", {"order": 1}, g16))
    t = g16.axis
    ref = oracles.direct_kernel_stft(K.values, lambda s: np.exp(-np.pi * (s / 1.3) ** 2), oracles.hermite1, t, t)
    nest_err = float(np.max(np.abs(nested - ref)))
    elapsed = time.perf_counter() - start
    ok = max(errs) <= 1e-3 and nest_err <= 1e-6 and elapsed < 60.0
    record(7, ok, f"round-trip rank-1 {errs[0]:.3e}, rank-2 {errs[1]:.3e} (<= 1e-03); nested vs direct 4-d {nest_err:.3e} (<= 1e-06); runtime {elapsed:.2f} s (< 60 s)")


def test_criterion_8_projective_bound():
    grid = Grid.from_extent(1, 32, 4.0)
    rng = np.random.default_rng(8)
    violations, slacks = 0, []
    for _ in range(20):
        rank = int(rng.integers(1, 4))
        phis = [random_library_function(rng, grid) * complex(*rng.standard_normal(2)) for _ in range(rank)]
        psis = [random_library_function(rng, grid) for _ in range(rank)]
        v1, w1, v2, w2 = (ew(float(a)) for a in rng.uniform(0.0, 1.5, 4))
        rep = projective_bound_check(phis, psis, v1, w1, v2, w2)
        violations += not rep.passed
        slacks.append(rep.slack)
    record(8, violations == 0, f"20 random separable kernels, {violations} violations, min relative slack {min(slacks):.3e}")


def test_criterion_9_nachbin_constructions():
    search = SearchSpec(radius=8.0)
    excess = 0.0
    for w in (WeightFunction.exponential(logpower(), 1, 0.5), WeightFunction.unit(1)):
        wbar = nachbin_moderate(w, W_ABS, 1.0, search=search)
        excess = max(excess, moderate_inequality_excess(w, wbar, W_ABS, 1.0, search))
    majorant = nachbin_integrable_majorant(W_ABS.member(1.0), W_ABS, N_max=8)
    integral = majorant.diagnostics["integral"]
    ok = excess <= 1e-9 and integral <= 1.05 and majorant.depth == 8
    record(9, ok, f"moderate inequality max log-excess over grid pairs {excess:.3e} (<= 1e-09); majorant integral {integral:.6f} (<= 1.05) at N_max=8")


def test_criterion_10_nuclearity_chain():
    grid = Grid.from_extent(1, 256, 8.0)
    family = [library_function("gaussian", {"center": float(j)}, grid) for j in range(-3, 4)]
    rep = nuclearity_inequality_check(family, W_ABS, W_ABS, 0.5, 1.0)
    C = rep.constants.get("C", math.nan)
    record(10, rep.passed, f"translated gaussians (7) lambda=1/2 mu=1: lhs {rep.lhs:.6e} <= rhs {rep.rhs:.6e}, C {C:.6e}, slack {rep.slack:.3e}")
