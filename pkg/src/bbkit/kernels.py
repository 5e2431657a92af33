"""Bivariate kernels on a product of two 1-d grids: tensor embedding, the
projective bound, the STFT round-trip ``A``, kernel action and low-rank
approximation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .funcgrid import Grid, SampledFunction, _require_same_grid, bb_seminorm, dft_along, reflect
from .reports import BoundReport, KernelRoundTripReport
from .stft import shifted_window, synthesis_pairing

MAX_AXIS = 48
BOUND_TOL = 1e-9


@dataclass(frozen=True)
class BivariateKernel:
    """``K(x1, x2)`` sampled on ``grid1 x grid2``; ``factors`` keeps a separable form if known."""

    grid1: Grid
    grid2: Grid
    values: np.ndarray
    factors: tuple[tuple[SampledFunction, SampledFunction], ...] | None = None

    def __post_init__(self):
        if self.grid1.dim != 1 or self.grid2.dim != 1:
            raise ValueError("kernels are supported on products of 1-d grids only")
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.grid1.N, self.grid2.N):
            raise ValueError(f"values of shape {vals.shape} do not match grids ({self.grid1.N}, {self.grid2.N})")
        if not np.all(np.isfinite(vals)):
            raise ValueError("kernel samples must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def rank(self) -> int | None:
        return None if self.factors is None else len(self.factors)

    def __add__(self, other: "BivariateKernel") -> "BivariateKernel":
        _same_grids(self, other)
        fac = None if self.factors is None or other.factors is None else self.factors + other.factors
        return BivariateKernel(self.grid1, self.grid2, self.values + other.values, fac)

    def __sub__(self, other: "BivariateKernel") -> "BivariateKernel":
        return self + other * -1.0

    def __mul__(self, c: complex) -> "BivariateKernel":
        fac = None if self.factors is None else tuple((p * c, q) for p, q in self.factors)
        return BivariateKernel(self.grid1, self.grid2, self.values * c, fac)

    __rmul__ = __mul__


def _same_grids(a: BivariateKernel, b: BivariateKernel) -> None:
    _require_same_grid(a.grid1, b.grid1)
    _require_same_grid(a.grid2, b.grid2)


def zero_kernel(grid1: Grid, grid2: Grid | None = None) -> BivariateKernel:
    grid2 = grid1 if grid2 is None else grid2
    return BivariateKernel(grid1, grid2, np.zeros((grid1.N, grid2.N)), ())


def tensor_embed(phis: Sequence[SampledFunction], psis: Sequence[SampledFunction], grid1: Grid | None = None, grid2: Grid | None = None) -> BivariateKernel:
    """``sum_k phi_k(x1) psi_k(x2)``; pass the grids when the lists are empty."""
    phis, psis = list(phis), list(psis)
    if len(phis) != len(psis):
        raise ValueError(f"length mismatch: {len(phis)} first factors vs {len(psis)} second factors")
    if not phis:
        if grid1 is None:
            raise ValueError("an empty embedding needs explicit grids")
        return zero_kernel(grid1, grid2)
    g1 = grid1 or phis[0].grid
    g2 = grid2 or psis[0].grid
    vals = np.zeros((g1.N, g2.N), dtype=complex)
    for p, q in zip(phis, psis):
        _require_same_grid(p.grid, g1)
        _require_same_grid(q.grid, g2)
        vals += np.outer(p.values, q.values)
    return BivariateKernel(g1, g2, vals, tuple(zip(phis, psis)))


def _log2(w1, w2, g1: Grid, g2: Grid) -> np.ndarray:
    a = np.zeros(g1.N) if w1 is None else np.asarray(w1.log(g1.points()), dtype=float)
    b = np.zeros(g2.N) if w2 is None else np.asarray(w2.log(g2.points()), dtype=float)
    return a[:, None] + b[None, :]


def _weighted_sup(vals: np.ndarray, logw: np.ndarray) -> float:
    mag = np.abs(vals)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(mag > 0, np.exp(np.log(mag) + logw), 0.0)
    return float(np.max(out))


def kernel_fourier(K: BivariateKernel) -> np.ndarray:
    """2-d Riemann-sum Fourier transform on ``freq(grid1) x freq(grid2)``."""
    return dft_along(dft_along(K.values, K.grid1.h, (0,)), K.grid2.h, (1,))


def kernel_bb_seminorm(K: BivariateKernel, v1=None, w1=None, v2=None, w2=None) -> float:
    """``sup |K| (w1 x w2) + sup |F K| (v1 x v2)``."""
    t = _weighted_sup(K.values, _log2(w1, w2, K.grid1, K.grid2))
    s = _weighted_sup(kernel_fourier(K), _log2(v1, v2, K.grid1.frequency_grid(), K.grid2.frequency_grid()))
    return t + s


def projective_bound_check(phis, psis, v1=None, w1=None, v2=None, w2=None, tol: float = BOUND_TOL, grid1: Grid | None = None, grid2: Grid | None = None) -> BoundReport:
    """``|iota(f)| <= 2 sum_k |phi_k| |psi_k|`` in the tensor and factor seminorms."""
    K = tensor_embed(phis, psis, grid1, grid2)
    lhs = kernel_bb_seminorm(K, v1, w1, v2, w2)
    terms = [bb_seminorm(p, v1, w1).value * bb_seminorm(q, v2, w2).value for p, q in zip(phis, psis)]
    rhs = 2.0 * float(sum(terms))
    return BoundReport("projective-bound", lhs, rhs, {"factor": 2.0, "terms": terms, "rank": len(terms)}, tol)


# round-trip ------------------------------------------------------------------


def _guard(*grids: Grid) -> None:
    for g in grids:
        if g.N > MAX_AXIS:
            raise ValueError(f"memory guard exceeded: {g.N} points per axis > {MAX_AXIS} (4-d array of {g.N ** 4} entries)")


def kernel_stft(K: BivariateKernel, psi1: SampledFunction, psi2: SampledFunction) -> np.ndarray:
    """4-d STFT with window ``psi1 x psi2`` as two nested 1-d STFTs; axes ``(x1, x2, xi1, xi2)``."""
    _guard(K.grid1, K.grid2)
    _require_same_grid(psi1.grid, K.grid1)
    _require_same_grid(psi2.grid, K.grid2)
    S1 = np.conj(shifted_window(psi1))  # (x1, t1)
    S2 = np.conj(shifted_window(psi2))  # (x2, t2)
    # stage 1 over t1: (x1, t1, t2) -> (x1, xi1, t2)
    A = dft_along(S1[:, :, None] * K.values[None, :, :], K.grid1.h, (1,))
    # stage 2 over t2: (x1, xi1, x2, t2) -> (x1, xi1, x2, xi2)
    B = dft_along(A[:, :, None, :] * S2[None, None, :, :], K.grid2.h, (3,))
    return np.transpose(B, (0, 2, 1, 3))


def kernel_adjoint_stft(F: np.ndarray, gamma1: SampledFunction, gamma2: SampledFunction) -> np.ndarray:
    """Nested adjoint of :func:`kernel_stft` with synthesis windows ``gamma1 x gamma2``."""
    g1, g2 = gamma1.grid, gamma2.grid
    _guard(g1, g2)
    if F.shape != (g1.N, g2.N, g1.N, g2.N):
        raise ValueError("time-frequency array does not match the window grids")
    S1 = shifted_window(gamma1)
    S2 = shifted_window(gamma2)
    inner = dft_along(F, g1.frequency_grid().h, (2,), inverse=True)
    inner = dft_along(inner, g2.frequency_grid().h, (3,), inverse=True)  # (x1, x2, t1, t2)
    # sum over x2 first (smaller intermediate), then x1
    half = np.einsum("abij,bj->aij", inner, S2, optimize=True) * g2.h
    return np.einsum("aij,ai->ij", half, S1, optimize=True) * g1.h


def kernel_stft_roundtrip(K: BivariateKernel, psi1: SampledFunction, gamma1: SampledFunction, psi2: SampledFunction, gamma2: SampledFunction) -> tuple[BivariateKernel, KernelRoundTripReport]:
    """``A(K) = (V*_g1 x V*_g2) V_{psi1 check x psi2 check} K / ((g1, psi1 check)(g2, psi2 check))``."""
    _guard(K.grid1, K.grid2)
    p1c, p2c = reflect(psi1), reflect(psi2)
    pair1 = synthesis_pairing(gamma1, p1c)
    pair2 = synthesis_pairing(gamma2, p2c)
    for i, pr in enumerate((pair1, pair2), start=1):
        if not pr.is_synthesis:
            raise ValueError(f"zero pairing on axis {i}: |(gamma, psi check)| = {abs(pr.value):.3e}")
    F = kernel_stft(K, p1c, p2c)
    out = kernel_adjoint_stft(F, gamma1, gamma2) / (pair1.value * pair2.value)
    err = float(np.max(np.abs(out - K.values)))
    tags = {name: f.tag for name, f in (("psi1", psi1), ("gamma1", gamma1), ("psi2", psi2), ("gamma2", gamma2))}
    report = KernelRoundTripReport(K.rank, err, (K.grid1.N, K.grid2.N), tags, (complex(pair1.value), complex(pair2.value)))
    return BivariateKernel(K.grid1, K.grid2, out), report


def kernel_apply(K: BivariateKernel, f: SampledFunction) -> SampledFunction:
    """``(L f)(x1) = h2 sum_{x2} K(x1, x2) f(x2)`` on ``grid1``."""
    _require_same_grid(f.grid, K.grid2)
    return SampledFunction(K.grid1, K.values @ f.values * K.grid2.h)


# separable approximation -----------------------------------------------------


@dataclass
class SeparableApproximation:
    kernel: BivariateKernel
    rank: int
    singular_values: np.ndarray
    residual_frobenius: float
    residual_bb: float
    method: str = "truncated SVD"
    weights: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "method": self.method,
            "residual_frobenius": self.residual_frobenius,
            "residual_bb": self.residual_bb,
            "singular_values": self.singular_values.tolist(),
            "weights": self.weights,
        }


def separable_approximation(K: BivariateKernel, r: int, v1=None, w1=None, v2=None, w2=None) -> SeparableApproximation:
    """Best Frobenius rank-``r`` approximation, re-wrapped as a tensor embedding."""
    N = min(K.grid1.N, K.grid2.N)
    if not 0 <= r <= N:
        raise ValueError(f"rank {r} outside 0..{N}")
    U, s, Vh = np.linalg.svd(K.values, full_matrices=False)
    phis = [SampledFunction(K.grid1, U[:, k] * s[k], "svd") for k in range(r)]
    psis = [SampledFunction(K.grid2, Vh[k, :], "svd") for k in range(r)]
    approx = tensor_embed(phis, psis, K.grid1, K.grid2)
    resid = K - BivariateKernel(K.grid1, K.grid2, approx.values)
    names = {k: getattr(v, "label", "1") if v is not None else "1" for k, v in (("v1", v1), ("w1", w1), ("v2", v2), ("w2", w2))}
    return SeparableApproximation(
        approx,
        r,
        s,
        float(np.linalg.norm(resid.values)),
        kernel_bb_seminorm(resid, v1, w1, v2, w2),
        weights=names,
    )
