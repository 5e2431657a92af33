"""Short-time Fourier transform, its adjoint, reconstruction and continuity bounds.

On a centered grid ``t_n = (n - N/2) h`` the difference ``t_n - x_m`` is the
node ``n - m + N/2``, so every window translate is an exact index shift
(zero outside the box).  The transform in ``xi`` is the Riemann-sum Fourier
transform from :mod:`bbkit.funcgrid`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .funcgrid import (
    Grid,
    SampledFunction,
    _require_same_grid,
    bb_l1_seminorm,
    bb_seminorm,
    dft_along,
    fourier_transform,
    l2_inner,
    reflect,
)
from .reports import BoundReport
from .weights.systems import WeightFunction, WeightSystem
from .weights.tails import QuadratureSpec, shell_fit

BOUND_TOL = 1e-6
PAIRING_RTOL = 1e-6
HYPOTHESIS_RTOL = 1e-12


@dataclass(frozen=True)
class TimeFrequencyArray:
    """Samples ``F(x_m, xi_k)``; axes ``0..d-1`` are ``x``, ``d..2d-1`` are ``xi``."""

    x_grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        expect = self.x_grid.shape + self.x_grid.shape
        if vals.shape != expect:
            raise ValueError(f"array shape {vals.shape} does not match grids {expect}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("time-frequency samples must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def xi_grid(self) -> Grid:
        return self.x_grid.frequency_grid()

    @property
    def dim(self) -> int:
        return self.x_grid.dim

    def __mul__(self, c: complex) -> "TimeFrequencyArray":
        return TimeFrequencyArray(self.x_grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "TimeFrequencyArray") -> "TimeFrequencyArray":
        _require_same_grid(self.x_grid, other.x_grid)
        return TimeFrequencyArray(self.x_grid, self.values + other.values)

    def weighted_sup(self, w=None, v=None) -> float:
        """``sup |F(x, xi)| w(x) v(xi)``."""
        logw = _log_on(w, self.x_grid)
        logv = _log_on(v, self.xi_grid)
        d = self.dim
        mag = np.abs(self.values)
        total = logw.reshape(logw.shape + (1,) * d) + logv.reshape((1,) * d + logv.shape)
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.where(mag > 0, np.exp(np.log(mag) + total), 0.0)
        return float(np.max(vals))


def _log_on(w, grid: Grid) -> np.ndarray:
    if w is None:
        return np.zeros(grid.shape)
    return np.asarray(w.log(grid.points()), dtype=float)


def shifted_window(psi: SampledFunction) -> np.ndarray:
    """``S[m..., n...] = psi(t_n - x_m)`` as a ``2d``-axis array (zero outside the box)."""
    g = psi.grid
    N, d = g.N, g.dim
    idx, valid = [], np.ones((1,) * (2 * d), dtype=bool)
    for i in range(d):
        shape_m = [1] * (2 * d)
        shape_m[i] = N
        shape_n = [1] * (2 * d)
        shape_n[d + i] = N
        k = np.arange(N).reshape(shape_n) - np.arange(N).reshape(shape_m) + N // 2
        valid = valid & (k >= 0) & (k < N)
        idx.append(np.clip(k, 0, N - 1))
    return np.where(valid, psi.values[tuple(idx)], 0.0)


def stft(f: SampledFunction, psi: SampledFunction) -> TimeFrequencyArray:
    """``V_psi f(x, xi) = int f(t) conj(psi(t - x)) exp(-2 pi i xi t) dt``."""
    _require_same_grid(f.grid, psi.grid)
    g = f.grid
    d = g.dim
    prod = f.values.reshape((1,) * d + g.shape) * np.conj(shifted_window(psi))
    return TimeFrequencyArray(g, dft_along(prod, g.h, range(d, 2 * d)))


def adjoint_stft(F: TimeFrequencyArray, psi: SampledFunction) -> SampledFunction:
    """``V*_psi F(t) = iint F(x, xi) exp(2 pi i xi t) psi(t - x) dx dxi``, inner ``xi`` sum first."""
    _require_same_grid(F.x_grid, psi.grid)
    g = F.x_grid
    d = g.dim
    inner = dft_along(F.values, F.xi_grid.h, range(d, 2 * d), inverse=True)
    out = np.sum(inner * shifted_window(psi), axis=tuple(range(d))) * g.h**d
    return SampledFunction(g, out)


def l2_norm(f: SampledFunction) -> float:
    return math.sqrt(max(l2_inner(f, f).real, 0.0))


@dataclass(frozen=True)
class Pairing:
    value: complex
    tolerance: float

    @property
    def is_synthesis(self) -> bool:
        return abs(self.value) > self.tolerance

    def __complex__(self) -> complex:
        return complex(self.value)

    def __abs__(self) -> float:
        return abs(self.value)


def synthesis_pairing(gamma: SampledFunction, psi: SampledFunction) -> Pairing:
    """``(gamma, psi)_{L^2}`` with the tolerance ``1e-6 |gamma| |psi|``."""
    _require_same_grid(gamma.grid, psi.grid)
    return Pairing(l2_inner(gamma, psi), PAIRING_RTOL * l2_norm(gamma) * l2_norm(psi))


@dataclass(frozen=True)
class Reconstruction:
    function: SampledFunction
    error: float
    pairing: complex

    def __iter__(self):
        return iter((self.function, self.error))


def reconstruct(f: SampledFunction, psi: SampledFunction, gamma: SampledFunction) -> Reconstruction:
    """``V*_gamma V_{psi check} f / (gamma, psi check)`` and its sup error against ``f``."""
    _require_same_grid(f.grid, psi.grid)
    psi_c = reflect(psi)
    pair = synthesis_pairing(gamma, psi_c)
    if not pair.is_synthesis:
        raise ValueError(f"zero pairing: |(gamma, psi check)| = {abs(pair.value):.3e} is below {pair.tolerance:.3e}")
    out = adjoint_stft(stft(f, psi_c), gamma).values / pair.value
    err = float(np.max(np.abs(out - f.values))) if out.size else 0.0
    return Reconstruction(f.with_values(out), err, complex(pair.value))


def translate_pairings(psi: SampledFunction) -> np.ndarray:
    """``(psi(. - x_m), psi check)_{L^2}`` for every grid node ``x_m``."""
    g = psi.grid
    d = g.dim
    S = shifted_window(psi)
    target = np.conj(reflect(psi).values).reshape((1,) * d + g.shape)
    return np.sum(S * target, axis=tuple(range(d, 2 * d))) * g.h**d


def find_synthesis_translate(psi: SampledFunction) -> tuple[np.ndarray, complex]:
    """Node ``x*`` maximizing ``|(psi(. - x), psi check)|``; first maximizer in index order."""
    pairings = translate_pairings(psi)
    mag = np.abs(pairings)
    flat = int(np.argmax(mag))
    tol = PAIRING_RTOL * l2_norm(psi) ** 2
    if not mag.flat[flat] > tol:
        raise ValueError("degenerate window: every translate pairing is below tolerance")
    k = np.unravel_index(flat, mag.shape)
    x = psi.grid.points()[k]
    return np.asarray(x, dtype=float), complex(pairings[k])


# continuity bounds -----------------------------------------------------------


def _moderation_excess(w1, w2, w3, grid: Grid, C1: float) -> float:
    """``max log w1(x+y) - log C1 - log w2(x) - log w3(y)`` over grid nodes ``x`` and differences ``y``.

    ``x + y`` then runs through the grid nodes again, which is exactly the set
    of pairs the discrete bounds use.
    """
    pts = grid.points().reshape(-1, grid.dim)
    N, h, d = grid.N, grid.h, grid.dim
    idx = np.stack(np.meshgrid(*([np.arange(N)] * d), indexing="ij"), axis=-1).reshape(-1, d)
    # y = x_m - t_n; x = t_n; x + y = x_m
    lw1 = np.asarray(w1.log(pts))
    lw2 = np.asarray(w2.log(pts))
    worst = -math.inf
    for m in range(len(pts)):
        y = (idx[m][None, :] - idx) * h
        val = lw1[m] - math.log(C1) - lw2 - np.asarray(w3.log(y))
        worst = max(worst, float(np.max(val)))
    return worst


def _square_excess(w0, w1, grid: Grid, C0: float) -> float:
    pts = grid.points().reshape(-1, grid.dim)
    return float(np.max(2.0 * np.asarray(w0.log(pts)) - math.log(C0) - np.asarray(w1.log(pts))))


def _require(ok: bool, message: str) -> None:
    if not ok:
        raise ValueError(f"hypothesis violated on the grid: {message}")


def verify_stft_bound(phi: SampledFunction, psi: SampledFunction, v: Sequence, w: Sequence, C0: float, C1: float, tol: float = BOUND_TOL) -> BoundReport:
    """Weighted sup of ``V_{psi check} phi`` against ``C0 C1 |psi|_{S^{v3}_{w3}} |phi|_{S^{v2}_{w2,1}}``.

    The hypotheses ``v0^2 <= C0 v1``, ``w0^2 <= C0 w1``, ``v1(x+y) <= C1 v2(x) v3(y)``
    and the same for ``w`` are checked on the time (``w``) and frequency (``v``)
    grids first; a violation raises ``ValueError``.
    """
    _require_same_grid(phi.grid, psi.grid)
    v0, v1, v2, v3 = v
    w0, w1, w2, w3 = w
    tg, fg = phi.grid, phi.grid.frequency_grid()
    slack = HYPOTHESIS_RTOL
    _require(_square_excess(w0, w1, tg, C0) <= slack, "w0^2 <= C0 w1")
    _require(_square_excess(v0, v1, fg, C0) <= slack, "v0^2 <= C0 v1")
    _require(_moderation_excess(w1, w2, w3, tg, C1) <= slack, "w1(x+y) <= C1 w2(x) w3(y)")
    _require(_moderation_excess(v1, v2, v3, fg, C1) <= slack, "v1(x+y) <= C1 v2(x) v3(y)")
    V = stft(phi, reflect(psi))
    lhs = V.weighted_sup(w0, v0)
    psi_norm = bb_seminorm(psi, v3, w3).value
    phi_norm = bb_l1_seminorm(phi, v2, w2).value
    rhs = C0 * C1 * psi_norm * phi_norm
    return BoundReport("stft-continuity", lhs, rhs, {"C0": C0, "C1": C1, "psi_S_v3_w3": psi_norm, "phi_S_v2_w2_1": phi_norm}, tol)


def _ratio_norm(num, den, grid: Grid, quad: QuadratureSpec | None) -> float:
    """Riemann sum of ``num/den`` on ``grid``; the far tail must be integrable."""
    quad = quad or QuadratureSpec()

    def log_ratio(p):
        return np.asarray(num.log(p)) - np.asarray(den.log(p))

    fits = [shell_fit(log_ratio, grid.dim, tuple(range(grid.dim)), quad.R_tail, quad)]
    if not all(f.integrable(quad.delta) for f in fits):
        raise ValueError("divergent ratio norm: the weight ratio is not integrable")
    pts = grid.points().reshape(-1, grid.dim)
    with np.errstate(over="ignore"):
        return float(np.sum(np.exp(log_ratio(pts))) * grid.h**grid.dim)


def verify_adjoint_bound(F: TimeFrequencyArray, psi: SampledFunction, v: Sequence, w: Sequence, C1: float, tol: float = BOUND_TOL, quad: QuadratureSpec | None = None) -> BoundReport:
    """``|V*_psi F|_{S^{v1}_{w1}}`` against ``(1/eps1 + 1/eps2) C1 |v2/v0|_1 |w2/w0|_1 |psi|_{S^{v3}_{w3}} |F|_{w0 x v0}``.

    ``eps1, eps2`` are the grid infima of ``v2`` and ``w2``; the ratio norms are
    Riemann sums over the same grids with an integrability check on the tail.
    """
    _require_same_grid(F.x_grid, psi.grid)
    v0, v1, v2, v3 = v
    w0, w1, w2, w3 = w
    tg, fg = F.x_grid, F.xi_grid
    _require(_moderation_excess(w1, w2, w3, tg, C1) <= HYPOTHESIS_RTOL, "w1(x+y) <= C1 w2(x) w3(y)")
    _require(_moderation_excess(v1, v2, v3, fg, C1) <= HYPOTHESIS_RTOL, "v1(x+y) <= C1 v2(x) v3(y)")
    eps1 = float(np.exp(np.min(v2.log(fg.points().reshape(-1, fg.dim)))))
    eps2 = float(np.exp(np.min(w2.log(tg.points().reshape(-1, tg.dim)))))
    _require(eps1 > 0 and eps2 > 0, "inf v2 > 0 and inf w2 > 0")
    rv = _ratio_norm(v2, v0, fg, quad)
    rw = _ratio_norm(w2, w0, tg, quad)
    out = adjoint_stft(F, psi)
    lhs = bb_seminorm(out, v1, w1).value
    psi_norm = bb_seminorm(psi, v3, w3).value
    F_norm = F.weighted_sup(w0, v0)
    rhs = (1.0 / eps1 + 1.0 / eps2) * C1 * rv * rw * psi_norm * F_norm
    consts = {"C1": C1, "eps1": eps1, "eps2": eps2, "v2_over_v0_L1": rv, "w2_over_w0_L1": rw, "psi_S_v3_w3": psi_norm, "F_w0_v0": F_norm}
    return BoundReport("adjoint-continuity", lhs, rhs, consts, tol)


def nuclearity_inequality_check(family: Sequence[SampledFunction], W: WeightSystem, V: WeightSystem, lam: float, mu: float, tol: float = BOUND_TOL, quad: QuadratureSpec | None = None) -> BoundReport:
    """``sum_n |phi_n|_{S^{v^mu}_{w^mu},1} <= C (|w^mu/w^lam|_1 + |v^mu/v^lam|_1)``.

    ``C`` is the larger of ``sup_x sum_n |phi_n(x)| w^lam(x)`` and the same
    frequency-side sum with ``v^lam``; the ratio norms are grid Riemann sums
    and must have integrable tails.
    """
    wl, wm = W.member(lam), W.member(mu)
    vl, vm = V.member(lam), V.member(mu)
    family = list(family)
    if not family:
        return BoundReport("nuclearity-chain", 0.0, 0.0, {"C": 0.0, "size": 0}, tol)
    grid = family[0].grid
    for f in family:
        _require_same_grid(grid, f.grid)
    fg = grid.frequency_grid()
    rw = _ratio_norm(wm, wl, grid, quad)
    rv = _ratio_norm(vm, vl, fg, quad)
    hats = [fourier_transform(f) for f in family]
    lt = np.asarray(wl.log(grid.points()))
    lf = np.asarray(vl.log(fg.points()))
    C_time = float(np.max(sum(np.abs(f.values) for f in family) * np.exp(lt)))
    C_freq = float(np.max(sum(np.abs(f.values) for f in hats) * np.exp(lf)))
    C = max(C_time, C_freq)
    lhs = float(sum(bb_l1_seminorm(f, vm, wm).value for f in family))
    rhs = C * (rw + rv)
    return BoundReport("nuclearity-chain", lhs, rhs, {"C": C, "C_time": C_time, "C_freq": C_freq, "w_ratio_L1": rw, "v_ratio_L1": rv, "lambda": lam, "mu": mu, "size": len(family)}, tol)
