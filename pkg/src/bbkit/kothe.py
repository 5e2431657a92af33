"""Köthe sets over Z^d, sequence norms, and the sampling/embedding pair (S, T).

``T`` places a sequence as integer translates of a function ``phi0`` whose
half-cell integrals are ``delta_{j,0}``; ``S`` reads a function back through
those half-cell integrals, so ``S(T(c)) = c``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .funcgrid import Grid, SampledFunction, _sinc_profile, dft_along, library_function, shift
from .reports import COUNTEREXAMPLE, NO_COUNTEREXAMPLE, BoundReport, ConditionReport, normalize_variant
from .weights.conditions import DEFAULT_QUAD, DEFAULT_SEARCH, _ordered, check_condition_M
from .weights.systems import WeightSystem
from .weights.tails import QuadratureSpec, SearchSpec, shell_fit

DEFAULT_WINDOW = 5
SUM_WINDOW = 40
PHI0_TOL = 1e-6
ST_TOL = 1e-5


def window_indices(J: int, dim: int) -> np.ndarray:
    """All ``j`` with ``|j_i| <= J`` as an array of shape ``(2J+1,)*dim + (dim,)``."""
    ax = np.arange(-J, J + 1)
    return np.stack(np.meshgrid(*([ax] * dim), indexing="ij"), axis=-1)


@dataclass(frozen=True)
class IndexedSequence:
    """Complex values ``c_j`` on the box ``|j_i| <= J`` of ``Z^d``."""

    J: int
    values: np.ndarray
    dim: int = 1

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (2 * self.J + 1,) * self.dim:
            raise ValueError(f"values of shape {vals.shape} do not fill the window |j| <= {self.J} in dimension {self.dim}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sequence values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, J: int, dim: int = 1) -> "IndexedSequence":
        return cls(J, np.zeros((2 * J + 1,) * dim), dim)

    @classmethod
    def unit(cls, J: int, j: Sequence[int] | int = 0, dim: int = 1) -> "IndexedSequence":
        v = np.zeros((2 * J + 1,) * dim, dtype=complex)
        jj = (int(j),) * dim if np.isscalar(j) else tuple(int(k) for k in j)
        v[tuple(k + J for k in jj)] = 1.0
        return cls(J, v, dim)

    def indices(self) -> np.ndarray:
        return window_indices(self.J, self.dim)

    def __getitem__(self, j) -> complex:
        jj = (int(j),) if np.isscalar(j) else tuple(int(k) for k in j)
        return complex(self.values[tuple(k + self.J for k in jj)])

    def __add__(self, other: "IndexedSequence") -> "IndexedSequence":
        _same_window(self, other)
        return IndexedSequence(self.J, self.values + other.values, self.dim)

    def __mul__(self, c: complex) -> "IndexedSequence":
        return IndexedSequence(self.J, self.values * c, self.dim)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        idx = self.indices().reshape(-1, self.dim)
        flat = self.values.reshape(-1)
        j = idx[:, 0].tolist() if self.dim == 1 else idx.tolist()
        return {"j": j, "re": flat.real.tolist(), "im": flat.imag.tolist()}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "IndexedSequence":
        """Entries not listed are zero; the window is the smallest box holding every listed ``j``."""
        j = np.asarray(payload["j"], dtype=int)
        if j.ndim == 1:
            j = j[:, None]
        re = np.asarray(payload.get("re", np.zeros(len(j))), dtype=float)
        im = np.asarray(payload.get("im", np.zeros(len(j))), dtype=float)
        if not (len(j) == len(re) == len(im)):
            raise ValueError("j, re and im must have equal lengths")
        dim = j.shape[1]
        J = int(np.max(np.abs(j))) if j.size else 0
        J = int(payload.get("J", J))
        vals = np.zeros((2 * J + 1,) * dim, dtype=complex)
        for row, a, b in zip(j, re, im):
            if np.any(np.abs(row) > J):
                raise ValueError("index outside the declared window")
            vals[tuple(row + J)] = a + 1j * b
        return cls(J, vals, dim)


def _same_window(a: IndexedSequence, b: IndexedSequence) -> None:
    if a.J != b.J or a.dim != b.dim:
        raise ValueError(f"window mismatch: |j|<={a.J} (d={a.dim}) vs |j|<={b.J} (d={b.dim})")


def l1_norm(c: IndexedSequence, a: IndexedSequence) -> float:
    """``sum_j |c_j| a_j``."""
    _same_window(c, a)
    return float(np.sum(np.abs(c.values) * a.values.real))


def linf_norm(c: IndexedSequence, a: IndexedSequence) -> float:
    """``sup_j |c_j| a_j``."""
    _same_window(c, a)
    return float(np.max(np.abs(c.values) * a.values.real))


# Köthe sets ------------------------------------------------------------------


@dataclass
class KotheSet:
    """``lam -> (a^lam_j)`` given through ``log a`` at (integer) points of ``R^d``."""

    log_a: Callable[[float, np.ndarray], np.ndarray]
    J: int = DEFAULT_WINDOW
    dim: int = 1
    lambdas: tuple[float, ...] = DEFAULT_SEARCH.lambdas
    label: str = "A"
    blocks: list = field(default_factory=list)
    valid_radius: Callable[[float], float] = lambda lam: math.inf

    def __post_init__(self):
        if not self.blocks:
            self.blocks = [tuple(range(self.dim))]

    def sequence(self, lam: float, J: int | None = None) -> IndexedSequence:
        J = self.J if J is None else J
        vals = np.exp(self.log_a(lam, window_indices(J, self.dim).astype(float)))
        if np.any(~(vals > 0)):
            raise ValueError("Köthe weights must be positive")
        return IndexedSequence(J, vals, self.dim)


def kothe_from_system(W: WeightSystem, J: int = DEFAULT_WINDOW, lambdas: Sequence[float] | None = None) -> KotheSet:
    """``A_W = {(w^lam(j))_j}``."""
    return KotheSet(W.log_weight, J, W.dim, tuple(lambdas or DEFAULT_SEARCH.lambdas), f"A[{W.label}]", list(W.blocks), W.valid_radius)


def check_kothe_N(A: KotheSet, variant: str = "beurling", quad: QuadratureSpec | None = None, search: SearchSpec | None = None, window: int = SUM_WINDOW) -> ConditionReport:
    """``a^lam / a^mu`` in ``l^1``: window sum over ``|j| <= window`` plus the far-shell decay fit."""
    variant = normalize_variant(variant)
    quad = quad or DEFAULT_QUAD
    search = search or SearchSpec(lambdas=A.lambdas)
    idx = window_indices(window, A.dim).reshape(-1, A.dim).astype(float)
    rows, failures = [], []
    for fixed in search.lambdas:
        cands = _ordered(search.candidates, fixed, descending=(variant == "beurling"), strict=True)
        found, last = None, None
        for cand in cands:
            lam, mu = (fixed, cand) if variant == "beurling" else (cand, fixed)

            def log_ratio(p, lam=lam, mu=mu):
                return A.log_a(lam, p) - A.log_a(mu, p)

            R = min(quad.R_tail, A.valid_radius(lam), A.valid_radius(mu))
            fits = [shell_fit(log_ratio, A.dim, blk, math.floor(R), quad) for blk in A.blocks]
            entry = {"lambda": lam, "mu": mu, "tail": [f.to_dict() for f in fits]}
            if all(f.integrable(quad.delta) for f in fits):
                with np.errstate(over="ignore"):
                    entry["sum"] = float(np.sum(np.exp(log_ratio(idx))))
                found = entry
                break
            last = entry
        if found is None:
            failures.append(last or {"fixed": fixed})
        else:
            rows.append(found)
    info = dict(quad.describe(), window=window, lattice=list(search.lambdas), method="window sum + tail fit")
    if failures:
        return ConditionReport("N-kothe", variant, COUNTEREXAMPLE, rows, failures, info)
    return ConditionReport("N-kothe", variant, NO_COUNTEREXAMPLE, rows, None, info)


# chi, phi0, S and T ----------------------------------------------------------


def chi_function(x, dim: int = 1) -> np.ndarray | float:
    """``prod_i sin(2 pi x_i)/(2 pi x_i)``: 1 at the origin and exactly 0 at the other half-integer points.

    ``x`` holds points along the last axis; in 1-d any array is a batch of scalars.
    """
    arr = np.asarray(x, dtype=float)
    if dim == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    elif arr.ndim == 0 or arr.shape[-1] != dim:
        raise ValueError(f"points must have a trailing axis of length {dim}")
    out = np.prod(_sinc_profile(arr), axis=-1)
    return float(out) if out.ndim == 0 else out


def default_phi0_grid(dim: int = 1) -> Grid:
    return Grid.from_extent(dim, 512 if dim == 1 else 128, 16.0 if dim == 1 else 4.0)


def spectral_derivative(f: SampledFunction, axis: int) -> SampledFunction:
    """``d f / d t_axis`` by multiplying with ``2 pi i xi`` (Nyquist mode dropped)."""
    g = f.grid
    F = dft_along(f.values, g.h, (axis,))
    xi = g.frequency_grid().axis.copy()
    xi[0] = 0.0  # Nyquist bin has no symmetric partner
    shape = [1] * g.dim
    shape[axis] = g.N
    F = F * (2j * np.pi * xi.reshape(shape))
    return f.with_values(dft_along(F, 1.0 / (g.N * g.h), (axis,), inverse=True))


def build_phi0(phi: SampledFunction | None = None, grid: Grid | None = None) -> SampledFunction:
    """``phi0 = (-1)^d d_d ... d_1 (phi chi)`` for ``phi`` with ``phi(0) = 1``.

    Defaults to the unit Gaussian on a 512-point grid of half-width 16 (1-d).
    """
    if phi is None:
        phi = library_function("gaussian", {}, grid or default_phi0_grid(1))
    g = phi.grid
    if abs(phi.at_origin() - 1.0) > PHI0_TOL:
        raise ValueError(f"phi(0) = {phi.at_origin():.6g} but the construction needs phi(0) = 1")
    psi = phi.with_values(phi.values * chi_function(g.points(), g.dim))
    for ax in range(g.dim):
        psi = spectral_derivative(psi, ax)
    out = psi * ((-1.0) ** g.dim)
    return SampledFunction(g, out.values, "phi0")


def _half_cell_kernel(grid: Grid, J: int) -> np.ndarray:
    """``K[j, k] = int_j^{j+1/2} exp(2 pi i xi_k x) dx`` times the frequency step."""
    xi = grid.frequency_grid().axis
    j = np.arange(-J, J + 1, dtype=float)[:, None]
    z = 2j * np.pi * xi[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (np.exp(z * (j + 0.5)) - np.exp(z * j)) / z
    K[:, xi == 0.0] = 0.5
    K[:, 0] = 0.0  # Nyquist bin, consistent with the spectral derivative
    return K / (grid.N * grid.h)


def _check_window(grid: Grid, J: int, margin: float) -> None:
    if J + margin > grid.T:
        raise ValueError(f"window |j| <= {J} with margin {margin} does not fit in the box of half-width {grid.T}")


def sampling_S(phi: SampledFunction, J: int = DEFAULT_WINDOW, rule: str = "spectral") -> IndexedSequence:
    """``(int_{[0,1/2]^d} phi(x + j) dx)_{|j| <= J}``.

    ``rule="spectral"`` integrates the trigonometric interpolant of the samples
    exactly; ``rule="trapezoid"`` uses the grid nodes inside each half cell.
    """
    g = phi.grid
    if g.h > 1.0 / 8.0:
        raise ValueError(f"insufficient resolution: h = {g.h} > 1/8")
    _check_window(g, J, 0.5)
    d = g.dim
    if rule == "spectral":
        F = dft_along(phi.values, g.h, range(d))
        K = _half_cell_kernel(g, J)
        out = F
        for _ in range(d):
            # contract the leading frequency axis, append the j axis at the end
            out = np.tensordot(out, K, axes=([0], [1]))
        return IndexedSequence(J, out, d)
    if rule == "trapezoid":
        m = 1.0 / (2.0 * g.h)
        if abs(m - round(m)) > 1e-9:
            raise ValueError("the trapezoid rule needs 1/(2h) to be an integer")
        m = int(round(m))
        w = np.ones(m + 1)
        w[0] = w[-1] = 0.5
        w = w * g.h
        c = g.N // 2
        starts = c + np.arange(-J, J + 1) * 2 * m
        out = phi.values
        for ax in range(d):
            sel = starts[:, None] + np.arange(m + 1)[None, :]
            out = np.moveaxis(out, ax, 0)[sel]
            out = np.tensordot(w, out, axes=([0], [1]))
            out = np.moveaxis(out, 0, ax)
        return IndexedSequence(J, out, d)
    raise ValueError(f"unknown quadrature rule {rule!r}")


def embedding_T(c: IndexedSequence, phi0: SampledFunction, margin: float = 6.0) -> SampledFunction:
    """``sum_j c_j phi0(. - j)`` by exact index shifts (requires ``1/h`` integral)."""
    g = phi0.grid
    if c.dim != g.dim:
        raise ValueError("sequence and function dimensions differ")
    steps = 1.0 / g.h
    if abs(steps - round(steps)) > 1e-9:
        raise ValueError("integer translates need 1/h to be an integer")
    steps = int(round(steps))
    support = np.argwhere(np.abs(c.values) > 0) - c.J
    if len(support):
        _check_window(g, int(np.max(np.abs(support))), margin)
    out = np.zeros(g.shape, dtype=complex)
    for j in support:
        out = out + c.values[tuple(j + c.J)] * shift(phi0, tuple(int(k) * steps for k in j)).values
    return SampledFunction(g, out)


def verify_S_T_identity(c: IndexedSequence, phi0: SampledFunction, J: int | None = None, tol: float = ST_TOL, rule: str = "spectral") -> dict:
    """``max_j |S(T(c))_j - c_j|`` on the window, with a pass flag at ``tol``."""
    J = c.J if J is None else J
    if J < c.J and np.any(np.abs(c.values) > 0):
        inner = c.values[tuple([slice(c.J - J, c.J + J + 1)] * c.dim)]
        if np.sum(np.abs(inner)) != np.sum(np.abs(c.values)):
            raise ValueError("sequence support exceeds the comparison window")
    recovered = sampling_S(embedding_T(c, phi0), J, rule)
    target = np.zeros_like(recovered.values)
    lo = max(0, c.J - J)
    src = c.values[tuple([slice(lo, lo + min(2 * J + 1, 2 * c.J + 1))] * c.dim)]
    off = max(0, J - c.J)
    target[tuple([slice(off, off + src.shape[0])] * c.dim)] = src
    err = float(np.max(np.abs(recovered.values - target)))
    return {"max_error": err, "tolerance": tol, "pass": err <= tol, "window": J, "rule": rule}


def embedding_T_bound(c: IndexedSequence, phi0: SampledFunction, W: WeightSystem, lam: float, search: SearchSpec | None = None) -> BoundReport:
    """``|T c|_{w^lam} <= C |phi0|_{w^nu} |c|_{l^1(a^mu)}`` with ``(mu, nu, C)`` a moderation witness for ``lam``."""
    rep = check_condition_M(W, "beurling", SearchSpec(lambdas=(lam,)) if search is None else search, method="auto")
    rows = [r for r in (rep.witness or []) if r.get("lambda") == lam]
    if not rep.holds or not rows:
        raise ValueError(f"no moderation witness for lambda={lam}")
    mu, nu, C = rows[0]["mu"], rows[0]["nu"], rows[0]["C"]
    from .funcgrid import sup_seminorm

    Tc = embedding_T(c, phi0)
    lhs = sup_seminorm(Tc, W.member(lam)).value
    a_mu = kothe_from_system(W, c.J).sequence(mu)
    phi_norm = sup_seminorm(phi0, W.member(nu)).value
    rhs = C * phi_norm * l1_norm(c, a_mu)
    return BoundReport("embedding-continuity", lhs, rhs, {"lambda": lam, "mu": mu, "nu": nu, "C": C, "phi0_w_nu": phi_norm}, 1e-9)
