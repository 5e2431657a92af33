"""Sampled functions on centered uniform grids.

Conventions
-----------
A grid in ``d`` dimensions has ``N`` nodes per axis (``N`` a power of two)
with spacing ``h``; node ``n`` sits at ``t_n = (n - N/2) h`` so node 0 is
exactly ``-T`` with ``T = N h / 2``.  The Fourier transform is::

    F(f)(xi) = integral f(t) exp(-2 pi i xi . t) dt

approximated by the Riemann sum over the grid.  On the frequency grid
``xi_k = (k - N/2) / (N h)`` this sum is a DFT with a centered phase
correction, which for even ``N`` reduces to ``ifftshift`` before and
``fftshift`` after the transform, times ``h^d``.  The frequency grid is
itself a :class:`Grid` with spacing ``1 / (N h)``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import scipy.fft as sfft
from scipy.special import eval_hermite


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by the BBKIT_THREADS variable."""
    raw = os.environ.get("BBKIT_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class Grid:
    """Centered uniform grid with ``N`` nodes per axis and spacing ``h``."""

    dim: int
    N: int
    h: float

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        # spacing round-trips through 1/(N h), so compare with a relative tolerance
        return (
            self.dim == other.dim
            and self.N == other.N
            and abs(self.h - other.h) <= 1e-12 * max(self.h, other.h)
        )

    def __hash__(self) -> int:
        return hash((self.dim, self.N, round(self.h, 10)))

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"grid dimension must be >= 1, got {self.dim}")
        if not _is_power_of_two(int(self.N)) or self.N < 2:
            raise ValueError(f"points per axis must be a power of two, got {self.N}")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")

    @classmethod
    def from_extent(cls, dim: int, N: int, T: float) -> "Grid":
        """Grid covering ``[-T, T)`` per axis with ``N`` nodes."""
        return cls(dim, N, 2.0 * T / N)

    @property
    def T(self) -> float:
        return self.N * self.h / 2.0

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.dim

    @property
    def cell(self) -> float:
        """Quadrature weight ``h^d``."""
        return self.h**self.dim

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * self.h

    @property
    def center_index(self) -> tuple[int, ...]:
        return (self.N // 2,) * self.dim

    def points(self) -> np.ndarray:
        """Node coordinates with shape ``shape + (dim,)``."""
        axes = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack(axes, axis=-1)

    def frequency_grid(self) -> "Grid":
        return Grid(self.dim, self.N, 1.0 / (self.N * self.h))

    def to_dict(self) -> dict:
        return {"d": self.dim, "N": self.N, "h": self.h}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "Grid":
        return cls(int(payload["d"]), int(payload["N"]), float(payload["h"]))


@dataclass(frozen=True)
class SampledFunction:
    """Complex samples of a function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray
    tag: str | None = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {values.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray, tag: str | None = None) -> "SampledFunction":
        return SampledFunction(self.grid, values, tag)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        _require_same_grid(self.grid, other.grid)
        return SampledFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        _require_same_grid(self.grid, other.grid)
        return SampledFunction(self.grid, self.values - other.values)

    def __mul__(self, c: complex) -> "SampledFunction":
        return SampledFunction(self.grid, c * self.values, self.tag)

    __rmul__ = __mul__

    def at_origin(self) -> complex:
        return complex(self.values[self.grid.center_index])


def _require_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def zeros(grid: Grid) -> SampledFunction:
    return SampledFunction(grid, np.zeros(grid.shape, dtype=complex), "zero")


def reflect(f: SampledFunction) -> SampledFunction:
    """Samples of ``t -> f(-t)``; node 0 (``t = -T``) maps to itself."""
    v = f.values
    for ax in range(f.grid.dim):
        v = np.roll(np.flip(v, axis=ax), 1, axis=ax)
    return SampledFunction(f.grid, v, f.tag)


def shift(f: SampledFunction, nodes: Sequence[int] | int) -> SampledFunction:
    """Samples of ``t -> f(t - k h)``, zero-filled outside the box."""
    if np.isscalar(nodes):
        nodes = (int(nodes),) * f.grid.dim
    v = f.values
    for ax, k in enumerate(nodes):
        v = _shift_axis(v, int(k), ax)
    return SampledFunction(f.grid, v)


def _shift_axis(v: np.ndarray, k: int, axis: int) -> np.ndarray:
    out = np.zeros_like(v)
    n = v.shape[axis]
    if abs(k) >= n:
        return out
    src = [slice(None)] * v.ndim
    dst = [slice(None)] * v.ndim
    if k >= 0:
        src[axis], dst[axis] = slice(0, n - k), slice(k, n)
    else:
        src[axis], dst[axis] = slice(-k, n), slice(0, n + k)
    out[tuple(dst)] = v[tuple(src)]
    return out


# ---------------------------------------------------------------------------
# Fourier transform


def dft_along(values: np.ndarray, h: float, axes: Sequence[int], inverse: bool = False) -> np.ndarray:
    """Centered continuous-FT approximation along ``axes`` of an array.

    All listed axes must have the same even length ``N`` and spacing ``h``.
    """
    axes = tuple(axes)
    if not axes:
        return np.asarray(values, dtype=complex)
    k = len(axes)
    N = values.shape[axes[0]]
    x = sfft.ifftshift(values, axes=axes)
    if inverse:
        # ifftn divides by N^k; the Riemann sum weight is h^k
        x = sfft.ifftn(x, axes=axes, workers=fft_workers()) * (N * h) ** k
    else:
        x = sfft.fftn(x, axes=axes, workers=fft_workers()) * h**k
    return sfft.fftshift(x, axes=axes)


def fourier_transform(f: SampledFunction) -> SampledFunction:
    """Riemann-sum Fourier transform; the result lives on the frequency grid."""
    g = f.grid
    out = dft_along(f.values, g.h, range(g.dim))
    return SampledFunction(g.frequency_grid(), out)


def inverse_fourier(F: SampledFunction, grid: Grid | None = None) -> SampledFunction:
    """Inverse of :func:`fourier_transform` (``exp(+2 pi i xi . t)`` kernel).

    ``F`` must live on a frequency grid; pass ``grid`` to assert the target
    spatial grid.
    """
    target = F.grid.frequency_grid()
    if grid is not None and grid != target:
        raise ValueError(f"grid mismatch: {F.grid} is not the frequency grid of {grid}")
    out = dft_along(F.values, F.grid.h, range(F.grid.dim), inverse=True)
    return SampledFunction(target, out)


# ---------------------------------------------------------------------------
# Weighted seminorms


@dataclass(frozen=True)
class SeminormValue:
    value: float
    kind: str  # "sup", "l1", "bb", "bb-l1"
    time_part: float | None = None
    freq_part: float | None = None
    weights: tuple[str, ...] = ()

    def __float__(self) -> float:
        return self.value


def _log_weight_on(w, grid: Grid) -> np.ndarray:
    if w is None:
        return np.zeros(grid.shape)
    if getattr(w, "dim", grid.dim) != grid.dim:
        raise ValueError(f"weight dimension {w.dim} does not match grid dimension {grid.dim}")
    return np.asarray(w.log(grid.points()), dtype=float)


def _weighted_abs(f: SampledFunction, w) -> np.ndarray:
    mag = np.abs(f.values)
    logw = _log_weight_on(w, f.grid)
    with np.errstate(divide="ignore"):
        out = np.exp(np.log(mag) + logw)
    return np.where(mag == 0.0, 0.0, out)


def _describe(w) -> str:
    return "1" if w is None else getattr(w, "label", repr(w))


def sup_seminorm(f: SampledFunction, w=None) -> SeminormValue:
    """``max |f| w`` over the grid nodes; ``w=None`` means the unit weight."""
    return SeminormValue(float(np.max(_weighted_abs(f, w))), "sup", weights=(_describe(w),))


def l1_seminorm(f: SampledFunction, w=None) -> SeminormValue:
    """Riemann sum ``h^d sum |f| w``."""
    val = f.grid.cell * float(np.sum(_weighted_abs(f, w)))
    return SeminormValue(val, "l1", weights=(_describe(w),))


def bb_seminorm(f: SampledFunction, v=None, w=None) -> SeminormValue:
    """``||f||_w + ||F f||_v``: time part weighted by ``w``, frequency part by ``v``."""
    t = sup_seminorm(f, w).value
    s = sup_seminorm(fourier_transform(f), v).value
    return SeminormValue(t + s, "bb", t, s, (_describe(w), _describe(v)))


def bb_l1_seminorm(f: SampledFunction, v=None, w=None) -> SeminormValue:
    """Integrable counterpart ``||f||_{w,1} + ||F f||_{v,1}``."""
    t = l1_seminorm(f, w).value
    s = l1_seminorm(fourier_transform(f), v).value
    return SeminormValue(t + s, "bb-l1", t, s, (_describe(w), _describe(v)))


def l2_inner(f: SampledFunction, g: SampledFunction) -> complex:
    """``h^d sum f conj(g)``."""
    _require_same_grid(f.grid, g.grid)
    return complex(f.grid.cell * np.sum(f.values * np.conj(g.values)))


# ---------------------------------------------------------------------------
# Library of closed-form test functions


def _vec(value, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(dim, float(arr[0]))
    if arr.shape != (dim,):
        raise ValueError(f"expected a scalar or a length-{dim} vector, got {value!r}")
    return arr


def _hermite_profile(u: np.ndarray, order: int) -> np.ndarray:
    # H_n(sqrt(2 pi) u) exp(-pi u^2), scaled so the leading term is u^n
    scale = (2.0 * np.sqrt(2.0 * np.pi)) ** order
    return eval_hermite(order, np.sqrt(2.0 * np.pi) * u) * np.exp(-np.pi * u * u) / scale


def _sinc_profile(x: np.ndarray) -> np.ndarray:
    # sin(2 pi x) / (2 pi x), exact zeros at nonzero half-integers
    u = 2.0 * np.asarray(x, dtype=float)
    r = u - 2.0 * np.round(u / 2.0)
    s = np.where(r == np.round(r), 0.0, np.sin(np.pi * r))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = s / (np.pi * u)
    return np.where(u == 0.0, 1.0, out)


def _bump_profile(u: np.ndarray) -> np.ndarray:
    inside = np.abs(u) < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        val = np.exp(1.0 - 1.0 / np.where(inside, 1.0 - u * u, 1.0))
    return np.where(inside, val, 0.0)


LIBRARY_TAGS = ("zero", "gaussian", "hermite", "chi", "bump")


def closed_form(tag: str, params: Mapping[str, Any] | None = None, dim: int = 1) -> Callable[[np.ndarray], np.ndarray]:
    """Closed-form evaluator ``points (..., dim) -> complex values``.

    Tags and parameters:

    * ``gaussian``: ``amplitude * exp(2 pi i b.t) exp(-pi |(t - a)/s|^2)`` with
      ``center`` a, ``modulation`` b, ``scale`` s (time-frequency shifted
      Gaussian; the defaults give ``exp(-pi t^2)``).
    * ``hermite``: ``order`` n per axis, same shift parameters; the profile is
      ``H_n(sqrt(2 pi) t) exp(-pi t^2)`` normalized to leading term ``t^n``, so
      order 1 is ``t exp(-pi t^2)``.
    * ``chi``: ``prod_i sin(2 pi x_i) / (2 pi x_i)``.
    * ``bump``: ``prod_i exp(1 - 1/(1 - (t_i/radius)^2))`` on ``|t_i| < radius``.
    * ``zero``.
    """
    p = dict(params or {})
    if tag not in LIBRARY_TAGS:
        raise ValueError(f"unknown library function {tag!r}; known: {', '.join(LIBRARY_TAGS)}")
    amp = complex(p.pop("amplitude", 1.0))
    a = _vec(p.pop("center", 0.0), dim)
    b = _vec(p.pop("modulation", 0.0), dim)
    s = _vec(p.pop("scale", 1.0), dim)
    order = np.atleast_1d(np.asarray(p.pop("order", 0), dtype=int))
    if order.size == 1:
        order = np.full(dim, int(order[0]))
    radius = float(p.pop("radius", 1.0))
    if p:
        raise ValueError(f"unknown parameters for {tag!r}: {sorted(p)}")

    def evaluate(points: np.ndarray) -> np.ndarray:
        t = np.asarray(points, dtype=float)
        if t.shape[-1] != dim:
            raise ValueError(f"points have dimension {t.shape[-1]}, expected {dim}")
        if tag == "zero":
            return np.zeros(t.shape[:-1], dtype=complex)
        u = (t - a) / s
        if tag == "gaussian":
            prof = np.exp(-np.pi * np.sum(u * u, axis=-1))
        elif tag == "hermite":
            prof = np.ones(t.shape[:-1])
            for i in range(dim):
                prof = prof * _hermite_profile(u[..., i], int(order[i]))
        elif tag == "chi":
            prof = np.prod(_sinc_profile(t), axis=-1)
            return amp * prof.astype(complex)
        else:  # bump
            prof = np.prod(_bump_profile(t / radius), axis=-1)
            return amp * prof.astype(complex)
        phase = np.exp(2j * np.pi * np.sum(b * t, axis=-1))
        return amp * phase * prof

    return evaluate


def library_function(tag: str, params: Mapping[str, Any] | None = None, grid: Grid | None = None) -> SampledFunction:
    """Sample a closed-form library function on ``grid``."""
    if grid is None:
        raise ValueError("a grid is required")
    values = closed_form(tag, params, grid.dim)(grid.points())
    return SampledFunction(grid, values, tag, dict(params or {}))
