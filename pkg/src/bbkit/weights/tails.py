"""Search domains, quadrature specs and decay-rate fits on outer shells."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .systems import CANDIDATE_LAMBDAS, DEFAULT_LAMBDAS

LogFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SearchSpec:
    """Integer-lattice box ``{k * R/K : |k_i| <= K}`` plus parameter lattices.

    ``K`` defaults to 160 points per half-axis in 1-d and 20 in 2-d.
    """

    radius: float = 16.0
    K: int | None = None
    lambdas: tuple[float, ...] = DEFAULT_LAMBDAS
    candidates: tuple[float, ...] = CANDIDATE_LAMBDAS
    L_candidates: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    rtol: float = 1e-6

    def __post_init__(self):
        if not (self.radius > 0) or (self.K is not None and self.K < 1):
            raise ValueError("empty search domain")
        if not self.lambdas or not self.candidates:
            raise ValueError("empty parameter lattice")

    def halfwidth(self, dim: int) -> int:
        if self.K is not None:
            return int(self.K)
        return {1: 160, 2: 20}.get(dim, 8)

    def step(self, dim: int) -> float:
        return self.radius / self.halfwidth(dim)

    def lattice(self, dim: int, factor: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """Points of the (``factor``-times enlarged) box and their integer indices."""
        K = self.halfwidth(dim) * factor
        ax = np.arange(-K, K + 1)
        idx = np.stack(np.meshgrid(*([ax] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
        return idx * self.step(dim), idx

    def describe(self, dim: int) -> dict:
        return {
            "box": [-self.radius, self.radius],
            "dim": dim,
            "step": self.step(dim),
            "points_per_axis": 2 * self.halfwidth(dim) + 1,
            "lambdas": list(self.lambdas),
            "candidates": list(self.candidates),
        }


@dataclass(frozen=True)
class QuadratureSpec:
    """Riemann box ``[-T, T]^d`` with step ``h`` and a far-shell tail fit."""

    T: float = 20.0
    h: float = 0.05
    R_tail: float = 1e30
    shell: float = 0.8
    delta: float = 0.1
    probes: int = 33

    def __post_init__(self):
        if not (self.T > 0 and self.h > 0 and self.R_tail > 0 and 0 < self.shell < 1):
            raise ValueError("invalid quadrature settings")

    def box(self, dim: int) -> np.ndarray:
        n = int(round(self.T / self.h))
        ax = np.arange(-n, n + 1) * self.h
        return np.stack(np.meshgrid(*([ax] * dim), indexing="ij"), axis=-1).reshape(-1, dim)

    def describe(self) -> dict:
        return {"box": [-self.T, self.T], "h": self.h, "R_tail": self.R_tail, "shell": [self.shell, 1.0], "delta": self.delta}


def directions(dim: int, block: Sequence[int]) -> np.ndarray:
    """Unit probe directions inside a coordinate block (2 in 1-d, 8 in 2-d)."""
    blk = list(block)
    if len(blk) == 1:
        base = np.array([[1.0], [-1.0]])
    elif len(blk) == 2:
        ang = np.arange(8) * (np.pi / 4)
        base = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    else:
        eye = np.eye(len(blk))
        base = np.concatenate([eye, -eye])
    out = np.zeros((base.shape[0], dim))
    out[:, blk] = base
    return out


@dataclass
class TailFit:
    radius: float
    poly_slope: float
    exp_slope: float
    poly_residual: float
    exp_residual: float
    dim: int

    def integrable(self, delta: float) -> bool:
        if not (math.isfinite(self.poly_slope) and math.isfinite(self.exp_slope)):
            return False
        if self.poly_slope <= -(1.0 + delta) * self.dim:
            return True
        return self.exp_slope < 0 and self.exp_residual < self.poly_residual

    def decaying(self, tol: float = 1e-6) -> bool:
        return math.isfinite(self.poly_slope) and self.poly_slope < -tol

    def non_growing(self, tol: float = 1e-8) -> bool:
        return math.isfinite(self.poly_slope) and self.poly_slope <= tol

    def to_dict(self) -> dict:
        return {"radius": self.radius, "poly_slope": self.poly_slope, "exp_slope": self.exp_slope, "block_dim": self.dim}


def _linfit(u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    A = np.stack([u, np.ones_like(u)], axis=-1)
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    scale = max(1.0, float(np.max(np.abs(v))))
    resid = (v - A @ coef) / scale
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def shell_fit(log_f: LogFn, dim: int, block: Sequence[int], R: float, spec: QuadratureSpec) -> TailFit:
    """Fit ``log f`` against ``log(1+r)`` and ``r`` on ``[shell*R, R]`` along block rays.

    The radius is halved until every probe value is finite; the worst (largest)
    slope over directions is kept.
    """
    R = float(R)
    dirs = directions(dim, block)
    for _ in range(400):
        r = np.linspace(spec.shell * R, R, spec.probes)
        pts = r[None, :, None] * dirs[:, None, :]
        with np.errstate(all="ignore"):
            vals = np.asarray(log_f(pts), dtype=float)
        if np.all(np.isfinite(vals)):
            break
        R *= 0.5
    else:
        return TailFit(R, math.inf, math.inf, 0.0, 0.0, len(block))
    polys, exps = [], []
    for row in vals:
        polys.append(_linfit(np.log1p(r), row))
        exps.append(_linfit(r, row))
    i = int(np.argmax([p[0] for p in polys]))
    return TailFit(R, polys[i][0], exps[i][0], polys[i][1], exps[i][1], len(block))


def box_integral(log_f: LogFn, dim: int, spec: QuadratureSpec) -> float:
    pts = spec.box(dim)
    with np.errstate(over="ignore"):
        return float(np.sum(np.exp(log_f(pts))) * spec.h**dim)


def lattice_sort(values: Sequence[float], descending: bool) -> list[float]:
    return sorted(values, reverse=descending)
