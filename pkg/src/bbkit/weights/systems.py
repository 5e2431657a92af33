"""Weight functions and monotone weight function systems, worked in log-space."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .expr import WeightExpr, as_points, from_config

LogFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_LAMBDAS = tuple(2.0**k for k in range(-6, 7))
CANDIDATE_LAMBDAS = tuple(2.0**k for k in range(-10, 11))


@dataclass(frozen=True)
class WeightFunction:
    """A positive function on R^d, stored through its logarithm.

    ``mode`` is ``"raw"`` (the value of an expression itself),
    ``"exponential"`` (``exp(omega/lam)``) or ``"custom"``.
    """

    dim: int
    log_fn: LogFn
    label: str = ""
    mode: str = "custom"
    expr: WeightExpr | None = None
    lam: float | None = None

    def log(self, x) -> np.ndarray:
        return np.asarray(self.log_fn(as_points(x, self.dim)), dtype=float)

    def __call__(self, x) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log(x))

    @classmethod
    def raw(cls, expr: WeightExpr, dim: int = 1) -> "WeightFunction":
        def log_fn(p):
            with np.errstate(divide="ignore"):
                return np.log(expr(p, dim))
        return cls(dim, log_fn, expr.describe(), "raw", expr)

    @classmethod
    def exponential(cls, expr: WeightExpr, dim: int = 1, lam: float = 1.0) -> "WeightFunction":
        if not lam > 0:
            raise ValueError("lambda must be positive")
        return cls(dim, lambda p: expr(p, dim) / lam, f"exp({expr.describe()}/{lam:g})", "exponential", expr, lam)

    @classmethod
    def member(cls, system: "WeightSystem", lam: float) -> "WeightFunction":
        return cls(system.dim, lambda p: system.log_weight(lam, p), f"{system.label}[{lam:g}]", "custom", lam=lam)

    @classmethod
    def unit(cls, dim: int = 1) -> "WeightFunction":
        return cls(dim, lambda p: np.zeros(p.shape[:-1]), "1", "custom")

    @classmethod
    def from_log(cls, dim: int, log_fn: LogFn, label: str = "") -> "WeightFunction":
        return cls(dim, log_fn, label, "custom")


def eval_weight(w: WeightFunction, x) -> np.ndarray | float:
    """``w(x)``; a single point returns a float."""
    pts = as_points(x, w.dim)
    val = w(pts)
    return float(val) if pts.ndim == 1 else val


class WeightSystem:
    """Family ``lam -> w^lam`` with ``w^lam <= w^mu`` whenever ``mu <= lam``."""

    dim: int = 1
    label: str = "W"

    def log_weight(self, lam: float, x) -> np.ndarray:
        raise NotImplementedError

    def weight(self, lam: float, x) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_weight(lam, x))

    def member(self, lam: float) -> WeightFunction:
        return WeightFunction.member(self, lam)

    def valid_radius(self, lam: float) -> float:
        """Radius inside which ``log_weight`` is exact (finite representations)."""
        return math.inf

    @property
    def blocks(self) -> list[tuple[int, ...]]:
        """Coordinate groups on which the system factorizes."""
        return [tuple(range(self.dim))]

    @property
    def radial(self) -> bool:
        return False

    @property
    def generator(self) -> WeightExpr | None:
        return None

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return lam


class ExponentialSystem(WeightSystem):
    """``W_omega = {exp(omega/lam)}``."""

    def __init__(self, omega: WeightExpr, dim: int = 1):
        self.omega = omega
        self.dim = int(dim)
        self.label = f"W[{omega.describe()}]"

    def log_weight(self, lam, x):
        return self.omega(as_points(x, self.dim), self.dim) / _check_lam(lam)

    def valid_radius(self, lam):
        return self.omega.valid_radius

    @property
    def radial(self):
        return self.omega.radial

    @property
    def generator(self):
        return self.omega

    def to_dict(self):
        return {"kind": "exponential", "dim": self.dim, "omega": self.omega.to_dict()}


class DilationSystem(WeightSystem):
    """``W_M = {exp(omega(x/lam))}``, used for weight sequences."""

    def __init__(self, omega: WeightExpr, dim: int = 1):
        self.omega = omega
        self.dim = int(dim)
        self.label = f"W_M[{omega.describe()}]"

    def log_weight(self, lam, x):
        return self.omega(as_points(x, self.dim) / _check_lam(lam), self.dim)

    def valid_radius(self, lam):
        return _check_lam(lam) * self.omega.valid_radius

    @property
    def radial(self):
        return self.omega.radial

    def to_dict(self):
        return {"kind": "dilation", "dim": self.dim, "omega": self.omega.to_dict()}


class ConstantSystem(WeightSystem):
    """Every member is identically 1."""

    def __init__(self, dim: int = 1):
        self.dim = int(dim)
        self.label = "W[1]"

    def log_weight(self, lam, x):
        _check_lam(lam)
        return np.zeros(as_points(x, self.dim).shape[:-1])

    @property
    def radial(self):
        return True

    def to_dict(self):
        return {"kind": "constant", "dim": self.dim}


class TensorSystem(WeightSystem):
    """``{w^lam (x) v^lam}`` on ``R^(d1+d2)``."""

    def __init__(self, first: WeightSystem, second: WeightSystem):
        self.factors = (first, second)
        self.dim = first.dim + second.dim
        self.label = f"({first.label} x {second.label})"

    def log_weight(self, lam, x):
        pts = as_points(x, self.dim)
        a, b = self.factors
        return a.log_weight(lam, pts[..., : a.dim]) + b.log_weight(lam, pts[..., a.dim:])

    def valid_radius(self, lam):
        return min(f.valid_radius(lam) for f in self.factors)

    @property
    def blocks(self):
        a, b = self.factors
        return [tuple(i for i in blk) for blk in a.blocks] + [tuple(a.dim + i for i in blk) for blk in b.blocks]

    def to_dict(self):
        return {"kind": "tensor", "dim": self.dim, "factors": [f.to_dict() for f in self.factors]}


class ReflectedSystem(WeightSystem):
    """``{x -> w^lam(-x)}``."""

    def __init__(self, base: WeightSystem):
        self.base = base
        self.dim = base.dim
        self.label = f"reflect({base.label})"

    def log_weight(self, lam, x):
        return self.base.log_weight(lam, -as_points(x, self.dim))

    def valid_radius(self, lam):
        return self.base.valid_radius(lam)

    @property
    def blocks(self):
        return self.base.blocks

    @property
    def radial(self):
        return self.base.radial

    @property
    def generator(self):
        g = self.base.generator
        return g if g is not None and g.radial else None

    def to_dict(self):
        return {"kind": "reflected", "dim": self.dim, "base": self.base.to_dict()}


# constructors --------------------------------------------------------------

_NONNEGATIVE_KINDS = {"zero", "power", "logpower", "exp", "ramp", "sequence_assoc", "sum", "max"}


def _nonnegative(expr: WeightExpr) -> bool:
    if expr.kind not in _NONNEGATIVE_KINDS:
        return False
    if expr.kind in ("power", "logpower", "exp", "ramp"):
        return expr.a > 0
    if expr.kind == "sequence_assoc":
        # negative entries of the offset sequence would make omega_M negative near 0
        return True
    return all(_nonnegative(c) for c in expr.children)


def make_exponential_system(omega: WeightExpr, d: int = 1) -> ExponentialSystem:
    """``W_omega``; rejects generators that can take negative values."""
    if not isinstance(omega, WeightExpr) or not _nonnegative(omega):
        raise ValueError("generator must be a non-negative weight expression")
    probe = omega(np.linspace(-3.0, 3.0, 61)[:, None] * np.ones(d), d)
    if np.any(probe < 0):
        raise ValueError("generator takes negative values")
    return ExponentialSystem(omega, d)


def make_dilation_system(omega: WeightExpr, d: int = 1) -> DilationSystem:
    if not _nonnegative(omega):
        raise ValueError("generator must be a non-negative weight expression")
    return DilationSystem(omega, d)


def tensor_system(W1: WeightSystem, W2: WeightSystem) -> TensorSystem:
    return TensorSystem(W1, W2)


def reflect_system(W: WeightSystem) -> WeightSystem:
    """Reflection about the origin; reflecting twice returns the original object."""
    if isinstance(W, ReflectedSystem):
        return W.base
    return ReflectedSystem(W)


def system_from_config(payload: Mapping[str, Any]) -> WeightSystem:
    """``{"family", "params", "dim", "kind"?}`` or ``{"tensor": [a, b]}`` / ``{"reflect": a}``."""
    if "tensor" in payload:
        parts = payload["tensor"]
        if len(parts) != 2:
            raise ValueError("tensor needs exactly two systems")
        return tensor_system(system_from_config(parts[0]), system_from_config(parts[1]))
    if "reflect" in payload:
        return reflect_system(system_from_config(payload["reflect"]))
    dim = int(payload.get("dim", 1))
    if dim < 1:
        raise ValueError("dim must be a positive integer")
    if payload.get("family") == "constant":
        return ConstantSystem(dim)
    expr = from_config(payload)
    if payload.get("kind", "exponential") == "dilation":
        return make_dilation_system(expr, dim)
    return make_exponential_system(expr, dim)
