"""Closed parametric families of non-negative continuous functions on R^d."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

KINDS = ("zero", "power", "logpower", "exp", "ramp", "sequence_assoc", "sum", "max")

# points per block when evaluating associated functions (bounds peak memory)
_ASSOC_CHUNK = 4096


def as_points(x, dim: int) -> np.ndarray:
    """Coerce ``x`` to a float array whose last axis has length ``dim``.

    For ``dim == 1`` scalars and arrays without a trailing singleton axis are
    promoted, so ``as_points([0.0, 1.5], 1)`` has shape ``(2, 1)``.
    """
    arr = np.asarray(x, dtype=float)
    if dim == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.ndim == 0 or arr.shape[-1] != dim:
        raise ValueError(f"dimension mismatch: points of shape {arr.shape} for dim={dim}")
    return arr


def _norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=-1))


def associated_function(M: Sequence[float] | None, x, *, log_M: Sequence[float] | None = None, dim: int | None = None) -> np.ndarray:
    """``max_{0<=p<=P} log(|x|^p M_0 / M_p)``, with value 1 at the origin.

    The sequence may be given directly (``M``) or through its logarithms
    (``log_M``), which avoids overflow for factorial-type sequences.  The
    maximum is a brute-force scan over every ``p``.
    """
    lm = _log_sequence(M, log_M)
    if dim is None:
        dim = 1
    pts = as_points(x, dim)
    r = _norm(pts)
    return _assoc_radial(lm, r)


def _log_sequence(M, log_M) -> np.ndarray:
    if (M is None) == (log_M is None):
        raise ValueError("give exactly one of M or log_M")
    if log_M is not None:
        lm = np.asarray(log_M, dtype=float)
    else:
        m = np.asarray(M, dtype=float)
        if m.size and np.any(~(m > 0)):
            raise ValueError("weight sequence must be positive")
        lm = np.log(m) if m.size else m
    if lm.ndim != 1 or lm.size == 0:
        raise ValueError("weight sequence must be a non-empty 1-d list")
    if not np.all(np.isfinite(lm)):
        raise ValueError("weight sequence must be finite and positive")
    return lm


def _assoc_radial(lm: np.ndarray, r: np.ndarray) -> np.ndarray:
    flat = r.reshape(-1)
    out = np.empty(flat.shape)
    p = np.arange(lm.size, dtype=float)
    offs = lm - lm[0]
    for start in range(0, flat.size, _ASSOC_CHUNK):
        rr = flat[start:start + _ASSOC_CHUNK]
        with np.errstate(divide="ignore", invalid="ignore"):
            logr = np.log(rr)
            # p = 0 term is log(M_0/M_0) = 0 even at r = 0
            terms = np.where(p[None, :] == 0, 0.0, p[None, :] * logr[:, None]) - offs[None, :]
        out[start:start + _ASSOC_CHUNK] = np.max(terms, axis=1)
    out[flat == 0.0] = 1.0
    return out.reshape(r.shape)


@dataclass(frozen=True)
class WeightExpr:
    """A non-negative continuous function from a closed family.

    ``power``: ``a |x|^s``; ``logpower``: ``a log(1+|x|)^s``; ``exp``:
    ``a exp(s |x|)``; ``ramp``: ``a max(x_1, 0)^s`` (asymmetric test family);
    ``sequence_assoc``: associated function of a weight sequence (stored as
    logarithms); ``sum``/``max`` combine two children; ``zero``.
    """

    kind: str
    a: float = 1.0
    s: float = 1.0
    log_M: tuple[float, ...] = ()
    children: tuple["WeightExpr", ...] = ()
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight family {self.kind!r}")
        if self.kind in ("power", "logpower", "exp", "ramp"):
            if not (self.a > 0 and self.s > 0):
                raise ValueError(f"{self.kind} needs a > 0 and s > 0, got a={self.a}, s={self.s}")
        if self.kind == "sequence_assoc" and not self.log_M:
            raise ValueError("sequence_assoc needs a non-empty weight sequence")
        if self.kind in ("sum", "max") and len(self.children) != 2:
            raise ValueError(f"{self.kind} combines exactly two expressions")

    # evaluation -----------------------------------------------------------

    def __call__(self, x, dim: int = 1) -> np.ndarray:
        pts = as_points(x, dim)
        return self._eval(pts)

    def _eval(self, pts: np.ndarray) -> np.ndarray:
        k = self.kind
        if k == "zero":
            return np.zeros(pts.shape[:-1])
        if k == "ramp":
            return self.a * np.maximum(pts[..., 0], 0.0) ** self.s
        if k in ("sum", "max"):
            u, v = (c._eval(pts) for c in self.children)
            return u + v if k == "sum" else np.maximum(u, v)
        r = _norm(pts)
        if k == "power":
            return self.a * r**self.s
        if k == "logpower":
            return self.a * np.log1p(r) ** self.s
        if k == "exp":
            with np.errstate(over="ignore"):
                return self.a * np.exp(self.s * r)
        return _assoc_radial(np.asarray(self.log_M), r)

    # structure ------------------------------------------------------------

    @property
    def radial(self) -> bool:
        if self.kind == "ramp":
            return False
        return all(c.radial for c in self.children)

    @property
    def valid_radius(self) -> float:
        """Radius up to which the finite representation is exact.

        For an associated function of ``M_0..M_P`` this is ``M_P / M_{P-1}``:
        beyond it the maximizing index would exceed ``P`` (log-convex ``M``).
        """
        if self.kind == "sequence_assoc":
            if len(self.log_M) < 2:
                return math.inf
            return float(math.exp(self.log_M[-1] - self.log_M[-2]))
        if self.children:
            return min(c.valid_radius for c in self.children)
        return math.inf

    def __add__(self, other: "WeightExpr") -> "WeightExpr":
        return WeightExpr("sum", children=(self, other))

    def describe(self) -> str:
        if self.label:
            return self.label
        k = self.kind
        if k == "zero":
            return "0"
        if k == "power":
            return f"{self.a:g}|x|^{self.s:g}"
        if k == "logpower":
            return f"{self.a:g}log(1+|x|)^{self.s:g}"
        if k == "exp":
            return f"{self.a:g}exp({self.s:g}|x|)"
        if k == "ramp":
            return f"{self.a:g}max(x1,0)^{self.s:g}"
        if k == "sequence_assoc":
            return f"omega_M(P={len(self.log_M) - 1})"
        op = " + " if k == "sum" else ", "
        inner = op.join(c.describe() for c in self.children)
        return inner if k == "sum" else f"max({inner})"

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.kind}
        if self.kind in ("power", "logpower", "exp", "ramp"):
            out["params"] = {"a": self.a, "s": self.s}
        elif self.kind == "sequence_assoc":
            out["params"] = {"log_M": list(self.log_M)}
        elif self.children:
            out["children"] = [c.to_dict() for c in self.children]
        if self.label:
            out["label"] = self.label
        return out


# constructors --------------------------------------------------------------


def zero() -> WeightExpr:
    return WeightExpr("zero")


def power(s: float = 1.0, a: float = 1.0) -> WeightExpr:
    return WeightExpr("power", a=a, s=s)


def logpower(b: float = 1.0, a: float = 1.0) -> WeightExpr:
    return WeightExpr("logpower", a=a, s=b)


def exponential(s: float = 1.0, a: float = 1.0) -> WeightExpr:
    return WeightExpr("exp", a=a, s=s)


def ramp(s: float = 1.0, a: float = 1.0) -> WeightExpr:
    return WeightExpr("ramp", a=a, s=s)


def sequence_assoc(M: Sequence[float] | None = None, *, log_M: Sequence[float] | None = None, label: str = "") -> WeightExpr:
    lm = _log_sequence(M, log_M)
    return WeightExpr("sequence_assoc", log_M=tuple(float(v) for v in lm), label=label)


def gevrey(order: float = 1.0, P: int = 400) -> WeightExpr:
    """Associated function of ``M_p = (p!)^order`` for ``p <= P``."""
    lm = order * gammaln(np.arange(P + 1) + 1.0)
    return sequence_assoc(log_M=lm, label=f"omega_(p!^{order:g})")


def wmax(u: WeightExpr, v: WeightExpr) -> WeightExpr:
    return WeightExpr("max", children=(u, v))


def from_config(payload: Mapping[str, Any]) -> WeightExpr:
    """Build an expression from ``{"family": ..., "params": {...}}``."""
    fam = payload.get("family")
    params = dict(payload.get("params") or {})
    if fam == "zero":
        return zero()
    if fam == "power":
        return power(params.get("s", 1.0), params.get("a", 1.0))
    if fam == "logpower":
        return logpower(params.get("b", params.get("s", 1.0)), params.get("a", 1.0))
    if fam == "exp":
        return exponential(params.get("s", 1.0), params.get("a", 1.0))
    if fam == "ramp":
        return ramp(params.get("s", 1.0), params.get("a", 1.0))
    if fam == "gevrey":
        return gevrey(params.get("order", 1.0), int(params.get("P", 400)))
    if fam == "sequence_assoc":
        if "log_M" in params:
            return sequence_assoc(log_M=params["log_M"])
        return sequence_assoc(params.get("M"))
    if fam in ("sum", "max"):
        kids = payload.get("children") or []
        if len(kids) != 2:
            raise ValueError(f"{fam} needs two children")
        return WeightExpr(fam, children=tuple(from_config(c) for c in kids))
    raise ValueError(f"unknown weight family {fam!r}")


def library() -> dict[str, WeightExpr]:
    """The built-in families used by coherence checks."""
    return {
        "zero": zero(),
        "abs": power(1.0),
        "sqrt": power(0.5),
        "square": power(2.0),
        "log": logpower(1.0),
        "log2": logpower(2.0),
        "exp": exponential(1.0),
        "gevrey1": gevrey(1.0),
        "gevrey2": gevrey(2.0),
    }
