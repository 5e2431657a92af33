"""Checkers for the structural conditions on weights and weight systems.

Every checker returns a :class:`ConditionReport` with one of three verdicts.
Analytic fast paths cover the closed families; everything else is decided by
a search over a finite lattice box, where a candidate constant is accepted
only if enlarging the box from half size to full size does not move the
required constant (the "stable" test).
"""
from __future__ import annotations

import math
from typing import Any

import numpy as np

from ..reports import (
    COUNTEREXAMPLE,
    NO_COUNTEREXAMPLE,
    NOT_APPLICABLE,
    VERIFIED,
    ConditionReport,
    combine_verdicts,
    normalize_variant,
)
from .expr import WeightExpr
from .systems import ConstantSystem, ExponentialSystem, ReflectedSystem, TensorSystem, WeightSystem
from .tails import QuadratureSpec, SearchSpec, box_integral, shell_fit

DEFAULT_SEARCH = SearchSpec()
DEFAULT_QUAD = QuadratureSpec()


# lattice helpers -------------------------------------------------------------


class _PairDomain:
    """Pairs ``(x, y)`` of box points, with ``x + y`` indexed in the doubled box."""

    def __init__(self, search: SearchSpec, dim: int):
        self.dim = dim
        self.K = search.halfwidth(dim)
        self.points, idx = search.lattice(dim)
        self.double_points, _ = search.lattice(dim, factor=2)
        side = 4 * self.K + 1
        shifted = idx + 2 * self.K
        flat = np.zeros(len(idx), dtype=np.int64)
        for i in range(dim):
            flat = flat * side + shifted[:, i]
        self._flat = flat
        self._side = side
        inner = np.all(np.abs(idx) <= self.K // 2, axis=1)
        self.inner = inner
        self.radius = search.radius

    def sum_index(self) -> np.ndarray:
        """Flat doubled-box index of ``x_i + y_j`` as an ``(n, n)`` array."""
        side, K = self._side, self.K
        # index of a sum = sum of per-axis offsets relative to the doubled origin
        origin = 0
        for _ in range(self.dim):
            origin = origin * side + 2 * K
        return self._flat[:, None] + self._flat[None, :] - origin

    def excess(self, table: np.ndarray, tol: float) -> tuple[float, float, bool]:
        """``(sup over all pairs, sup over inner pairs, stable)``."""
        sup_all = float(np.max(table))
        sup_in = float(np.max(table[np.ix_(self.inner, self.inner)]))
        stable = math.isfinite(sup_all) and sup_all - sup_in <= tol * max(1.0, abs(sup_all)) + 1e-9
        return sup_all, sup_in, stable

    def violation(self, table: np.ndarray, bound: float) -> dict:
        i, j = np.unravel_index(int(np.argmax(table)), table.shape)
        return {"x": self.points[i].tolist(), "y": self.points[j].tolist(), "excess": float(table[i, j] - bound)}


class _PointDomain:
    def __init__(self, search: SearchSpec, dim: int):
        self.points, idx = search.lattice(dim)
        self.inner = np.all(np.abs(idx) <= search.halfwidth(dim) // 2, axis=1)
        self.radius = search.radius

    def excess(self, vec: np.ndarray, tol: float) -> tuple[float, float, bool]:
        sup_all = float(np.max(vec))
        sup_in = float(np.max(vec[self.inner]))
        stable = math.isfinite(sup_all) and sup_all - sup_in <= tol * max(1.0, abs(sup_all)) + 1e-9
        return sup_all, sup_in, stable


def _exp(v: float) -> float:
    return math.exp(v) if v < 709.0 else math.inf


def _valid(W: WeightSystem, lam: float, radius: float) -> bool:
    return W.valid_radius(lam) >= radius


def _ordered(cands, pivot: float, descending: bool, strict: bool = False):
    if descending:
        sel = [c for c in cands if (c < pivot if strict else c <= pivot)]
        return sorted(sel, reverse=True)
    sel = [c for c in cands if (c > pivot if strict else c >= pivot)]
    return sorted(sel)


# (alpha) ---------------------------------------------------------------------


def _alpha_analytic(expr: WeightExpr) -> tuple[float, float] | None:
    """``(L, C)`` with a known proof, or None."""
    k = expr.kind
    if k == "zero":
        return 1.0, 0.0
    if k in ("power", "ramp"):
        return (1.0 if expr.s <= 1 else 2.0 ** (expr.s - 1.0)), 0.0
    if k == "logpower":
        # 1+|x+y| <= (1+|x|)(1+|y|), then convexity of t^b
        return max(1.0, 2.0 ** (expr.s - 1.0)), 0.0
    if k in ("sum", "max"):
        parts = [_alpha_analytic(c) for c in expr.children]
        if any(p is None for p in parts):
            return None
        L = max(p[0] for p in parts)
        C = sum(p[1] for p in parts) if k == "sum" else max(p[1] for p in parts)
        return L, C
    return None


def check_alpha(omega: WeightExpr, search: SearchSpec | None = None, *, dim: int = 1, method: str = "auto") -> ConditionReport:
    """``omega(x+y) <= L (omega(x) + omega(y)) + C``."""
    search = search or DEFAULT_SEARCH
    if method not in ("auto", "grid"):
        raise ValueError("method must be 'auto' or 'grid'")
    if method == "auto":
        lc = _alpha_analytic(omega)
        if lc is not None:
            return ConditionReport("alpha", None, VERIFIED, {"L": lc[0], "C": lc[1]}, None, {"method": "analytic", "family": omega.describe()})
    dom = _PairDomain(search, dim)
    if omega.valid_radius < 2 * dom.radius * math.sqrt(dim):
        return ConditionReport("alpha", None, NOT_APPLICABLE, None, None, {"method": "grid", "reason": "search box exceeds the valid radius of the generator"})
    om = omega(dom.points, dim)
    om_sum = omega(dom.double_points, dim)[dom.sum_index()]
    base = om[:, None] + om[None, :]
    search_info = dict(search.describe(dim), method="grid", family=omega.describe())
    failures = []
    for L in sorted(search.L_candidates):
        table = om_sum - L * base
        sup_all, sup_in, stable = dom.excess(table, search.rtol)
        if stable:
            return ConditionReport("alpha", None, NO_COUNTEREXAMPLE, {"L": L, "C": max(sup_all, 0.0)}, None, search_info)
        C = max(sup_in, 0.0)
        failures.append(dict(dom.violation(table, C), L=L, C=C))
    return ConditionReport("alpha", None, COUNTEREXAMPLE, None, failures, search_info)


# [omega M] -------------------------------------------------------------------


def _log_table(W: WeightSystem, dom: _PairDomain, cache: dict, lam: float, doubled: bool = False) -> np.ndarray:
    key = (lam, doubled)
    if key not in cache:
        pts = dom.double_points if doubled else dom.points
        cache[key] = W.log_weight(lam, pts)
    return cache[key]


def moderation_search(W: WeightSystem, lam: float, mu: float, nu: float, search: SearchSpec | None = None, cache: dict | None = None) -> tuple[bool, float, dict | None]:
    """Decide ``w^lam(x+y) <= C w^mu(x) w^nu(y)`` on the pair box.

    Returns ``(stable, log C, violating pair or None)``.
    """
    search = search or DEFAULT_SEARCH
    dom = cache.get("_dom") if cache else None
    if dom is None:
        dom = _PairDomain(search, W.dim)
        if cache is not None:
            cache["_dom"] = dom
    cache = cache if cache is not None else {}
    if "_sum" not in cache:
        cache["_sum"] = dom.sum_index()
    top = _log_table(W, dom, cache, lam, doubled=True)[cache["_sum"]]
    table = top - _log_table(W, dom, cache, mu)[:, None] - _log_table(W, dom, cache, nu)[None, :]
    sup_all, sup_in, stable = dom.excess(table, search.rtol)
    if stable:
        return True, sup_all, None
    return False, sup_in, dom.violation(table, sup_in)


def _delegated(name: str, Wsys: WeightSystem, fn, variant: str, search, method: str):
    if isinstance(Wsys, ReflectedSystem):
        rep = fn(Wsys.base, variant, search, method=method)
        rep.search = dict(rep.search, delegated="reflection")
        return rep
    if isinstance(Wsys, TensorSystem):
        reps = [fn(f, variant, search, method=method) for f in Wsys.factors]
        verdict = combine_verdicts(r.verdict for r in reps)
        return ConditionReport(name, variant, verdict, [r.witness for r in reps], [r.counterexample for r in reps] if verdict == COUNTEREXAMPLE else None, {"method": "tensor-delegation", "factors": [r.to_dict() for r in reps]})
    return None


def check_condition_M(W: WeightSystem, variant: str = "beurling", search: SearchSpec | None = None, *, method: str = "auto") -> ConditionReport:
    """``w^lam(x+y) <= C w^mu(x) w^nu(y)`` in the Beurling or Roumieu form.

    The grid search takes ``mu = nu``: in the Beurling form the smaller index
    dominates, in the Roumieu form the larger one does, so nothing is lost.
    """
    variant = normalize_variant(variant)
    search = search or DEFAULT_SEARCH
    if method not in ("auto", "grid"):
        raise ValueError("method must be 'auto' or 'grid'")
    if method == "auto":
        if isinstance(W, ConstantSystem):
            return ConditionReport("omegaM", variant, VERIFIED, {"C": 1.0, "rule": "all parameters"}, None, {"method": "analytic"})
        rep = _delegated("omegaM", W, check_condition_M, variant, search, method)
        if rep is not None:
            return rep
        if isinstance(W, ExponentialSystem):
            return _condition_M_from_alpha(W, variant, search)
    return _condition_M_grid(W, variant, search)


def _condition_M_from_alpha(W: ExponentialSystem, variant: str, search: SearchSpec) -> ConditionReport:
    alpha = check_alpha(W.omega, search, dim=W.dim)
    info = {"method": "delegated to (alpha)", "alpha": alpha.to_dict()}
    if alpha.verdict in (COUNTEREXAMPLE, NOT_APPLICABLE):
        return ConditionReport("omegaM", variant, alpha.verdict, None, alpha.counterexample, info)
    L, C = alpha.witness["L"], alpha.witness["C"]
    rows = []
    for lam in search.lambdas:
        if variant == "beurling":
            rows.append({"lambda": lam, "mu": lam / L, "nu": lam / L, "C": _exp(C / lam)})
        else:
            rows.append({"mu": lam, "nu": lam, "lambda": L * lam, "C": _exp(C / (L * lam))})
    return ConditionReport("omegaM", variant, alpha.verdict, rows, None, info)


def _condition_M_grid(W: WeightSystem, variant: str, search: SearchSpec) -> ConditionReport:
    cache: dict[Any, Any] = {}
    R = search.radius * math.sqrt(W.dim)
    info = dict(search.describe(W.dim), method="grid")
    rows, failures, skipped = [], [], []
    for lam in search.lambdas:
        if variant == "beurling":
            if not _valid(W, lam, 2 * R):
                skipped.append(lam)
                continue
            found, last = None, None
            for mu in _ordered(search.candidates, lam, descending=True):
                if not _valid(W, mu, R):
                    continue
                stable, logC, bad = moderation_search(W, lam, mu, mu, search, cache)
                if stable:
                    found = {"lambda": lam, "mu": mu, "nu": mu, "C": _exp(logC)}
                    break
                last = dict(bad, **{"lambda": lam, "mu": mu, "nu": mu, "C": _exp(logC)})
            if found is None:
                failures.append(last or {"lambda": lam})
            else:
                rows.append(found)
        else:
            mu = lam
            if not _valid(W, mu, R):
                skipped.append(mu)
                continue
            found, last = None, None
            for cand in _ordered(search.candidates, mu, descending=False):
                if not _valid(W, cand, 2 * R):
                    continue
                stable, logC, bad = moderation_search(W, cand, mu, mu, search, cache)
                if stable:
                    found = {"mu": mu, "nu": mu, "lambda": cand, "C": _exp(logC)}
                    break
                last = dict(bad, **{"mu": mu, "nu": mu, "lambda": cand, "C": _exp(logC)})
            if found is None:
                failures.append(last or {"mu": mu})
            else:
                rows.append(found)
    info["skipped_outside_valid_radius"] = skipped
    if failures:
        return ConditionReport("omegaM", variant, COUNTEREXAMPLE, rows, failures, info)
    if not rows:
        return ConditionReport("omegaM", variant, NOT_APPLICABLE, None, None, info)
    return ConditionReport("omegaM", variant, NO_COUNTEREXAMPLE, rows, None, info)


def moderation_witness(W: WeightSystem, mu: float, nu: float, search: SearchSpec | None = None) -> tuple[float, float]:
    """Roumieu witness for a given ``(mu, nu)``: the smallest lattice ``lam`` and its ``C``."""
    search = search or DEFAULT_SEARCH
    cache: dict[Any, Any] = {}
    R = search.radius * math.sqrt(W.dim)
    for lam in _ordered(search.candidates, max(mu, nu), descending=False):
        if not _valid(W, lam, 2 * R):
            continue
        stable, logC, _ = moderation_search(W, lam, mu, nu, search, cache)
        if stable:
            return lam, _exp(logC)
    raise ValueError(f"no moderation witness for mu={mu}, nu={nu} on the candidate lattice")


# [omega SQ] ------------------------------------------------------------------


def check_condition_sq(W: WeightSystem, variant: str = "beurling", search: SearchSpec | None = None, *, method: str = "auto") -> ConditionReport:
    """``w^lam(x) w^mu(x) <= C w^nu(x)``; the grid search takes ``lam = mu``."""
    variant = normalize_variant(variant)
    search = search or DEFAULT_SEARCH
    if method not in ("auto", "grid"):
        raise ValueError("method must be 'auto' or 'grid'")
    if method == "auto":
        if isinstance(W, ConstantSystem):
            return ConditionReport("omegaSQ", variant, VERIFIED, {"C": 1.0, "rule": "all parameters"}, None, {"method": "analytic"})
        rep = _delegated("omegaSQ", W, check_condition_sq, variant, search, method)
        if rep is not None:
            return rep
        if isinstance(W, ExponentialSystem):
            rows = []
            for lam in search.lambdas:
                if variant == "beurling":
                    rows.append({"lambda": lam, "mu": lam, "nu": lam / 2.0, "C": 1.0})
                else:
                    rows.append({"nu": lam, "lambda": 2.0 * lam, "mu": 2.0 * lam, "C": 1.0})
            return ConditionReport("omegaSQ", variant, VERIFIED, rows, None, {"method": "analytic", "rule": "nu = (1/lambda + 1/mu)^-1, C = 1"})
    return _condition_sq_grid(W, variant, search)


def square_search(W: WeightSystem, lam: float, nu: float, search: SearchSpec, dom: _PointDomain | None = None) -> tuple[bool, float, dict | None]:
    """Decide ``w^lam(x)^2 <= C w^nu(x)`` on the box."""
    dom = dom or _PointDomain(search, W.dim)
    vec = 2.0 * W.log_weight(lam, dom.points) - W.log_weight(nu, dom.points)
    sup_all, sup_in, stable = dom.excess(vec, search.rtol)
    if stable:
        return True, sup_all, None
    i = int(np.argmax(vec))
    return False, sup_in, {"x": dom.points[i].tolist(), "excess": float(vec[i] - sup_in)}


def _condition_sq_grid(W: WeightSystem, variant: str, search: SearchSpec) -> ConditionReport:
    dom = _PointDomain(search, W.dim)
    R = search.radius * math.sqrt(W.dim)
    info = dict(search.describe(W.dim), method="grid")
    rows, failures, skipped = [], [], []
    for lam in search.lambdas:
        if not _valid(W, lam, R):
            skipped.append(lam)
            continue
        found, last = None, None
        if variant == "beurling":
            for nu in _ordered(search.candidates, lam, descending=True):
                if not _valid(W, nu, R):
                    continue
                stable, logC, bad = square_search(W, lam, nu, search, dom)
                if stable:
                    found = {"lambda": lam, "mu": lam, "nu": nu, "C": _exp(logC)}
                    break
                last = dict(bad, **{"lambda": lam, "mu": lam, "nu": nu})
        else:
            nu = lam
            for cand in _ordered(search.candidates, nu, descending=False):
                if not _valid(W, cand, R):
                    continue
                stable, logC, bad = square_search(W, cand, nu, search, dom)
                if stable:
                    found = {"nu": nu, "lambda": cand, "mu": cand, "C": _exp(logC)}
                    break
                last = dict(bad, **{"nu": nu, "lambda": cand, "mu": cand})
        if found is None:
            failures.append(last or {"lambda": lam})
        else:
            rows.append(found)
    info["skipped_outside_valid_radius"] = skipped
    if failures:
        return ConditionReport("omegaSQ", variant, COUNTEREXAMPLE, rows, failures, info)
    if not rows:
        return ConditionReport("omegaSQ", variant, NOT_APPLICABLE, None, None, info)
    return ConditionReport("omegaSQ", variant, NO_COUNTEREXAMPLE, rows, None, info)


# [N] and (S) -----------------------------------------------------------------


def ratio_tail(W: WeightSystem, lam: float, mu: float, quad: QuadratureSpec):
    """Per-block shell fits of ``log(w^lam / w^mu)``."""
    R = min(quad.R_tail, W.valid_radius(lam), W.valid_radius(mu))

    def log_ratio(p):
        return W.log_weight(lam, p) - W.log_weight(mu, p)

    return [shell_fit(log_ratio, W.dim, blk, R, quad) for blk in W.blocks], log_ratio


def _pairs_for(variant: str, search: SearchSpec):
    """Yield ``(fixed, [candidate...], role)`` in quantifier order."""
    for lam in search.lambdas:
        if variant == "beurling":
            yield lam, _ordered(search.candidates, lam, descending=True, strict=True)
        else:
            yield lam, _ordered(search.candidates, lam, descending=False, strict=True)


def check_condition_N(W: WeightSystem, variant: str = "beurling", quad: QuadratureSpec | None = None, search: SearchSpec | None = None) -> ConditionReport:
    """``w^lam / w^mu`` in L^1: box Riemann sum plus decay fit on the far shell.

    Integrable iff the fitted polynomial exponent is at most ``-(1+delta) d``
    per factor block, or an exponential model fits better with negative rate.
    """
    variant = normalize_variant(variant)
    quad = quad or DEFAULT_QUAD
    search = search or DEFAULT_SEARCH
    rows, failures = [], []
    for fixed, cands in _pairs_for(variant, search):
        found, last = None, None
        for cand in cands:
            lam, mu = (fixed, cand) if variant == "beurling" else (cand, fixed)
            fits, log_ratio = ratio_tail(W, lam, mu, quad)
            entry = {"lambda": lam, "mu": mu, "tail": [f.to_dict() for f in fits]}
            if all(f.integrable(quad.delta) for f in fits):
                entry["integral"] = box_integral(log_ratio, W.dim, quad)
                entry["tail_rate"] = max(f.exp_slope for f in fits)
                found = entry
                break
            last = entry
        if found is None:
            failures.append(last or {("lambda" if variant == "beurling" else "mu"): fixed})
        else:
            rows.append(found)
    info = dict(quad.describe(), lattice=list(search.lambdas), candidates=list(search.candidates), method="quadrature+tail-fit")
    if failures:
        return ConditionReport("N", variant, COUNTEREXAMPLE, rows, failures, info)
    return ConditionReport("N", variant, NO_COUNTEREXAMPLE, rows, None, info)


def check_condition_S(W: WeightSystem, variant: str = "roumieu", search: SearchSpec | None = None, quad: QuadratureSpec | None = None) -> ConditionReport:
    """``w^lam / w^mu -> 0`` at infinity (ratio bounded on the box, strictly decaying tail)."""
    variant = normalize_variant(variant)
    quad = quad or DEFAULT_QUAD
    search = search or DEFAULT_SEARCH
    rows, failures = [], []
    for fixed, cands in _pairs_for(variant, search):
        found, last = None, None
        for cand in cands:
            lam, mu = (fixed, cand) if variant == "beurling" else (cand, fixed)
            fits, _ = ratio_tail(W, lam, mu, quad)
            entry = {"lambda": lam, "mu": mu, "tail": [f.to_dict() for f in fits]}
            if all(f.decaying() for f in fits):
                found = entry
                break
            last = entry
        if found is None:
            failures.append(last or {"fixed": fixed})
        else:
            rows.append(found)
    info = dict(quad.describe(), lattice=list(search.lambdas), method="shell-decay")
    if failures:
        return ConditionReport("S", variant, COUNTEREXAMPLE, rows, failures, info)
    return ConditionReport("S", variant, NO_COUNTEREXAMPLE, rows, None, info)


# [gamma] ---------------------------------------------------------------------


def check_gamma(omega: WeightExpr, variant: str = "beurling", search: QuadratureSpec | None = None, *, dim: int = 1, points: int = 64) -> ConditionReport:
    """``log|x| = O(omega)`` (Beurling) or ``o(omega)`` (Roumieu).

    The ratio ``log r / omega`` is sampled on geometric radii from 4 up to the
    tail radius; the outer half (in ``log r``) must stay below twice the inner
    maximum for ``O`` and below half of it for ``o``.
    """
    variant = normalize_variant(variant)
    quad = search or DEFAULT_QUAD
    r_max = min(quad.R_tail, omega.valid_radius)
    info = {"radii": [4.0, r_max], "method": "ratio windows", "family": omega.describe()}
    if omega.kind == "zero":
        return ConditionReport("gamma", variant, COUNTEREXAMPLE, None, {"x": [4.0] + [0.0] * (dim - 1), "omega": 0.0}, info)
    if r_max <= 16.0:
        return ConditionReport("gamma", variant, NOT_APPLICABLE, None, None, dict(info, reason="valid radius too small"))
    r = np.geomspace(4.0, r_max, points)
    dirs = np.concatenate([np.eye(dim), -np.eye(dim)])
    pts = r[None, :, None] * dirs[:, None, :]
    with np.errstate(over="ignore"):
        om = omega(pts, dim)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(om > 0, np.log(r)[None, :] / om, np.inf)
    rho = np.max(rho, axis=0)
    half = points // 2
    inner, outer = float(np.max(rho[:half])), float(np.max(rho[half:]))
    info.update(inner_max=inner, outer_max=outer)
    if not math.isfinite(outer) or not math.isfinite(inner):
        k = int(np.argmax(~np.isfinite(rho)))
        return ConditionReport("gamma", variant, COUNTEREXAMPLE, None, {"x": [float(r[k])] + [0.0] * (dim - 1), "omega": 0.0}, info)
    factor = 2.0 if variant == "beurling" else 0.5
    if outer <= factor * inner:
        return ConditionReport("gamma", variant, NO_COUNTEREXAMPLE, {"sup_ratio": max(inner, outer), "outer_over_inner": outer / inner if inner else 0.0}, None, info)
    k = half + int(np.argmax(rho[half:]))
    return ConditionReport("gamma", variant, COUNTEREXAMPLE, None, {"x": [float(r[k])] + [0.0] * (dim - 1), "ratio": float(rho[k]), "inner_max": inner}, info)
