"""Weights dominated by every member of a system, and the truncated infima built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..reports import COUNTEREXAMPLE, NO_COUNTEREXAMPLE, ConditionReport
from .conditions import _exp, DEFAULT_QUAD, DEFAULT_SEARCH, _PairDomain, _PointDomain, moderation_search, ratio_tail, square_search
from .expr import as_points
from .systems import WeightFunction, WeightSystem
from .tails import QuadratureSpec, SearchSpec, shell_fit


@dataclass
class NachbinWeight:
    """``x -> min_k c_k w^{lam_k}(x)`` over a finite list of terms.

    ``log_constants[k]`` is ``log c_k``; ``depth`` is the truncation depth of
    the infimum.  Evaluates through ``log`` like any weight.
    """

    system: WeightSystem
    lambdas: tuple[float, ...]
    log_constants: tuple[float, ...]
    domain: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.lambdas) != len(self.log_constants) or not self.lambdas:
            raise ValueError("a truncated infimum needs at least one (constant, lambda) term")

    @property
    def dim(self) -> int:
        return self.system.dim

    @property
    def depth(self) -> int:
        return len(self.lambdas)

    @property
    def label(self) -> str:
        return f"inf_{self.depth}({self.system.label})"

    def log(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        terms = [c + self.system.log_weight(lam, pts) for lam, c in zip(self.lambdas, self.log_constants)]
        return np.min(np.stack(terms), axis=0)

    def __call__(self, x) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log(x))

    def to_dict(self) -> dict:
        return {
            "system": self.system.to_dict(),
            "terms": [{"lambda": lam, "log_constant": c} for lam, c in zip(self.lambdas, self.log_constants)],
            "depth": self.depth,
            "domain": self.domain,
            "diagnostics": self.diagnostics,
        }


def _sup_log_ratio(w, W: WeightSystem, lam: float, pts: np.ndarray) -> float:
    return float(np.max(w.log(pts) - W.log_weight(lam, pts)))


def nachbin_membership(w: WeightFunction, W: WeightSystem, lambdas: Sequence[float] | None = None, search: SearchSpec | None = None, quad: QuadratureSpec | None = None) -> ConditionReport:
    """``sup w / w^lam < infinity`` for each lattice ``lam``: box sup plus a non-growing tail."""
    search = search or DEFAULT_SEARCH
    quad = quad or DEFAULT_QUAD
    lambdas = tuple(lambdas or search.lambdas)
    pts, _ = search.lattice(W.dim)
    rows, bad = [], []
    for lam in lambdas:
        sup = _sup_log_ratio(w, W, lam, pts)

        def log_ratio(p, lam=lam):
            return w.log(p) - W.log_weight(lam, p)

        R = min(quad.R_tail, W.valid_radius(lam))
        fits = [shell_fit(log_ratio, W.dim, blk, R, quad) for blk in W.blocks]
        row = {"lambda": lam, "C_prime": _exp(sup), "tail": [f.to_dict() for f in fits]}
        (rows if math.isfinite(sup) and all(f.non_growing() for f in fits) else bad).append(row)
    info = dict(search.describe(W.dim), method="box sup + tail fit")
    if bad:
        return ConditionReport("nachbin-membership", "roumieu", COUNTEREXAMPLE, rows, bad, info)
    return ConditionReport("nachbin-membership", "roumieu", NO_COUNTEREXAMPLE, rows, None, info)


def nachbin_moderate(w: WeightFunction, W: WeightSystem, nu: float, mus: Sequence[float] | None = None, search: SearchSpec | None = None, *, check_membership: bool = True) -> NachbinWeight:
    """``wbar = min_mu C_mu C'_{lam_mu} w^mu`` with ``w(x+y) <= wbar(x) w^nu(y)`` on the pair box.

    ``C_mu`` is the Roumieu moderation constant for ``(mu, nu)`` measured on
    the same pair box, and ``C'_lam`` the sup of ``w / w^lam`` over the doubled
    box, so the defining inequality holds with constant 1 at every grid pair.
    """
    search = search or DEFAULT_SEARCH
    mus = tuple(mus or search.lambdas)
    if check_membership:
        memb = nachbin_membership(w, W, sorted(set(c for c in search.candidates if c >= min(mus))), search)
        if not memb.holds:
            raise ValueError("w is not dominated by every member of the system")
    cache: dict = {}
    dom = _PairDomain(search, W.dim)
    cache["_dom"] = dom
    lams, consts, rows = [], [], []
    R = search.radius * math.sqrt(W.dim)
    for mu in mus:
        witness = None
        for lam in sorted(c for c in search.candidates if c >= max(mu, nu)):
            if W.valid_radius(lam) < 2 * R:
                continue
            stable, logC, _ = moderation_search(W, lam, mu, nu, search, cache)
            if stable:
                witness = (lam, logC)
                break
        if witness is None:
            raise ValueError(f"missing moderation witness for mu={mu}, nu={nu}")
        lam, logC = witness
        logCp = _sup_log_ratio(w, W, lam, dom.double_points)
        lams.append(mu)
        consts.append(logC + logCp)
        rows.append({"mu": mu, "lambda_mu": lam, "C_mu": _exp(logC), "C_prime": _exp(logCp)})
    return NachbinWeight(W, tuple(lams), tuple(consts), dict(search.describe(W.dim), nu=nu), {"terms": rows})


def moderate_inequality_excess(w: WeightFunction, wbar: NachbinWeight, W: WeightSystem, nu: float, search: SearchSpec | None = None) -> float:
    """``max over grid pairs of log w(x+y) - log wbar(x) - log w^nu(y)`` (<= 0 means it holds with C = 1)."""
    search = search or DEFAULT_SEARCH
    dom = _PairDomain(search, W.dim)
    top = w.log(dom.double_points)[dom.sum_index()]
    table = top - wbar.log(dom.points)[:, None] - W.log_weight(nu, dom.points)[None, :]
    return float(np.max(table))


def nachbin_square_check(w: WeightFunction, W: WeightSystem, lambdas: Sequence[float] | None = None, search: SearchSpec | None = None, quad: QuadratureSpec | None = None) -> ConditionReport:
    """``sup w^2 / w^lam <= C (sup w / w^mu)^2`` with ``(mu, C)`` from a square witness."""
    search = search or DEFAULT_SEARCH
    quad = quad or DEFAULT_QUAD
    lambdas = tuple(lambdas or search.lambdas)
    dom = _PointDomain(search, W.dim)
    rows, bad = [], []
    R = search.radius * math.sqrt(W.dim)
    for lam in lambdas:
        witness = None
        for mu in sorted(c for c in search.candidates if c >= lam):
            if W.valid_radius(mu) < R:
                continue
            stable, logC, _ = square_search(W, mu, lam, search, dom)
            if stable:
                witness = (mu, logC)
                break
        if witness is None:
            raise ValueError(f"missing square witness for lambda={lam}")
        mu, logC = witness
        lhs = float(np.max(2.0 * w.log(dom.points) - W.log_weight(lam, dom.points)))
        rhs = logC + 2.0 * _sup_log_ratio(w, W, mu, dom.points)
        # finiteness of the sup over R^d: box value plus a non-growing far tail
        def log_sq(p, lam=lam):
            return 2.0 * w.log(p) - W.log_weight(lam, p)

        R_t = min(quad.R_tail, W.valid_radius(lam))
        stable = math.isfinite(lhs) and all(shell_fit(log_sq, W.dim, blk, R_t, quad).non_growing() for blk in W.blocks)
        row = {"lambda": lam, "mu": mu, "C": _exp(logC), "log_lhs": lhs, "log_rhs": rhs}
        (rows if stable and lhs <= rhs + 1e-9 * max(1.0, abs(rhs)) else bad).append(row)
    info = dict(search.describe(W.dim), method="square witness")
    if bad:
        return ConditionReport("nachbin-square", "roumieu", COUNTEREXAMPLE, rows, bad, info)
    return ConditionReport("nachbin-square", "roumieu", NO_COUNTEREXAMPLE, rows, None, info)


def nachbin_integrable_majorant(w: WeightFunction, W: WeightSystem, N_max: int = 8, quad: QuadratureSpec | None = None) -> NachbinWeight:
    """``wbar = min_{n <= N_max} 2^n C_n C'_{lam_n} w^n`` with ``w / wbar`` integrable.

    ``lam_n`` is the first of ``n 2^j`` (``j >= 1``) whose ratio ``w^{lam_n}/w^n``
    has an integrable tail; ``C_n`` is its box Riemann sum and ``C'`` the box sup
    of ``w / w^{lam_n}``.  On the box the Riemann sum of ``w / wbar`` is then
    at most ``1 - 2^-N_max``.
    """
    if N_max < 1:
        raise ValueError("N_max must be at least 1")
    quad = quad or DEFAULT_QUAD
    pts = quad.box(W.dim)
    lams, consts, rows = [], [], []
    for n in range(1, N_max + 1):
        lam_n = None
        for j in range(1, 12):
            cand = float(n * 2**j)
            fits, _ = ratio_tail(W, cand, float(n), quad)
            if all(f.integrable(quad.delta) for f in fits):
                lam_n = cand
                break
        if lam_n is None:
            raise ValueError(f"w^lam / w^{n} is not integrable for any lam = {n}*2^j")
        log_ratio = W.log_weight(lam_n, pts) - W.log_weight(float(n), pts)
        C_n = float(np.sum(np.exp(log_ratio)) * quad.h**W.dim)
        if not (math.isfinite(C_n) and C_n > 0):
            raise ValueError(f"divergent quadrature for C_{n}")
        logCp = _sup_log_ratio(w, W, lam_n, pts)
        lams.append(float(n))
        consts.append(n * math.log(2.0) + math.log(C_n) + logCp)
        rows.append({"n": n, "lambda_n": lam_n, "C_n": C_n, "C_prime": _exp(logCp)})
    wbar = NachbinWeight(W, tuple(lams), tuple(consts), dict(quad.describe(), dim=W.dim), {"terms": rows, "truncation_depth": N_max})
    integral = float(np.sum(np.exp(w.log(pts) - wbar.log(pts))) * quad.h**W.dim)
    wbar.diagnostics.update(integral=integral, bound=1.0, truncation_tolerance=0.05)
    return wbar
