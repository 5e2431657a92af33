"""Report records returned by checkers and pipelines."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

VERIFIED = "verified-analytic"
NO_COUNTEREXAMPLE = "no-counterexample-on-grid"
COUNTEREXAMPLE = "counterexample-found"
NOT_APPLICABLE = "not-applicable"

VERDICTS = (VERIFIED, NO_COUNTEREXAMPLE, COUNTEREXAMPLE, NOT_APPLICABLE)
VARIANTS = ("beurling", "roumieu")


def normalize_variant(variant: str) -> str:
    v = str(variant).strip().lower()
    aliases = {"b": "beurling", "(": "beurling", "()": "beurling", "r": "roumieu", "{": "roumieu", "{}": "roumieu"}
    v = aliases.get(v, v)
    if v not in VARIANTS:
        raise ValueError(f"variant must be 'beurling' or 'roumieu', got {variant!r}")
    return v


def holds(verdict: str) -> bool:
    """True for the two non-counterexample verdicts."""
    return verdict in (VERIFIED, NO_COUNTEREXAMPLE)


def combine_verdicts(verdicts) -> str:
    """Conjunction of verdicts: any counterexample wins, analytic only if all are."""
    vs = list(verdicts)
    if not vs:
        return VERIFIED
    if COUNTEREXAMPLE in vs:
        return COUNTEREXAMPLE
    if NOT_APPLICABLE in vs:
        return NOT_APPLICABLE
    if all(v == VERIFIED for v in vs):
        return VERIFIED
    return NO_COUNTEREXAMPLE


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(float(obj.real)), "im": jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


@dataclass
class ConditionReport:
    condition: str
    variant: str | None
    verdict: str
    witness: Any = None
    counterexample: Any = None
    search: dict = field(default_factory=dict)
    notes: str = ""

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def holds(self) -> bool:
        return holds(self.verdict)

    def to_dict(self) -> dict:
        out = {
            "condition": self.condition,
            "variant": self.variant,
            "verdict": self.verdict,
            "witness": jsonable(self.witness),
            "counterexample": jsonable(self.counterexample),
            "search": jsonable(self.search),
        }
        if self.notes:
            out["notes"] = self.notes
        return out


@dataclass
class BoundReport:
    """``passed`` iff ``lhs <= rhs * (1 + tolerance)``."""

    name: str
    lhs: float
    rhs: float
    constants: dict = field(default_factory=dict)
    tolerance: float = 1e-6

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs * (1.0 + self.tolerance))

    @property
    def slack(self) -> float:
        """Relative room left, ``1 - lhs/rhs`` (0 when both sides vanish)."""
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else -math.inf
        return 1.0 - self.lhs / self.rhs

    def to_dict(self) -> dict:
        return jsonable({
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "pass": self.passed,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "constants": self.constants,
        })


@dataclass
class KernelRoundTripReport:
    rank: int | None
    sup_error: float
    grid_sizes: tuple[int, int]
    window_tags: dict = field(default_factory=dict)
    pairings: tuple[complex, complex] = (0j, 0j)

    def __post_init__(self):
        if not self.sup_error >= 0.0:
            raise ValueError("round-trip error must be non-negative")

    def to_dict(self) -> dict:
        return jsonable({
            "rank": self.rank,
            "sup_error": self.sup_error,
            "grid_sizes": list(self.grid_sizes),
            "window_tags": self.window_tags,
            "pairings": list(self.pairings),
        })
