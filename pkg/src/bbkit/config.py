"""Run configurations for the batch CLI (validated with pydantic)."""
from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .funcgrid import Grid, LIBRARY_TAGS, SampledFunction, library_function
from .weights.systems import WeightFunction, WeightSystem, system_from_config
from .weights.tails import QuadratureSpec, SearchSpec

Variant = Literal["beurling", "roumieu"]
Condition = Literal["alpha", "M", "SQ", "N", "S", "gamma"]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class GridConfig(_Model):
    N: int = Field(256, gt=0)
    T: float = Field(8.0, gt=0)
    dim: int = Field(1, ge=1, le=2)

    @field_validator("N")
    @classmethod
    def _power_of_two(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError("N must be a power of two")
        return v

    def build(self) -> Grid:
        return Grid.from_extent(self.dim, self.N, self.T)


class FunctionSpec(_Model):
    tag: str = "gaussian"
    params: dict[str, Any] = Field(default_factory=dict)

    @field_validator("tag")
    @classmethod
    def _known(cls, v: str) -> str:
        if v not in LIBRARY_TAGS:
            raise ValueError(f"unknown library function {v!r}")
        return v

    def build(self, grid: Grid) -> SampledFunction:
        return library_function(self.tag, self.params, grid)


def _check_system(v: dict) -> dict:
    if not v:
        raise ValueError("empty weight-system section")
    system_from_config(v)
    return v


class SearchConfig(_Model):
    radius: float = Field(16.0, gt=0)
    K: Optional[int] = Field(None, ge=1)
    lambdas: Optional[list[float]] = Field(None, min_length=1)

    def build(self) -> SearchSpec:
        kw: dict[str, Any] = {"radius": self.radius, "K": self.K}
        if self.lambdas:
            kw["lambdas"] = tuple(self.lambdas)
        return SearchSpec(**kw)


class QuadConfig(_Model):
    T: float = Field(20.0, gt=0)
    h: float = Field(0.05, gt=0)
    R_tail: float = Field(1e30, gt=0)
    delta: float = Field(0.1, gt=0)

    def build(self) -> QuadratureSpec:
        return QuadratureSpec(T=self.T, h=self.h, R_tail=self.R_tail, delta=self.delta)


class WeightSpec(_Model):
    """A member ``w^lam`` of a system, or ``{"family": "unit"}`` for the constant weight 1."""

    family: str = "power"
    params: dict[str, Any] = Field(default_factory=dict)
    kind: Literal["exponential", "dilation"] = "exponential"
    lam: float = Field(1.0, gt=0, alias="lambda")
    dim: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _buildable(self):
        if self.family != "unit":
            self.system()
        return self

    def system(self) -> WeightSystem:
        return system_from_config({"family": self.family, "params": self.params, "kind": self.kind, "dim": self.dim})

    def build(self) -> WeightFunction:
        if self.family == "unit":
            return WeightFunction.unit(self.dim)
        return self.system().member(self.lam)


def _abs_weight(lam: float) -> WeightSpec:
    return WeightSpec(family="power", params={"s": 1.0}, lam=lam)


# commands --------------------------------------------------------------------


class WeightsCheckConfig(_Model):
    command: Literal["weights-check"] = "weights-check"
    system: dict[str, Any]
    variants: list[Variant] = Field(default_factory=lambda: ["beurling", "roumieu"], min_length=1)
    conditions: list[Condition] = Field(default_factory=lambda: ["alpha", "M", "SQ", "N", "S", "gamma"], min_length=1)
    method: Literal["auto", "grid"] = "auto"
    search: SearchConfig = Field(default_factory=SearchConfig)
    quadrature: QuadConfig = Field(default_factory=QuadConfig)

    @field_validator("system")
    @classmethod
    def _system(cls, v: dict) -> dict:
        return _check_system(v)


def _default_functions() -> list[FunctionSpec]:
    return [
        FunctionSpec(tag="gaussian"),
        FunctionSpec(tag="hermite", params={"order": 1}),
        FunctionSpec(tag="hermite", params={"order": 2}),
        FunctionSpec(tag="gaussian", params={"center": 1.0, "modulation": 0.5}),
    ]


class StftReconstructConfig(_Model):
    command: Literal["stft-reconstruct"] = "stft-reconstruct"
    grid: GridConfig = Field(default_factory=GridConfig)
    functions: list[FunctionSpec] = Field(default_factory=_default_functions, min_length=1)
    psi: FunctionSpec = Field(default_factory=FunctionSpec)
    gamma: FunctionSpec = Field(default_factory=FunctionSpec)
    tolerance: float = Field(1e-5, ge=0)


class KernelRoundtripConfig(_Model):
    command: Literal["kernel-roundtrip"] = "kernel-roundtrip"
    grid: GridConfig = Field(default_factory=lambda: GridConfig(N=32, T=4.0))
    factors: list[tuple[FunctionSpec, FunctionSpec]] = Field(default_factory=lambda: [(FunctionSpec(), FunctionSpec())], min_length=1)
    psi1: FunctionSpec = Field(default_factory=FunctionSpec)
    gamma1: FunctionSpec = Field(default_factory=FunctionSpec)
    psi2: FunctionSpec = Field(default_factory=FunctionSpec)
    gamma2: FunctionSpec = Field(default_factory=FunctionSpec)
    tolerance: float = Field(1e-3, ge=0)
    projective: bool = True

    @field_validator("grid")
    @classmethod
    def _one_d(cls, v: GridConfig) -> GridConfig:
        if v.dim != 1:
            raise ValueError("kernel grids are 1-d per factor")
        return v


class SequenceSpec(_Model):
    j: list[int] = Field(min_length=1)
    re: list[float]
    im: Optional[list[float]] = None

    def payload(self, J: int) -> dict:
        return {"j": self.j, "re": self.re, "im": self.im or [0.0] * len(self.j), "J": J}


class KotheReportConfig(_Model):
    command: Literal["kothe-report"] = "kothe-report"
    system: dict[str, Any]
    J: int = Field(5, ge=0)
    window: int = Field(40, ge=1)
    variants: list[Variant] = Field(default_factory=lambda: ["beurling", "roumieu"], min_length=1)
    sequences: list[SequenceSpec] = Field(default_factory=list)
    norm_lambda: float = Field(1.0, gt=0)
    quadrature: QuadConfig = Field(default_factory=QuadConfig)

    @field_validator("system")
    @classmethod
    def _system(cls, v: dict) -> dict:
        return _check_system(v)


class StftBoundCase(_Model):
    phi: FunctionSpec = Field(default_factory=FunctionSpec)
    psi: FunctionSpec = Field(default_factory=FunctionSpec)
    v: list[WeightSpec] = Field(min_length=4, max_length=4)
    w: list[WeightSpec] = Field(min_length=4, max_length=4)
    C0: float = Field(1.0, gt=0)
    C1: float = Field(1.0, gt=0)


class AdjointBoundCase(_Model):
    f: FunctionSpec = Field(default_factory=FunctionSpec)
    analysis: FunctionSpec = Field(default_factory=FunctionSpec)
    psi: FunctionSpec = Field(default_factory=FunctionSpec)
    v: list[WeightSpec] = Field(min_length=4, max_length=4)
    w: list[WeightSpec] = Field(min_length=4, max_length=4)
    C1: float = Field(1.0, gt=0)


class NuclearityCase(_Model):
    family: list[FunctionSpec] = Field(min_length=1)
    system: dict[str, Any] = Field(default_factory=lambda: {"family": "power", "params": {"s": 1.0}})
    freq_system: Optional[dict[str, Any]] = None
    lam: float = Field(0.5, gt=0, alias="lambda")
    mu: float = Field(1.0, gt=0)

    @field_validator("system")
    @classmethod
    def _system(cls, v: dict) -> dict:
        return _check_system(v)


def _default_stft_cases() -> list[StftBoundCase]:
    w = [_abs_weight(1.0), _abs_weight(0.5), _abs_weight(0.5), _abs_weight(0.5)]
    return [StftBoundCase(v=w, w=w)]


def _default_adjoint_cases() -> list[AdjointBoundCase]:
    w = [_abs_weight(1 / 3), _abs_weight(1.0), _abs_weight(1.0), _abs_weight(1.0)]
    return [AdjointBoundCase(v=w, w=w)]


def _default_nuclearity() -> list[NuclearityCase]:
    fam = [FunctionSpec(tag="gaussian", params={"center": float(j)}) for j in range(-3, 4)]
    return [NuclearityCase(family=fam)]


class BoundsVerifyConfig(_Model):
    command: Literal["bounds-verify"] = "bounds-verify"
    grid: GridConfig = Field(default_factory=GridConfig)
    stft_bounds: list[StftBoundCase] = Field(default_factory=_default_stft_cases, min_length=1)
    adjoint_bounds: list[AdjointBoundCase] = Field(default_factory=_default_adjoint_cases, min_length=1)
    nuclearity: list[NuclearityCase] = Field(default_factory=_default_nuclearity, min_length=1)
    quadrature: QuadConfig = Field(default_factory=QuadConfig)


class RandomSequences(_Model):
    count: int = Field(5, ge=1)
    support: int = Field(3, ge=0)
    seed: int = 0


class Phi0CheckConfig(_Model):
    command: Literal["phi0-check"] = "phi0-check"
    phi: FunctionSpec = Field(default_factory=FunctionSpec)
    grid: GridConfig = Field(default_factory=lambda: GridConfig(N=512, T=16.0))
    J: int = Field(5, ge=0)
    rule: Literal["spectral", "trapezoid"] = "spectral"
    sequences: list[SequenceSpec] = Field(default_factory=list)
    random: Optional[RandomSequences] = Field(default_factory=RandomSequences)
    phi0_tolerance: float = Field(1e-6, ge=0)
    identity_tolerance: float = Field(1e-5, ge=0)


COMMANDS: dict[str, type[_Model]] = {
    "weights-check": WeightsCheckConfig,
    "stft-reconstruct": StftReconstructConfig,
    "kernel-roundtrip": KernelRoundtripConfig,
    "kothe-report": KotheReportConfig,
    "bounds-verify": BoundsVerifyConfig,
    "phi0-check": Phi0CheckConfig,
}


def load_config(command: str, payload: Any) -> _Model:
    """Validate ``payload`` for ``command``; a ``command`` key, if present, must agree."""
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    if not isinstance(payload, dict):
        raise ValueError("config must be a JSON object")
    given = payload.get("command", command)
    if given != command:
        raise ValueError(f"config is for {given!r}, not {command!r}")
    return COMMANDS[command].model_validate(payload)


def json_schemas() -> dict[str, dict]:
    return {name: model.model_json_schema(by_alias=True) for name, model in COMMANDS.items()}
