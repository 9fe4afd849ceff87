from __future__ import annotations

from typing import Any, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.errors import ConfigError
from app.physics.dynamics import DissipationSpec, DriveSpec, PropagationSettings
from app.physics.models import AncillaSpec, ModelSpec
from app.physics.spectra import DEGENERACY_TOL, VConvention

# Column names of the quantity vocabulary, in CSV order
SPECTRAL_QUANTITIES = (
    "shift_numeric",
    "shift_analytic",
    "fidelity_G",
    "n_phot",
    "anomalous",
    "energies",
    "weights",
)
SPECTROSCOPIC_QUANTITIES = ("n_up", "fidelity_F")
QUANTITIES = SPECTRAL_QUANTITIES + SPECTROSCOPIC_QUANTITIES
LEVEL_QUANTITIES = ("energies", "weights")

AxisKind = Literal["lambda_grid", "omega_p_grid", "N_list", "eta_list"]

# Column carrying the axis value in every row
AXIS_COLUMN = {
    "lambda_grid": "lambda",
    "omega_p_grid": "omega_p",
    "N_list": "N",
    "eta_list": "eta",
}

MAX_POINTS = 100_000


class BaseSetup(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    model: ModelSpec
    ancilla: AncillaSpec
    dissipation: DissipationSpec = DissipationSpec()
    drive: DriveSpec = DriveSpec()


class NumericsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    n_max: Optional[int] = Field(None, ge=1, description="fixed Fock cutoff; None validates adaptively")
    n_max_start: int = Field(16, ge=1)
    K: int = Field(24, ge=2)
    degeneracy_tol: float = Field(DEGENERACY_TOL, gt=0)
    convention: VConvention = VConvention.INTERACTION
    levels: int = Field(20, ge=1)
    omega_p_points: int = Field(201, ge=5)
    omega_p_half_width: float = Field(0.05, gt=0)
    propagation: PropagationSettings = PropagationSettings()


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    name: str = "custom"
    base: BaseSetup
    axis: AxisKind = "lambda_grid"
    values: List[float]
    lambdas: Optional[List[float]] = None
    omega_p_grid: Optional[List[float]] = None
    outputs: List[str]
    workers: int = Field(1, ge=1)
    numerics: NumericsSpec = NumericsSpec()

    @field_validator("values")
    @classmethod
    def val_values(cls, v):
        if len(v) == 0:
            raise ValueError("values empty")
        if len(v) > MAX_POINTS:
            raise ValueError("too many values")
        return v

    @field_validator("outputs")
    @classmethod
    def val_outputs(cls, v):
        if len(v) == 0:
            raise ValueError("outputs empty")
        for name in v:
            if name not in QUANTITIES:
                raise ValueError(f"unknown quantity {name!r}; expected one of {', '.join(QUANTITIES)}")
        if len(set(v)) != len(v):
            raise ValueError("duplicate outputs")
        return v

    @property
    def spectroscopic(self) -> bool:
        return any(q in SPECTROSCOPIC_QUANTITIES for q in self.outputs)

    @property
    def per_level(self) -> bool:
        return any(q in LEVEL_QUANTITIES for q in self.outputs)

    def secondary_lambdas(self) -> list[float]:
        if self.axis == "lambda_grid":
            return []
        return list(self.lambdas) if self.lambdas else [self.base.model.lam]

    def with_outputs(self, outputs: list[str]) -> "SweepSpec":
        return validate_config({**self.model_dump(mode="json", by_alias=True), "outputs": outputs})


def _strictly_monotone(values: list[float]) -> bool:
    steps = [b - a for a, b in zip(values, values[1:])]
    return all(s > 0 for s in steps) or all(s < 0 for s in steps)


def _first_error(e: ValidationError) -> ConfigError:
    err = e.errors()[0]
    key = ".".join(str(p) for p in err.get("loc", ()))
    if err.get("type") == "extra_forbidden":
        return ConfigError(f"unknown key {key!r}", key)
    return ConfigError(f"{key}: {err.get('msg')}", key or None)


def validate_config(obj: dict[str, Any]) -> SweepSpec:
    try:
        s = SweepSpec.model_validate(obj)
    except ValidationError as e:
        raise _first_error(e) from e

    if len(s.values) > 1 and not _strictly_monotone(s.values):
        raise ConfigError("values must be strictly monotone", "values")
    for v in s.values:
        if s.axis == "N_list" and (v < 1 or v != int(v)):
            raise ConfigError("N_list values must be positive integers", "values")
        if s.axis in ("lambda_grid", "eta_list") and v < 0:
            raise ConfigError(f"{s.axis} values must be non-negative", "values")
        if s.axis == "omega_p_grid" and v <= 0:
            raise ConfigError("omega_p values must be positive", "values")
    if s.lambdas is not None:
        if s.axis == "lambda_grid":
            raise ConfigError("lambdas only applies to non-lambda axes", "lambdas")
        if not s.lambdas or any(v < 0 for v in s.lambdas):
            raise ConfigError("lambdas must be a non-empty list of non-negative couplings", "lambdas")
    if s.axis == "omega_p_grid":
        if not s.spectroscopic:
            raise ConfigError("omega_p_grid axis needs n_up or fidelity_F among the outputs", "outputs")
        if s.omega_p_grid is not None:
            raise ConfigError("omega_p_grid is the axis here; give the frequencies in values", "omega_p_grid")
    if s.omega_p_grid is not None:
        if len(s.omega_p_grid) < 5 or any(w <= 0 for w in s.omega_p_grid):
            raise ConfigError("omega_p_grid needs at least 5 positive frequencies", "omega_p_grid")
    return s
