"""Dicke, Tavis-Cummings and Hopfield Hamiltonians, alone or with the ancilla qubit.

All frequencies are in units of the cavity frequency ω_c and ħ = 1.
"""
from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.errors import SpaceMismatchError
from app.physics.hilbert import (
    OperatorMatrix,
    SpaceSpec,
    destroy,
    embed,
    pauli_factor,
    spin_factors,
)

logger = logging.getLogger(__name__)


class ModelKind(str, Enum):
    DICKE = "Dicke"
    TAVIS_CUMMINGS = "TavisCummings"
    HOPFIELD = "Hopfield"


class ModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    kind: ModelKind
    omega_c: float = Field(1.0, gt=0)
    omega_0: float = Field(1.0, gt=0)
    lam: float = Field(0.0, ge=0, alias="lambda")
    N: int = Field(..., ge=1)
    D_override: Optional[float] = Field(None, ge=0)

    @model_validator(mode="after")
    def _d_only_for_hopfield(self):
        if self.D_override is not None and self.kind is not ModelKind.HOPFIELD:
            raise ValueError("D_override only applies to the Hopfield model")
        return self

    @property
    def D(self) -> float:
        if self.kind is not ModelKind.HOPFIELD:
            return 0.0
        if self.D_override is not None:
            return self.D_override
        return self.lam**2 / self.omega_0

    @property
    def coupling(self) -> float:
        return self.lam / math.sqrt(self.N)

    def with_lambda(self, lam: float) -> "ModelSpec":
        return self.model_copy(update={"lam": float(lam)})

    def with_N(self, N: int) -> "ModelSpec":
        return self.model_copy(update={"N": int(N)})


class AncillaSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    omega_M: float = Field(..., gt=0)
    g_M: float = Field(0.1, ge=0)


def _check_space(model: ModelSpec, space: SpaceSpec) -> None:
    if space.N != model.N:
        raise SpaceMismatchError(f"space has N={space.N}, model has N={model.N}")


def system_hamiltonian_factors(model: ModelSpec, space: SpaceSpec) -> np.ndarray:
    """H_S on boson ⊗ spin only; products are taken factor-wise before embedding."""
    _check_space(model, space)
    system = space.system_space()
    a = destroy(space.boson_dim)
    x = a + a.T
    spin = spin_factors(space.N)

    h = model.omega_c * embed(system, boson=a.T @ a) + model.omega_0 * embed(system, spin=spin["Jz"])
    c = model.coupling
    if model.kind is ModelKind.TAVIS_CUMMINGS:
        h = h + c * (embed(system, boson=a.T, spin=spin["Jminus"]) + embed(system, boson=a, spin=spin["Jplus"]))
    else:
        h = h + c * embed(system, boson=x, spin=spin["Jplus"] + spin["Jminus"])
    if model.kind is ModelKind.HOPFIELD and model.D:
        h = h + model.D * embed(system, boson=x @ x)
    return h


def build_system_hamiltonian(model: ModelSpec, space: SpaceSpec) -> OperatorMatrix:
    h = system_hamiltonian_factors(model, space)
    if space.include_ancilla:
        h = np.kron(h, np.eye(2))
    return OperatorMatrix(h, f"H_{model.kind.value}")


def build_full_hamiltonian(model: ModelSpec, ancilla: AncillaSpec, space: SpaceSpec) -> OperatorMatrix:
    """H_{S+M} = H_S + (ω_M/2)σ_z + g_M (a† + a) σ_x."""
    if not space.include_ancilla:
        raise SpaceMismatchError("full Hamiltonian needs a space with the ancilla factor")
    a = destroy(space.boson_dim)
    h = np.kron(system_hamiltonian_factors(model, space), np.eye(2))
    h = h + 0.5 * ancilla.omega_M * embed(space, ancilla=pauli_factor("z"))
    if ancilla.g_M:
        h = h + ancilla.g_M * embed(space, boson=a + a.T, ancilla=pauli_factor("x"))
    return OperatorMatrix(h, f"H_{model.kind.value}+M")


def check_symmetry(H: OperatorMatrix, S: OperatorMatrix) -> float:
    """Largest element magnitude of HS - SH."""
    if H.dim != S.dim:
        raise SpaceMismatchError(f"dimension mismatch {H.dim} vs {S.dim}")
    c = H.entries @ S.entries - S.entries @ H.entries
    return float(np.max(np.abs(c))) if c.size else 0.0
