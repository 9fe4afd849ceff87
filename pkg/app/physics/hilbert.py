"""Truncated Hilbert spaces and elementary operators.

Basis ordering is boson ⊗ spin ⊗ ancilla with the row-major ``np.kron``
convention, so the flat index of |n, k, s> is ``(n * (N + 1) + k) * 2 + s``.
The spin factor is the symmetric sector j = N/2 with basis |j, m>, m = -j..j
in ascending order (k = m + j). The ancilla basis is (|down>, |up>).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.errors import SpaceMismatchError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12

SpinComponent = Literal["Jz", "Jplus", "Jminus", "Jx"]
PauliComponent = Literal["x", "z", "plus", "minus"]


# ---------- SPACE ----------
class SpaceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_max: int = Field(16, ge=1, description="highest Fock level retained")
    N: int = Field(..., ge=1, description="number of two-level atoms")
    include_ancilla: bool = True

    @property
    def boson_dim(self) -> int:
        return self.n_max + 1

    @property
    def spin_dim(self) -> int:
        return self.N + 1

    @property
    def ancilla_dim(self) -> int:
        return 2 if self.include_ancilla else 1

    @property
    def system_dim(self) -> int:
        return self.boson_dim * self.spin_dim

    @property
    def dim(self) -> int:
        return self.system_dim * self.ancilla_dim

    def system_space(self) -> "SpaceSpec":
        return self.model_copy(update={"include_ancilla": False})

    def with_n_max(self, n_max: int) -> "SpaceSpec":
        return SpaceSpec(n_max=n_max, N=self.N, include_ancilla=self.include_ancilla)


# ---------- OPERATOR ----------
@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.array(self.entries, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SpaceMismatchError(f"operator {self.label!r} is not square: {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def hermiticity_defect(self) -> float:
        m = self.entries
        return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_defect() < tol

    def require_dim(self, dim: int) -> None:
        if self.dim != dim:
            raise SpaceMismatchError(f"operator {self.label!r} has dim {self.dim}, expected {dim}")


# ---------- FACTOR MATRICES ----------
def destroy(levels: int) -> np.ndarray:
    """Boson annihilator on ``levels`` Fock states, <n-1|a|n> = sqrt(n)."""
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1)


def spin_factors(N: int) -> dict[str, np.ndarray]:
    j = N / 2
    m = np.arange(N + 1) - j
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.diag(ladder, -1)  # <m+1|J+|m> sits one row below the diagonal
    jm = jp.T.copy()
    return {
        "Jz": np.diag(m),
        "Jplus": jp,
        "Jminus": jm,
        "Jx": (jp + jm) / 2,
    }


def pauli_factor(which: PauliComponent) -> np.ndarray:
    if which == "x":
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    if which == "z":
        return np.diag([-1.0, 1.0])
    if which == "plus":
        return np.array([[0.0, 0.0], [1.0, 0.0]])
    if which == "minus":
        return np.array([[0.0, 1.0], [0.0, 0.0]])
    raise ValueError(f"unknown Pauli component: {which}")


def embed(
    space: SpaceSpec,
    boson: Optional[np.ndarray] = None,
    spin: Optional[np.ndarray] = None,
    ancilla: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Tensor a product of factor matrices into the full space (identity where omitted)."""
    b = np.eye(space.boson_dim) if boson is None else boson
    s = np.eye(space.spin_dim) if spin is None else spin
    out = np.kron(b, s)
    if space.include_ancilla:
        out = np.kron(out, np.eye(2) if ancilla is None else ancilla)
    elif ancilla is not None:
        raise SpaceMismatchError("space has no ancilla factor")
    return out


# ---------- OPERATORS ----------
def boson_annihilator(space: SpaceSpec) -> OperatorMatrix:
    return OperatorMatrix(embed(space, boson=destroy(space.boson_dim)), "a")


def collective_spin(space: SpaceSpec, which: SpinComponent) -> OperatorMatrix:
    factors = spin_factors(space.N)
    if which not in factors:
        raise ValueError(f"unknown spin component: {which}")
    return OperatorMatrix(embed(space, spin=factors[which]), which)


def ancilla_pauli(space: SpaceSpec, which: PauliComponent) -> OperatorMatrix:
    if not space.include_ancilla:
        raise SpaceMismatchError("ancilla operator requested on a space without ancilla")
    return OperatorMatrix(embed(space, ancilla=pauli_factor(which)), f"sigma_{which}")


def _excitation_diagonal(space: SpaceSpec) -> np.ndarray:
    n = np.arange(space.boson_dim)
    k = np.arange(space.spin_dim)  # m + N/2
    counts = (n[:, None] + k[None, :]).reshape(-1)
    if space.include_ancilla:
        counts = np.repeat(counts, 2)
    return counts


def excitation_number(space: SpaceSpec) -> OperatorMatrix:
    """a†a + J_z + N/2; the ancilla is not counted."""
    return OperatorMatrix(np.diag(_excitation_diagonal(space).astype(float)), "N_exc")


def parity_operator(space: SpaceSpec) -> OperatorMatrix:
    counts = _excitation_diagonal(space)
    if space.include_ancilla:
        counts = counts + np.tile([0, 1], space.system_dim)
    return OperatorMatrix(np.diag(np.where(counts % 2 == 0, 1.0, -1.0)), "parity")


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> np.ndarray:
    if a.dim != b.dim:
        raise SpaceMismatchError(f"dimension mismatch {a.dim} vs {b.dim}")
    return a.entries @ b.entries - b.entries @ a.entries
