"""Diagonalization, spectroscopic weights, ancilla Lamb shift and ground-state fidelity.

The numerical Lamb shift is read from the eigenvalues of H_{S+M}: the excited
level with the largest weight |<G|σ_x|l>|² is the spectroscopically active one
and its transition energy minus ω_M is the shift. The analytical shift is the
second-order dispersive expression in g_M evaluated on the ground state of H_S.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
import scipy.linalg

from app.errors import ConvergenceError, NotHermitianError, PoleError, SpaceMismatchError
from app.physics.hilbert import (
    HERMITIAN_TOL,
    OperatorMatrix,
    SpaceSpec,
    ancilla_pauli,
    destroy,
    parity_operator,
    spin_factors,
)
from app.physics.models import (
    AncillaSpec,
    ModelKind,
    ModelSpec,
    build_full_hamiltonian,
    system_hamiltonian_factors,
)

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-9
CROSSING_MARGIN = 0.1


class VConvention(str, Enum):
    """Normalisation of V^(Dicke) in the dispersive formula.

    ``printed``: (λ/√N)(a+a†)J_x. ``interaction``: (λ/√N)(a+a†)(J_+ + J_-),
    the operator that actually appears in H_Dicke.
    """

    PRINTED = "printed"
    INTERACTION = "interaction"


# ---------- EIGENSYSTEM ----------
@dataclass(frozen=True)
class EigenDecomposition:
    energies: np.ndarray
    states: np.ndarray
    sectors: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("energies", "states", "sectors"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, copy=True)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def ground_state(self) -> np.ndarray:
        return self.states[:, 0]

    def excitation_energies(self) -> np.ndarray:
        return self.energies - self.energies[0]

    def reconstruction_error(self, H: OperatorMatrix) -> float:
        v = self.states
        rebuilt = (v * self.energies) @ v.conj().T
        return float(np.max(np.abs(rebuilt - H.entries)))


def _check_symmetric(H: OperatorMatrix) -> None:
    scale = max(1.0, float(np.max(np.abs(H.entries)))) if H.entries.size else 1.0
    defect = H.hermiticity_defect()
    if defect > HERMITIAN_TOL * scale:
        raise NotHermitianError(f"{H.label or 'matrix'} is not Hermitian (defect {defect:.3e})")


def _eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return scipy.linalg.eigh(m)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"eigensolver failed: {e}") from e


def diagonalize(
    H: OperatorMatrix,
    symmetry: Optional[OperatorMatrix] = None,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> EigenDecomposition:
    """Dense symmetric eigendecomposition, optionally block by block of a ±1 symmetry.

    With ``symmetry`` every eigenvector has a definite symmetry label. Levels
    closer than ``degeneracy_tol`` are ordered even sector first, so the ground
    state of a tunnelling doublet is reproducible.
    """
    _check_symmetric(H)
    m = H.entries
    if symmetry is None:
        energies, states = _eigh(m)
        return EigenDecomposition(energies, states)

    symmetry.require_dim(H.dim)
    labels = np.real(np.diag(symmetry.entries))
    if not np.allclose(symmetry.entries, np.diag(labels)) or not np.all(np.isin(labels, (-1.0, 1.0))):
        raise SpaceMismatchError("symmetry operator must be diagonal with entries ±1")

    even = np.flatnonzero(labels > 0)
    odd = np.flatnonzero(labels < 0)
    leak = np.max(np.abs(m[np.ix_(even, odd)])) if even.size and odd.size else 0.0
    if leak > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(m)))):
        raise SpaceMismatchError(f"Hamiltonian does not commute with {symmetry.label!r} (leak {leak:.3e})")

    dim = H.dim
    energies = np.empty(dim)
    states = np.zeros((dim, dim), dtype=m.dtype)
    sectors = np.empty(dim)
    col = 0
    for label, idx in ((1.0, even), (-1.0, odd)):
        if idx.size == 0:
            continue
        w, v = _eigh(m[np.ix_(idx, idx)])
        energies[col:col + idx.size] = w
        states[idx, col:col + idx.size] = v
        sectors[col:col + idx.size] = label
        col += idx.size

    order = np.argsort(energies, kind="stable")
    for i in range(1, dim):
        lo, hi = order[i - 1], order[i]
        if energies[hi] - energies[lo] <= degeneracy_tol and sectors[hi] > sectors[lo]:
            order[i - 1], order[i] = hi, lo
    return EigenDecomposition(energies[order], states[:, order], sectors[order])


# ---------- WEIGHTS & SHIFT ----------
def spectroscopic_weights(eig: EigenDecomposition, sigma_x: OperatorMatrix) -> np.ndarray:
    """w_l = |<G|σ_x|l>|² for every level l."""
    sigma_x.require_dim(eig.dim)
    amplitudes = eig.states.conj().T @ (sigma_x.entries @ eig.ground_state)
    return np.abs(amplitudes) ** 2


@dataclass(frozen=True)
class NumericShift:
    shift_numeric: float
    dominant_level: int
    weight: float
    runner_up_level: Optional[int]
    runner_up_weight: float
    avoided_crossing: bool


def lamb_shift_numeric(eig: EigenDecomposition, sigma_x: OperatorMatrix, omega_M: float) -> NumericShift:
    weights = spectroscopic_weights(eig, sigma_x)
    excited = weights[1:]
    order = np.argsort(-excited, kind="stable")
    top = int(order[0]) + 1
    w_top = float(weights[top])
    runner, w_runner = None, 0.0
    if order.size > 1:
        runner = int(order[1]) + 1
        w_runner = float(weights[runner])
    crossing = w_top - w_runner < CROSSING_MARGIN * w_top
    if crossing:
        logger.warning(
            "avoided crossing: levels %d and %d carry weights %.3f and %.3f", top, runner, w_top, w_runner
        )
    shift = float(eig.energies[top] - eig.energies[0]) - omega_M
    return NumericShift(shift, top, w_top, runner, w_runner, crossing)


# ---------- GROUND STATE OF S ----------
@dataclass(frozen=True)
class GroundExpectations:
    quad: float
    V: float
    n_phot: float
    anomalous: float


def _system_factors(model: ModelSpec, eig_S: EigenDecomposition) -> tuple[int, np.ndarray]:
    spin_dim = model.N + 1
    if eig_S.dim % spin_dim:
        raise SpaceMismatchError(f"system eigenbasis of dim {eig_S.dim} does not fit N={model.N}")
    boson_dim = eig_S.dim // spin_dim
    psi = eig_S.ground_state.reshape(boson_dim, spin_dim)
    return boson_dim, psi


def _expect(psi: np.ndarray, boson: Optional[np.ndarray] = None, spin: Optional[np.ndarray] = None) -> float:
    out = psi
    if boson is not None:
        out = boson @ out
    if spin is not None:
        out = out @ spin.T
    return float(np.real(np.vdot(psi, out)))


def ground_expectations(
    model: ModelSpec,
    eig_S: EigenDecomposition,
    convention: VConvention = VConvention.INTERACTION,
) -> GroundExpectations:
    """<(a+a†)²>, <V^(S)>, <a†a> and <a†² + a²> on the ground state of H_S."""
    boson_dim, psi = _system_factors(model, eig_S)
    a = destroy(boson_dim)
    x = a + a.T
    spin = spin_factors(model.N)
    c = model.coupling

    quad = _expect(psi, boson=x @ x)
    if model.kind is ModelKind.TAVIS_CUMMINGS:
        v = c * (_expect(psi, boson=a, spin=spin["Jplus"]) + _expect(psi, boson=a.T, spin=spin["Jminus"]))
    else:
        jx = spin["Jx"] if convention is VConvention.PRINTED else spin["Jplus"] + spin["Jminus"]
        v = c * _expect(psi, boson=x, spin=jx)
        if model.kind is ModelKind.HOPFIELD:
            v += 2.0 * model.D * quad
    return GroundExpectations(
        quad=quad,
        V=v,
        n_phot=_expect(psi, boson=a.T @ a),
        anomalous=_expect(psi, boson=a.T @ a.T + a @ a),
    )


def dispersive_coefficients(omega_M: float, omega_c: float) -> tuple[float, float]:
    if math.isclose(omega_M, omega_c, rel_tol=0.0, abs_tol=1e-12):
        raise PoleError(f"ω_M = ω_c = {omega_c} is a pole of the dispersive shift")
    lo, hi = omega_M - omega_c, omega_M + omega_c
    return 1.0 / lo + 1.0 / hi, 1.0 / lo**2 - 1.0 / hi**2


def lamb_shift_analytic(model: ModelSpec, ancilla: AncillaSpec, expectations: GroundExpectations) -> float:
    first, second = dispersive_coefficients(ancilla.omega_M, model.omega_c)
    g2 = ancilla.g_M**2
    return g2 * first * expectations.quad + g2 * second * expectations.V


def exact_second_order_shift(model: ModelSpec, ancilla: AncillaSpec, eig_S: EigenDecomposition) -> float:
    """g_M² Σ_k |<k|X|G_S>|² [1/(ω_M - Δ_k) + 1/(ω_M + Δ_k)], before expanding Δ_k around ω_c."""
    boson_dim, _ = _system_factors(model, eig_S)
    a = destroy(boson_dim)
    x = np.kron(a + a.T, np.eye(model.N + 1))
    amplitudes = eig_S.states.conj().T @ (x @ eig_S.ground_state)
    deltas = eig_S.excitation_energies()
    with np.errstate(divide="ignore"):
        terms = 1.0 / (ancilla.omega_M - deltas) + 1.0 / (ancilla.omega_M + deltas)
    weights = np.abs(amplitudes) ** 2
    mask = weights > 0
    return float(ancilla.g_M**2 * np.sum(weights[mask] * terms[mask]))


def ground_state_fidelity(eig_SM: EigenDecomposition, eig_S: EigenDecomposition) -> float:
    """<G_S| Tr_M |G_{S+M}><G_{S+M}| |G_S>, through the 2-component ancilla overlap."""
    if eig_SM.dim != 2 * eig_S.dim:
        raise SpaceMismatchError(f"S+M dim {eig_SM.dim} is not twice the S dim {eig_S.dim}")
    joint = eig_SM.ground_state.reshape(eig_S.dim, 2)
    overlap = eig_S.ground_state.conj() @ joint
    return float(min(1.0, np.sum(np.abs(overlap) ** 2)))


# ---------- ONE POINT ----------
@dataclass(frozen=True)
class SpectralPoint:
    """Every spectral quantity of one (model, ancilla, space) configuration."""

    model: ModelSpec
    ancilla: AncillaSpec
    space: SpaceSpec
    eig_SM: EigenDecomposition
    eig_S: EigenDecomposition
    weights: np.ndarray
    numeric: NumericShift
    expectations: GroundExpectations
    shift_analytic: float
    fidelity_G: float


@dataclass(frozen=True)
class LambShiftResult:
    lam: float
    shift_numeric: float
    shift_analytic: float
    dominant_level: int
    weight: float
    fidelity_G: float
    runner_up_level: Optional[int] = None
    avoided_crossing: bool = False
    flags: tuple[str, ...] = field(default_factory=tuple)


def solve_point(
    model: ModelSpec,
    ancilla: AncillaSpec,
    space: SpaceSpec,
    convention: VConvention = VConvention.INTERACTION,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> SpectralPoint:
    if not space.include_ancilla:
        raise SpaceMismatchError("spectral point needs the ancilla factor")
    H = build_full_hamiltonian(model, ancilla, space)
    eig_SM = diagonalize(H, parity_operator(space), degeneracy_tol)
    system = space.system_space()
    H_S = OperatorMatrix(system_hamiltonian_factors(model, space), f"H_{model.kind.value}")
    eig_S = diagonalize(H_S, parity_operator(system), degeneracy_tol)

    sigma_x = ancilla_pauli(space, "x")
    weights = spectroscopic_weights(eig_SM, sigma_x)
    numeric = lamb_shift_numeric(eig_SM, sigma_x, ancilla.omega_M)
    expectations = ground_expectations(model, eig_S, convention)
    try:
        analytic = lamb_shift_analytic(model, ancilla, expectations)
    except PoleError:
        analytic = float("nan")
    return SpectralPoint(
        model=model,
        ancilla=ancilla,
        space=space,
        eig_SM=eig_SM,
        eig_S=eig_S,
        weights=weights,
        numeric=numeric,
        expectations=expectations,
        shift_analytic=analytic,
        fidelity_G=ground_state_fidelity(eig_SM, eig_S),
    )


def lamb_shift(point: SpectralPoint, degeneracy_tol: float = DEGENERACY_TOL) -> LambShiftResult:
    flags = ("avoided_crossing",) if point.numeric.avoided_crossing else ()
    gap = float(point.eig_S.energies[1] - point.eig_S.energies[0]) if point.eig_S.dim > 1 else math.inf
    if gap <= degeneracy_tol:
        # G_S is not unique; the line belongs to whichever member the ancilla selects
        logger.warning("degenerate ground state of H_S at λ=%.4f (gap %.2e)", point.model.lam, gap)
        flags += ("degenerate_ground",)
    return LambShiftResult(
        lam=point.model.lam,
        shift_numeric=point.numeric.shift_numeric,
        shift_analytic=point.shift_analytic,
        dominant_level=point.numeric.dominant_level,
        weight=point.numeric.weight,
        fidelity_G=point.fidelity_G,
        runner_up_level=point.numeric.runner_up_level,
        avoided_crossing=point.numeric.avoided_crossing,
        flags=flags,
    )


# ---------- TRUNCATION ----------
@dataclass(frozen=True)
class TruncationReport:
    converged: bool
    recommended_n_max: int
    top_occupancy: float
    shift_change: float
    tried: tuple[int, ...]


def top_fock_occupancy(eig_SM: EigenDecomposition, space: SpaceSpec) -> float:
    psi = eig_SM.ground_state.reshape(space.boson_dim, -1)
    return float(np.sum(np.abs(psi[-1]) ** 2))


def validate_truncation(
    model: ModelSpec,
    ancilla: AncillaSpec,
    space: SpaceSpec,
    tolerance: float = 1e-8,
    shift_tolerance: float = 1e-6,
    step: int = 4,
    n_max_cap: int = 160,
) -> TruncationReport:
    """Double n_max until the top Fock level is empty and the shift stops moving."""
    n_max = space.n_max
    tried: list[int] = []
    occupancy = change = float("nan")

    def shift_at(s: SpaceSpec) -> tuple[float, float]:
        H = build_full_hamiltonian(model, ancilla, s)
        eig = diagonalize(H, parity_operator(s))
        shift = lamb_shift_numeric(eig, ancilla_pauli(s, "x"), ancilla.omega_M).shift_numeric
        return shift, top_fock_occupancy(eig, s)

    while True:
        tried.append(n_max)
        current = space.with_n_max(n_max)
        shift, occupancy = shift_at(current)
        if occupancy < tolerance:
            bigger, _ = shift_at(space.with_n_max(n_max + step))
            change = abs(bigger - shift)
            if change < shift_tolerance:
                logger.info("truncation converged at n_max=%d (occupancy %.2e, Δshift %.2e)", n_max, occupancy, change)
                return TruncationReport(True, n_max, occupancy, change, tuple(tried))
        if n_max >= n_max_cap:
            logger.warning("truncation not converged at cap n_max=%d (occupancy %.2e)", n_max, occupancy)
            return TruncationReport(False, n_max, occupancy, change, tuple(tried))
        n_max = min(2 * n_max, n_max_cap)
