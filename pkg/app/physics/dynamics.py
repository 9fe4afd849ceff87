"""Zero-temperature master equation in the eigenbasis of H_{S+M}, with a coherent ancilla drive.

Everything here lives in the basis of the lowest K eigenstates of H_{S+M}.
Density matrices are flattened column by column (``order="F"``), so that
vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from app.errors import ConvergenceError, DensityMatrixError, PeakNotFoundError, SpaceMismatchError
from app.physics.hilbert import (
    OperatorMatrix,
    SpaceSpec,
    ancilla_pauli,
    boson_annihilator,
    collective_spin,
)
from app.physics.models import AncillaSpec, ModelSpec
from app.physics.spectra import (
    DEGENERACY_TOL,
    EigenDecomposition,
    SpectralPoint,
    VConvention,
    solve_point,
    validate_truncation,
)

logger = logging.getLogger(__name__)

DissipationMode = Literal["dressed", "bare"]


# ---------- RECORDS ----------
class DissipationSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    gamma_c: float = Field(0.01, ge=0)
    gamma_0: float = Field(0.01, ge=0)
    gamma_M: float = Field(0.01, ge=0)
    mode: DissipationMode = "dressed"

    def with_eta(self, eta: float) -> "DissipationSpec":
        """γ_c = γ_0 = η γ_M."""
        return self.model_copy(update={"gamma_c": eta * self.gamma_M, "gamma_0": eta * self.gamma_M})

    @property
    def max_rate(self) -> float:
        return max(self.gamma_c, self.gamma_0, self.gamma_M)


class DriveSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    omega_p: Optional[float] = Field(None, gt=0)
    Omega_p: float = Field(0.0, ge=0)


class PropagationSettings(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    method: Literal["harmonic", "stroboscopic", "transient"] = "harmonic"
    harmonics: int = Field(1, ge=1, description="drive harmonics kept on each side by the harmonic solve")
    steps_per_period: int = Field(64, ge=8)
    accuracy: float = Field(0.05, gt=0, description="dt ≤ accuracy / max(γ, ε_K - ε_G)")
    window_periods: int = Field(10, ge=1)
    rtol: float = Field(1e-6, gt=0)
    max_time: float = Field(1e5, gt=0)
    tolerance: float = Field(1e-8, gt=0, description="trace / positivity tolerance on ρ")


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DensityMatrixError(f"density matrix is not square: {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @classmethod
    def pure(cls, K: int, level: int = 0) -> "DensityMatrix":
        rho = np.zeros((K, K), dtype=complex)
        rho[level, level] = 1.0
        return cls(rho)

    @property
    def basis_size(self) -> int:
        return self.entries.shape[0]

    def validate(self, tol: float = 1e-8) -> None:
        m = self.entries
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > 1e-10:
            raise DensityMatrixError(f"density matrix not Hermitian (defect {herm:.3e})")
        trace = float(np.real(np.trace(m)))
        if abs(trace - 1.0) > tol:
            raise DensityMatrixError(f"density matrix trace {trace:.12f} != 1")
        smallest = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if smallest < -tol:
            raise DensityMatrixError(f"density matrix not positive (eigenvalue {smallest:.3e})")

    def trace_distance(self, other: "DensityMatrix") -> float:
        d = self.entries - other.entries
        return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))


@dataclass(frozen=True)
class SpectroscopyPoint:
    omega_p: float
    n_up: float
    fidelity_F: float
    converged: bool = True
    residual: float = 0.0


@dataclass(frozen=True)
class PeakFit:
    peak_frequency: float
    peak_height: float
    linewidth: float


# ---------- BASIS PROJECTIONS ----------
def project(eig: EigenDecomposition, op: OperatorMatrix, K: Optional[int] = None) -> np.ndarray:
    op.require_dim(eig.dim)
    v = eig.states[:, : (eig.dim if K is None else K)]
    return v.conj().T @ op.entries @ v


def _ancilla_split(eig: EigenDecomposition, K: int) -> np.ndarray:
    if eig.dim % 2:
        raise SpaceMismatchError("eigenbasis has no ancilla factor")
    return eig.states[:, :K].reshape(eig.dim // 2, 2, K)


@dataclass(frozen=True)
class ProjectedObservables:
    sigma_x: np.ndarray
    up: np.ndarray
    ground_system: Optional[np.ndarray] = None


def up_projector(eig: EigenDecomposition, K: int) -> np.ndarray:
    """(1 + σ_z)/2 on the ancilla, in the lowest K eigenstates."""
    up = _ancilla_split(eig, K)[:, 1, :]
    return up.conj().T @ up


def ground_system_projector(eig: EigenDecomposition, eig_S: EigenDecomposition, K: int) -> np.ndarray:
    """|G_S><G_S| ⊗ 1_M in the lowest K eigenstates of H_{S+M}."""
    split = _ancilla_split(eig, K)
    if split.shape[0] != eig_S.dim:
        raise SpaceMismatchError(f"S+M dim {eig.dim} is not twice the S dim {eig_S.dim}")
    c = np.einsum("s,sak->ak", eig_S.ground_state.conj(), split)
    return c.conj().T @ c


def projected_observables(
    eig: EigenDecomposition, K: int, eig_S: Optional[EigenDecomposition] = None
) -> ProjectedObservables:
    split = _ancilla_split(eig, K)
    flipped = split[:, ::-1, :].reshape(-1, K)
    return ProjectedObservables(
        sigma_x=eig.states[:, :K].conj().T @ flipped,
        up=up_projector(eig, K),
        ground_system=None if eig_S is None else ground_system_projector(eig, eig_S, K),
    )


# ---------- JUMP OPERATORS ----------
def dressed_jump_operator(
    eig: EigenDecomposition,
    A: OperatorMatrix,
    degeneracy_tol: float = DEGENERACY_TOL,
    K: Optional[int] = None,
) -> OperatorMatrix:
    """U[A] = Σ Θ(ε_l' - ε_l) <l|A|l'> |l><l'|, keeping only energy-lowering transitions."""
    k = eig.dim if K is None else K
    a = project(eig, A, k)
    e = eig.energies[:k]
    lowering = (e[None, :] - e[:, None]) > degeneracy_tol
    return OperatorMatrix(np.where(lowering, a, 0.0), f"U[{A.label}]")


@dataclass(frozen=True)
class Couplings:
    """System operators coupled to the cavity, atom and ancilla reservoirs."""

    cavity: Optional[OperatorMatrix] = None
    atoms: Optional[OperatorMatrix] = None
    ancilla: Optional[OperatorMatrix] = None


def system_couplings(space: SpaceSpec, mode: DissipationMode = "dressed") -> Couplings:
    a = boson_annihilator(space)
    if mode == "bare":
        return Couplings(
            cavity=a,
            atoms=collective_spin(space, "Jminus"),
            ancilla=ancilla_pauli(space, "minus"),
        )
    x = OperatorMatrix(a.entries + a.entries.T, "a+a†")
    return Couplings(cavity=x, atoms=collective_spin(space, "Jx"), ancilla=ancilla_pauli(space, "x"))


# ---------- SUPEROPERATORS ----------
def _vec(m: np.ndarray) -> np.ndarray:
    return m.reshape(-1, order="F")


def _unvec(v: np.ndarray, K: int) -> np.ndarray:
    return v.reshape(K, K, order="F")


def _spre(a: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(a.shape[0]), a)


def _spost(a: np.ndarray) -> np.ndarray:
    return np.kron(a.T, np.eye(a.shape[0]))


def commutator_superoperator(h: np.ndarray) -> np.ndarray:
    """ρ ↦ -i[h, ρ]."""
    return -1j * (_spre(h) - _spost(h))


def dissipator_superoperator(a: np.ndarray) -> np.ndarray:
    """ρ ↦ 2AρA† - ρA†A - A†Aρ."""
    ada = a.conj().T @ a
    return 2.0 * np.kron(a.conj(), a) - _spost(ada) - _spre(ada)


@dataclass(frozen=True)
class Generator:
    energies: np.ndarray
    jumps: tuple[tuple[str, float, np.ndarray], ...]
    superoperator: np.ndarray
    mode: DissipationMode
    effective: np.ndarray

    @property
    def K(self) -> int:
        return self.energies.shape[0]

    @property
    def max_rate(self) -> float:
        return max((rate for _, rate, _ in self.jumps), default=0.0)

    def apply(self, rho: np.ndarray, hamiltonian: Optional[np.ndarray] = None) -> np.ndarray:
        """L ρ on one matrix or a stack of shape (..., K, K).

        ``hamiltonian`` is an extra term added to H for this call (the drive).
        """
        G = self.effective if hamiltonian is None else self.effective - 1j * hamiltonian
        out = G @ rho + rho @ G.conj().T
        for _, rate, a in self.jumps:
            out += rate * (a @ rho @ a.conj().T)
        return out


def build_generator(
    eig: EigenDecomposition,
    dissipation: DissipationSpec,
    K: int,
    couplings: Couplings,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> Generator:
    """Undriven part of the master equation on the lowest K levels.

    Dressed mode keeps the energy-lowering part of each coupling in the
    eigenbasis. Bare mode projects the given lowering operators as they are,
    which does not leave the interacting ground state dark.
    """
    if K < 2:
        raise ValueError(f"need at least 2 levels, got K={K}")
    if K > eig.dim:
        raise ValueError(f"K={K} exceeds the space dimension {eig.dim}")

    energies = eig.energies[:K] - eig.energies[0]
    L = commutator_superoperator(np.diag(energies))
    # non-Hermitian part: -iH - ½ Σ γ A†A
    effective = -1j * np.diag(energies).astype(complex)
    jumps = []
    channels = (
        ("cavity", dissipation.gamma_c, couplings.cavity),
        ("atoms", dissipation.gamma_0, couplings.atoms),
        ("ancilla", dissipation.gamma_M, couplings.ancilla),
    )
    for name, rate, op in channels:
        if op is None or rate == 0:
            continue
        if dissipation.mode == "dressed":
            a = dressed_jump_operator(eig, op, degeneracy_tol, K).entries
        else:
            a = project(eig, op, K)
        jumps.append((name, rate, a))
        L = L + 0.5 * rate * dissipator_superoperator(a)
        effective = effective - 0.5 * rate * (a.conj().T @ a)
    return Generator(energies, tuple(jumps), L, dissipation.mode, effective)


# ---------- INTEGRATION ----------
def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _step_grid(generator: Generator, drive: DriveSpec, settings: PropagationSettings) -> tuple[int, float, float]:
    period = 2.0 * math.pi / drive.omega_p
    scale = max(generator.max_rate, float(abs(generator.energies[-1])))
    dt = period / settings.steps_per_period
    if scale > 0:
        dt = min(dt, settings.accuracy / scale)
    steps = int(math.ceil(period / dt))
    return steps, period / steps, period


def _rhs(generator: Generator, drive: DriveSpec, sigma_x: np.ndarray) -> Callable[[float, np.ndarray], np.ndarray]:
    """Right-hand side on K×K matrices, or on a stack of them."""

    def f(t: float, y: np.ndarray) -> np.ndarray:
        return generator.apply(y, (drive.Omega_p * math.cos(drive.omega_p * t)) * sigma_x)

    return f


def _solve_fixed_point(M: np.ndarray, K: int) -> np.ndarray:
    """Solve M vec(ρ) = 0 with Tr ρ = 1 by replacing the first row with the trace row."""
    A = np.array(M, dtype=complex, copy=True)
    b = np.zeros(K * K, dtype=complex)
    A[0, :] = _vec(np.eye(K))
    b[0] = 1.0
    try:
        v = scipy.linalg.solve(A, b)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        logger.debug("singular steady-state system, falling back to least squares")
        v = scipy.linalg.lstsq(A, b)[0]
    rho = _unvec(v, K)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.real(np.trace(rho))


def steady_state(generator: Generator) -> DensityMatrix:
    """Steady state of the undriven, time-independent generator."""
    K = generator.K
    rho = _solve_fixed_point(generator.superoperator, K)
    residual = float(np.max(np.abs(generator.superoperator @ _vec(rho))))
    return DensityMatrix(rho, residual)


def _finish(rho: np.ndarray, residual: float, settings: PropagationSettings) -> DensityMatrix:
    rho = 0.5 * (rho + rho.conj().T)
    out = DensityMatrix(rho / np.real(np.trace(rho)), residual)
    out.validate(settings.tolerance)
    return out


def _harmonic_average(
    generator: Generator, drive: DriveSpec, sigma_x: np.ndarray, settings: PropagationSettings
) -> tuple[np.ndarray, float]:
    """Zeroth Fourier component of the periodic steady state.

    With ρ(t) = Σ_n ρ_n e^{-inω_p t} the master equation couples neighbouring
    harmonics only: (L - inω_p) ρ_n + B (ρ_{n-1} + ρ_{n+1}) = 0, B = -i(Ω_p/2)[σ_x, ·].
    Harmonics above ``settings.harmonics`` are dropped and eliminated from the
    top down on both sides, leaving one K²×K² system for ρ_0.
    """
    K = generator.K
    L0 = generator.superoperator
    B = 0.5 * drive.Omega_p * commutator_superoperator(sigma_x)
    identity = np.eye(K * K)
    L_eff = L0.copy()
    for sign in (1, -1):
        S: Optional[np.ndarray] = None
        for n in range(settings.harmonics, 0, -1):
            A = L0 - (1j * sign * n * drive.omega_p) * identity
            if S is not None:
                A = A + B @ S
            try:
                S = -scipy.linalg.solve(A, B)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
                raise ConvergenceError(f"harmonic {sign * n} system is singular: {e}") from e
        L_eff = L_eff + B @ S
    rho = _solve_fixed_point(L_eff, K)
    return rho, float(np.max(np.abs(L_eff @ _vec(rho))))


def _stroboscopic_average(
    generator: Generator, drive: DriveSpec, sigma_x: np.ndarray, settings: PropagationSettings
) -> tuple[np.ndarray, float]:
    """Fixed point of the one-period map, built by carrying all K² basis matrices at once."""
    K = generator.K
    f = _rhs(generator, drive, sigma_x)
    steps, dt, _ = _step_grid(generator, drive, settings)
    logger.debug("stroboscopic map: %d steps of %.4g per drive period", steps, dt)

    # Y[c] = unvec(e_c)
    Y = np.eye(K * K, dtype=complex).reshape(K * K, K, K).transpose(0, 2, 1).copy()
    for i in range(steps):
        Y = rk4_step(f, i * dt, Y, dt)
    P = Y.transpose(0, 2, 1).reshape(K * K, K * K).T
    y = _solve_fixed_point(P - np.eye(K * K), K)
    residual = float(np.max(np.abs(P @ _vec(y) - _vec(y))))
    acc = np.zeros_like(y)
    for i in range(steps):
        acc += y
        y = rk4_step(f, i * dt, y, dt)
    return acc / steps, residual


def _transient_average(
    generator: Generator,
    drive: DriveSpec,
    sigma_x: np.ndarray,
    rho0: DensityMatrix,
    settings: PropagationSettings,
    observable: Optional[np.ndarray],
) -> tuple[np.ndarray, float]:
    f = _rhs(generator, drive, sigma_x)
    steps, dt, _ = _step_grid(generator, drive, settings)
    logger.debug("transient: %d steps of %.4g per drive period", steps, dt)

    y = np.array(rho0.entries, dtype=complex)
    window = steps * settings.window_periods
    previous: Optional[np.ndarray] = None
    residual = float("inf")
    t_index = 0
    while t_index * dt < settings.max_time:
        acc = np.zeros_like(y)
        for _ in range(window):
            acc += y
            y = rk4_step(f, (t_index % steps) * dt, y, dt)
            t_index += 1
        DensityMatrix(0.5 * (y + y.conj().T)).validate(settings.tolerance)
        avg = acc / window
        value = np.array([np.real(np.trace(avg @ observable))]) if observable is not None else avg
        if previous is not None:
            change = float(np.max(np.abs(value - previous)))
            residual = change
            if change <= settings.rtol * float(np.max(np.abs(value))) + 1e-14:
                return avg, residual
        previous = value
    raise ConvergenceError(
        f"period-averaged state not converged after t={t_index * dt:.4g} (residual {residual:.3e})", residual
    )


def propagate(
    generator: Generator,
    drive: DriveSpec,
    sigma_x: np.ndarray,
    rho0: DensityMatrix,
    settings: Optional[PropagationSettings] = None,
    observable: Optional[np.ndarray] = None,
) -> DensityMatrix:
    """Period-averaged steady state of ρ̇ = L ρ - iΩ_p cos(ω_p t)[σ_x, ρ].

    ``harmonic`` solves for the time-averaged component of the periodic steady
    state directly; ``stroboscopic`` integrates the one-period map once and
    takes its fixed point; ``transient`` integrates from ``rho0`` until the
    period-averaged ``observable`` (or ρ itself) stops changing between windows.
    """
    settings = settings or PropagationSettings()
    K = generator.K
    if rho0.basis_size != K or sigma_x.shape != (K, K):
        raise SpaceMismatchError(f"state/drive do not match the {K}-level generator")
    if drive.Omega_p == 0:
        return _finish(steady_state(generator).entries, 0.0, settings)
    if drive.omega_p is None:
        raise ValueError("drive frequency omega_p is required when Omega_p > 0")

    if settings.method == "harmonic":
        rho, residual = _harmonic_average(generator, drive, sigma_x, settings)
    elif settings.method == "stroboscopic":
        rho, residual = _stroboscopic_average(generator, drive, sigma_x, settings)
    else:
        rho, residual = _transient_average(generator, drive, sigma_x, rho0, settings, observable)
    return _finish(rho, residual, settings)


# ---------- OBSERVABLES ----------
def ancilla_population(rho: DensityMatrix, eig: EigenDecomposition) -> float:
    """n_up = Tr(ρ (1 + σ_z)/2)."""
    value = float(np.real(np.trace(rho.entries @ up_projector(eig, rho.basis_size))))
    return min(1.0, max(0.0, value))


def measurement_fidelity(rho: DensityMatrix, eig: EigenDecomposition, eig_S: EigenDecomposition) -> float:
    """F = Tr_S(ρ_S |G_S><G_S|) with ρ_S = Tr_M ρ."""
    q = ground_system_projector(eig, eig_S, rho.basis_size)
    value = float(np.real(np.trace(rho.entries @ q)))
    return min(1.0, max(0.0, value))


def reduced_ancilla_state(rho: DensityMatrix, eig: EigenDecomposition) -> np.ndarray:
    """ρ_M = Tr_S ρ as a 2x2 matrix in the (down, up) basis."""
    split = _ancilla_split(eig, rho.basis_size)
    return np.einsum("kl,sak,sbl->ab", rho.entries, split, split.conj())


# ---------- SPECTROSCOPY ----------
@dataclass(frozen=True)
class SpectroscopySetup:
    point: SpectralPoint
    generator: Generator
    observables: ProjectedObservables


def default_omega_p_grid(center: float, half_width: float = 0.05, points: int = 201) -> np.ndarray:
    return np.linspace(center - half_width, center + half_width, points)


def prepare_spectroscopy(
    model: ModelSpec,
    ancilla: AncillaSpec,
    dissipation: DissipationSpec,
    space: SpaceSpec,
    K: int = 24,
    degeneracy_tol: float = DEGENERACY_TOL,
    convention: VConvention = VConvention.INTERACTION,
) -> SpectroscopySetup:
    point = solve_point(model, ancilla, space, convention, degeneracy_tol)
    return setup_from_point(point, dissipation, K, degeneracy_tol)


def setup_from_point(
    point: SpectralPoint,
    dissipation: DissipationSpec,
    K: int = 24,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> SpectroscopySetup:
    K = min(K, point.space.dim)
    generator = build_generator(
        point.eig_SM, dissipation, K, system_couplings(point.space, dissipation.mode), degeneracy_tol
    )
    return SpectroscopySetup(point, generator, projected_observables(point.eig_SM, K, point.eig_S))


def measure(
    setup: SpectroscopySetup,
    omega_p: float,
    Omega_p: float,
    settings: Optional[PropagationSettings] = None,
) -> SpectroscopyPoint:
    obs = setup.observables
    try:
        rho = propagate(
            setup.generator,
            DriveSpec(omega_p=omega_p, Omega_p=Omega_p),
            obs.sigma_x,
            DensityMatrix.pure(setup.generator.K),
            settings,
            observable=obs.up,
        )
    except ConvergenceError as e:
        logger.warning("ω_p=%.6f: %s", omega_p, e)
        return SpectroscopyPoint(omega_p, float("nan"), float("nan"), converged=False, residual=e.residual)
    n_up = float(np.real(np.trace(rho.entries @ obs.up)))
    fidelity = float(np.real(np.trace(rho.entries @ obs.ground_system)))
    return SpectroscopyPoint(
        omega_p,
        min(1.0, max(0.0, n_up)),
        min(1.0, max(0.0, fidelity)),
        converged=True,
        residual=rho.residual,
    )


def spectroscopy_scan(
    model: ModelSpec,
    ancilla: AncillaSpec,
    dissipation: DissipationSpec,
    Omega_p: float,
    omega_p_grid: Optional[np.ndarray] = None,
    K: int = 24,
    degeneracy_tol: float = DEGENERACY_TOL,
    space: Optional[SpaceSpec] = None,
    settings: Optional[PropagationSettings] = None,
    progress: bool = False,
) -> list[SpectroscopyPoint]:
    """n_up(ω_p) and F(ω_p), one independent propagation per grid point."""
    if space is None:
        report = validate_truncation(model, ancilla, SpaceSpec(N=model.N))
        space = SpaceSpec(n_max=report.recommended_n_max, N=model.N)
    setup = prepare_spectroscopy(model, ancilla, dissipation, space, K, degeneracy_tol)
    if omega_p_grid is None:
        omega_p_grid = default_omega_p_grid(ancilla.omega_M + setup.point.numeric.shift_numeric)
    grid = tqdm(omega_p_grid, desc="ω_p scan", disable=not progress)
    return [measure(setup, float(w), Omega_p, settings) for w in grid]


def peak_extract(points: list[SpectroscopyPoint]) -> PeakFit:
    """Parabolic refinement of the n_up maximum and its full width at half maximum."""
    if len(points) < 5:
        raise ValueError(f"need at least 5 points, got {len(points)}")
    x = np.array([p.omega_p for p in points], dtype=float)
    y = np.array([p.n_up for p in points], dtype=float)
    order = np.argsort(x)
    x, y = x[order], y[order]
    i = int(np.nanargmax(y))
    if i == 0 or i == len(y) - 1 or not (y[i] > y[i - 1] or y[i] > y[i + 1]):
        raise PeakNotFoundError("no interior maximum on the ω_p grid")

    (x0, x1, x2), (y0, y1, y2) = x[i - 1 : i + 2], y[i - 1 : i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    B = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    C = (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1 + x0 * x1 * (x0 - x1) * y2) / denom
    if A < 0:
        center = -B / (2 * A)
        height = C - B**2 / (4 * A)
    else:
        center, height = x1, y1

    half = 0.5 * height
    left = right = None
    for j in range(i, 0, -1):
        if y[j - 1] < half <= y[j]:
            left = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
            break
    for j in range(i, len(y) - 1):
        if y[j + 1] < half <= y[j]:
            right = x[j] + (y[j] - half) * (x[j + 1] - x[j]) / (y[j] - y[j + 1])
            break
    if left is not None and right is not None:
        width = right - left
    elif left is not None:
        width = 2 * (center - left)
    elif right is not None:
        width = 2 * (right - center)
    else:
        width = float("nan")
    return PeakFit(float(center), float(height), float(width))


# ---------- DIAGNOSTICS ----------
@dataclass(frozen=True)
class StabilityReport:
    mode: DissipationMode
    excited_population: float
    trace_distance: float


def undriven_stability(
    model: ModelSpec,
    ancilla: AncillaSpec,
    dissipation: DissipationSpec,
    space: SpaceSpec,
    K: int = 24,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> StabilityReport:
    """Undriven steady state against |G><G| for the dissipation mode in ``dissipation``."""
    setup = prepare_spectroscopy(model, ancilla, dissipation, space, K, degeneracy_tol)
    rho = steady_state(setup.generator)
    ground = DensityMatrix.pure(setup.generator.K)
    excited = 1.0 - float(np.real(rho.entries[0, 0]))
    return StabilityReport(dissipation.mode, excited, rho.trace_distance(ground))


def bare_instability(
    model: ModelSpec,
    ancilla: AncillaSpec,
    dissipation: DissipationSpec,
    space: SpaceSpec,
    K: int = 24,
) -> StabilityReport:
    return undriven_stability(model, ancilla, dissipation.model_copy(update={"mode": "bare"}), space, K)
