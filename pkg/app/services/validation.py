"""Invariant checks behind the ``validate`` command."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from app.physics.dynamics import DissipationSpec, bare_instability, undriven_stability
from app.physics.hilbert import SpaceSpec, excitation_number, parity_operator
from app.physics.models import ModelKind, build_full_hamiltonian, build_system_hamiltonian, check_symmetry
from app.physics.spectra import diagonalize, exact_second_order_shift, lamb_shift, solve_point
from app.services.sweep import sweep_lambdas, resolve_truncation
from app.services.sweep_schema import SweepSpec

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-8
STABILITY_TOL = 1e-8
INSTABILITY_POPULATION = 1e-3
EXACT_SUM_TOL = 0.05
# runner-up weight above which the line is too hybridized for a second-order comparison
HYBRIDIZATION_LIMIT = 0.01


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    expected_failure: bool = False

    @property
    def ok(self) -> bool:
        return self.passed or self.expected_failure

    @property
    def status(self) -> str:
        if self.expected_failure:
            return "XFAIL" if not self.passed else "XPASS"
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"{self.status:5s} {self.name}: {self.value:.3e} (threshold {self.threshold:.1e})"


def _sample(values: list[float]) -> list[float]:
    ordered = sorted(set(values))
    picks = [ordered[0], ordered[len(ordered) // 2], ordered[-1]]
    return sorted(set(picks))


def run_validation(spec: SweepSpec, lambdas: Optional[list[float]] = None) -> list[CheckResult]:
    base = spec.base
    lams = lambdas or _sample(sweep_lambdas(spec))
    dissipation = base.dissipation if base.dissipation.max_rate > 0 else DissipationSpec()
    checks: list[CheckResult] = []

    n_max, report = resolve_truncation(spec)
    if report is not None:
        checks.append(CheckResult("truncation converged (top Fock occupancy)", report.converged, report.top_occupancy, 1e-8))

    model = base.model.with_lambda(max(lams))
    space = SpaceSpec(n_max=n_max, N=model.N)
    H = build_full_hamiltonian(model, base.ancilla, space)
    checks.append(CheckResult("H_{S+M} hermiticity", H.is_hermitian(), H.hermiticity_defect(), 1e-12))
    parity_defect = check_symmetry(H, parity_operator(space))
    checks.append(CheckResult("[H_{S+M}, parity]", parity_defect < SYMMETRY_TOL, parity_defect, SYMMETRY_TOL))
    if model.kind is ModelKind.TAVIS_CUMMINGS:
        system = space.system_space()
        u1 = check_symmetry(build_system_hamiltonian(model, system), excitation_number(system))
        checks.append(CheckResult("[H_TC, excitation number]", u1 < SYMMETRY_TOL, u1, SYMMETRY_TOL))
    rebuilt = diagonalize(H, parity_operator(space)).reconstruction_error(H)
    checks.append(CheckResult("eigendecomposition reconstruction", rebuilt < RECONSTRUCTION_TOL, rebuilt, RECONSTRUCTION_TOL))

    if base.ancilla.g_M > 0:
        numerics = spec.numerics
        for lam in lams:
            point = solve_point(base.model.with_lambda(lam), base.ancilla, space, numerics.convention, numerics.degeneracy_tol)
            shift = lamb_shift(point, numerics.degeneracy_tol)
            if shift.flags or point.numeric.runner_up_weight > HYBRIDIZATION_LIMIT * point.numeric.weight:
                logger.info("λ=%g: line hybridized or ground degenerate, exact-sum check skipped", lam)
                continue
            exact = exact_second_order_shift(point.model, base.ancilla, point.eig_S)
            deviation = abs(shift.shift_numeric - exact) / abs(exact)
            checks.append(
                CheckResult(
                    f"numeric shift vs exact second-order sum at λ={lam:g} (relative)",
                    deviation < EXACT_SUM_TOL,
                    deviation,
                    EXACT_SUM_TOL,
                )
            )

    for lam in lams:
        report_lam = undriven_stability(
            base.model.with_lambda(lam), base.ancilla, dissipation.model_copy(update={"mode": "dressed"}),
            space, spec.numerics.K, spec.numerics.degeneracy_tol,
        )
        checks.append(
            CheckResult(
                f"dressed ground state stable at λ={lam:g} (trace distance)",
                report_lam.trace_distance < STABILITY_TOL,
                report_lam.trace_distance,
                STABILITY_TOL,
            )
        )

    demo_lam = max(lams) or 1.0
    bare = bare_instability(base.model.with_lambda(demo_lam), base.ancilla, dissipation, space, spec.numerics.K)
    checks.append(
        CheckResult(
            f"bare-operator ground state stable at λ={demo_lam:g} (excited population)",
            bare.excited_population <= INSTABILITY_POPULATION,
            bare.excited_population,
            INSTABILITY_POPULATION,
            expected_failure=True,
        )
    )

    for c in checks:
        (logger.info if c.ok else logger.warning)(c.line())
    return checks
