"""Parameter sweeps over λ, N, η or the drive frequency.

A sweep is split into point tasks, one per (axis value, λ) pair. Each task
diagonalizes once and, when spectroscopic outputs are requested, scans its
whole ω_p grid. Tasks run inline or on a process pool and rows are gathered
by task index, so the output does not depend on the worker count.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import pandas as pd
from tqdm import tqdm

from app import __version__
from app.physics.dynamics import DissipationSpec, default_omega_p_grid, measure, setup_from_point
from app.physics.hilbert import SpaceSpec
from app.physics.models import AncillaSpec, ModelSpec
from app.physics.spectra import TruncationReport, lamb_shift, solve_point, validate_truncation
from app.services.result_codec import canonical_json_bytes, crc32_hex, csv_bytes, rows_to_frame, write_outputs
from app.services.sweep_schema import (
    AXIS_COLUMN,
    LEVEL_QUANTITIES,
    SPECTROSCOPIC_QUANTITIES,
    NumericsSpec,
    SweepSpec,
)

logger = logging.getLogger(__name__)

NAN = float("nan")


@dataclass(frozen=True)
class PointTask:
    index: int
    axis: str
    axis_value: Optional[float]
    model: ModelSpec
    ancilla: AncillaSpec
    dissipation: DissipationSpec
    Omega_p: float
    space: SpaceSpec
    numerics: NumericsSpec
    outputs: tuple[str, ...]
    omega_p_grid: Optional[tuple[float, ...]] = None

    @property
    def spectroscopic(self) -> bool:
        return any(q in SPECTROSCOPIC_QUANTITIES for q in self.outputs)

    @property
    def per_level(self) -> bool:
        return any(q in LEVEL_QUANTITIES for q in self.outputs)


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[dict]
    columns: list[str]
    provenance: dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return rows_to_frame(self.rows, self.columns, LEVEL_QUANTITIES)

    def csv_bytes(self) -> bytes:
        return csv_bytes(self.to_frame())

    def spec_echo(self) -> dict:
        return self.spec.model_dump(mode="json", by_alias=True)

    def sidecar(self) -> dict:
        echo = self.spec_echo()
        return {
            "spec": echo,
            "spec_crc32": crc32_hex(canonical_json_bytes(echo)),
            "provenance": self.provenance,
        }

    @property
    def failed_rows(self) -> int:
        return sum(1 for r in self.rows if "failed" in r["flags"].split(";"))

    def write(self, out_dir: Path, stem: Optional[str] = None) -> tuple[Path, Path]:
        return write_outputs(out_dir, stem or self.spec.name, self.csv_bytes(), self.sidecar())


# ---------- LAYOUT ----------
def sweep_columns(spec: SweepSpec) -> list[str]:
    axis_col = AXIS_COLUMN[spec.axis]
    cols = [] if axis_col in ("lambda", "omega_p") else [axis_col]
    cols.append("lambda")
    if spec.spectroscopic:
        cols.append("omega_p")
    if spec.per_level:
        cols.append("level")
    cols.extend(spec.outputs)
    cols.extend(["n_max", "K", "flags", "error"])
    return cols


def sweep_lambdas(spec: SweepSpec) -> list[float]:
    return list(spec.values) if spec.axis == "lambda_grid" else spec.secondary_lambdas()


def resolve_truncation(spec: SweepSpec) -> tuple[int, Optional[TruncationReport]]:
    """Fock cutoff for the whole sweep, validated once at the largest λ and N."""
    if spec.numerics.n_max is not None:
        return spec.numerics.n_max, None
    Ns = [int(v) for v in spec.values] if spec.axis == "N_list" else [spec.base.model.N]
    worst = spec.base.model.with_N(max(Ns)).with_lambda(max(sweep_lambdas(spec)))
    report = validate_truncation(worst, spec.base.ancilla, SpaceSpec(n_max=spec.numerics.n_max_start, N=worst.N))
    if not report.converged:
        logger.warning("truncation did not converge; using n_max=%d", report.recommended_n_max)
    return report.recommended_n_max, report


def build_tasks(spec: SweepSpec, n_max: int) -> list[PointTask]:
    base = spec.base
    grid = tuple(spec.omega_p_grid) if spec.omega_p_grid is not None else None
    pairs: list[tuple[Optional[float], ModelSpec, DissipationSpec, Optional[tuple[float, ...]]]] = []
    if spec.axis == "lambda_grid":
        pairs = [(v, base.model.with_lambda(v), base.dissipation, grid) for v in spec.values]
    elif spec.axis == "N_list":
        for v in spec.values:
            model = base.model.with_N(int(v))
            pairs += [(v, model.with_lambda(lam), base.dissipation, grid) for lam in spec.secondary_lambdas()]
    elif spec.axis == "eta_list":
        for v in spec.values:
            dissipation = base.dissipation.with_eta(v)
            pairs += [(v, base.model.with_lambda(lam), dissipation, grid) for lam in spec.secondary_lambdas()]
    else:
        pairs = [(None, base.model.with_lambda(lam), base.dissipation, tuple(spec.values)) for lam in spec.secondary_lambdas()]

    return [
        PointTask(
            index=i,
            axis=spec.axis,
            axis_value=value,
            model=model,
            ancilla=base.ancilla,
            dissipation=dissipation,
            Omega_p=base.drive.Omega_p,
            space=SpaceSpec(n_max=n_max, N=model.N),
            numerics=spec.numerics,
            outputs=tuple(spec.outputs),
            omega_p_grid=omega_p,
        )
        for i, (value, model, dissipation, omega_p) in enumerate(pairs)
    ]


# ---------- ONE POINT ----------
def _base_row(task: PointTask) -> dict:
    row: dict = {"lambda": task.model.lam, "n_max": task.space.n_max, "K": min(task.numerics.K, task.space.dim)}
    column = AXIS_COLUMN[task.axis]
    if column not in ("lambda", "omega_p"):
        row[column] = int(task.axis_value) if column == "N" else task.axis_value
    return row


def _failed_rows(task: PointTask, error: Exception) -> list[dict]:
    row = _base_row(task)
    row.update({q: NAN for q in task.outputs})
    if task.spectroscopic:
        row["omega_p"] = NAN
    if task.per_level:
        row["level"] = NAN
    row["flags"] = "failed"
    row["error"] = f"{type(error).__name__}: {error}"
    return [row]


def evaluate_point(task: PointTask) -> list[dict]:
    """Rows of one task; failures become a single flagged row."""
    numerics = task.numerics
    try:
        point = solve_point(task.model, task.ancilla, task.space, numerics.convention, numerics.degeneracy_tol)
        shift = lamb_shift(point, numerics.degeneracy_tol)
        flags = list(shift.flags)
        row = _base_row(task)
        spectral = {
            "shift_numeric": shift.shift_numeric,
            "shift_analytic": shift.shift_analytic,
            "fidelity_G": shift.fidelity_G,
            "n_phot": point.expectations.n_phot,
            "anomalous": point.expectations.anomalous,
        }
        row.update({q: v for q, v in spectral.items() if q in task.outputs})
        if task.per_level:
            top = min(numerics.levels, point.eig_SM.dim - 1)
            row["level"] = list(range(1, top + 1))
            if "energies" in task.outputs:
                row["energies"] = [float(e) for e in point.eig_SM.excitation_energies()[1 : top + 1]]
            if "weights" in task.outputs:
                row["weights"] = [float(w) for w in point.weights[1 : top + 1]]

        if not task.spectroscopic:
            row.update({"flags": ";".join(flags), "error": ""})
            return [row]

        setup = setup_from_point(point, task.dissipation, numerics.K, numerics.degeneracy_tol)
        grid = task.omega_p_grid
        if grid is None:
            center = task.ancilla.omega_M + (0.0 if math.isnan(shift.shift_numeric) else shift.shift_numeric)
            grid = tuple(default_omega_p_grid(center, numerics.omega_p_half_width, numerics.omega_p_points))
        rows = []
        for omega_p in grid:
            sp = measure(setup, float(omega_p), task.Omega_p, numerics.propagation)
            point_flags = flags + ([] if sp.converged else ["not_converged"])
            measured = {"n_up": sp.n_up, "fidelity_F": sp.fidelity_F}
            rows.append(
                {
                    **row,
                    "omega_p": float(omega_p),
                    **{q: v for q, v in measured.items() if q in task.outputs},
                    "flags": ";".join(point_flags),
                    "error": "",
                }
            )
        return rows
    except Exception as e:
        logger.warning("point %d (λ=%.4f) failed: %s", task.index, task.model.lam, e)
        return _failed_rows(task, e)


# ---------- DRIVER ----------
def run_sweep(spec: SweepSpec, progress: bool = False, workers: Optional[int] = None) -> SweepResult:
    started = time.perf_counter()
    n_workers = workers or spec.workers
    n_max, report = resolve_truncation(spec)
    tasks = build_tasks(spec, n_max)
    logger.info("sweep %s: %d points, n_max=%d, %d worker(s)", spec.name, len(tasks), n_max, n_workers)

    results: dict[int, list[dict]] = {}
    bar = tqdm(total=len(tasks), desc=spec.name, disable=not progress)
    if n_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = {pool.submit(evaluate_point, t): t.index for t in tasks}
            for fut in as_completed(futures):
                results[futures[fut]] = fut.result()
                bar.update()
    else:
        for t in tasks:
            results[t.index] = evaluate_point(t)
            bar.update()
    bar.close()

    rows = [row for i in sorted(results) for row in results[i]]
    provenance = {
        "version": __version__,
        "n_max": n_max,
        "K": min(spec.numerics.K, tasks[0].space.dim) if tasks else spec.numerics.K,
        "truncation": None
        if report is None
        else {
            "converged": report.converged,
            "recommended_n_max": report.recommended_n_max,
            "top_occupancy": report.top_occupancy,
            "shift_change": report.shift_change,
            "tried": list(report.tried),
        },
        "points": len(tasks),
        "rows": len(rows),
        "workers": n_workers,
        "timing_s": round(time.perf_counter() - started, 3),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    result = SweepResult(spec, rows, sweep_columns(spec), provenance)
    if result.failed_rows:
        logger.warning("sweep %s: %d failed row(s)", spec.name, result.failed_rows)
    return result
