"""Named sweeps with the parameters of the published figures.

Frequencies are in units of ω_c. Grid densities are choices: 60 λ points on
[0, 2], 201 drive frequencies over ±0.05 around the shifted ancilla line.
"""
from __future__ import annotations

import numpy as np

from app.errors import ConfigError
from app.services.sweep_schema import SweepSpec, validate_config

GAMMA = 0.01
LAMBDA_POINTS = 60

DICKE_ANCILLA = {"omega_M": 2.75, "g_M": 0.1}
HOPFIELD_ANCILLA = {"omega_M": 6.75, "g_M": 0.1}
LAMBSHIFT_OUTPUTS = ["shift_numeric", "shift_analytic", "fidelity_G", "n_phot"]
SPECTROSCOPY_OUTPUTS = ["n_up", "fidelity_F"]


def _grid(stop: float, points: int = LAMBDA_POINTS) -> list[float]:
    return [float(x) for x in np.linspace(0.0, stop, points)]


def _model(kind: str, N: int = 3) -> dict:
    return {"kind": kind, "omega_c": 1.0, "omega_0": 1.0, "lambda": 0.0, "N": N}


def _dissipation(eta: float = 1.0) -> dict:
    return {"gamma_c": eta * GAMMA, "gamma_0": eta * GAMMA, "gamma_M": GAMMA}


def _presets() -> dict[str, dict]:
    return {
        "fig2_dicke": {
            "base": {"model": _model("Dicke"), "ancilla": DICKE_ANCILLA},
            "values": _grid(2.0),
            "outputs": LAMBSHIFT_OUTPUTS,
        },
        "fig2_tc": {
            "base": {"model": _model("TavisCummings"), "ancilla": DICKE_ANCILLA},
            "values": _grid(2.0),
            "outputs": LAMBSHIFT_OUTPUTS,
        },
        "fig2_hopfield": {
            "base": {"model": _model("Hopfield"), "ancilla": HOPFIELD_ANCILLA},
            "values": _grid(2.0),
            "outputs": LAMBSHIFT_OUTPUTS,
        },
        # N = 30 Dicke stops at λ = 1, past the critical coupling λ_c = 0.5
        "fig3_dicke": {
            "base": {"model": _model("Dicke"), "ancilla": DICKE_ANCILLA},
            "axis": "N_list",
            "values": [1, 3, 10, 30],
            "lambdas": _grid(1.0),
            "outputs": LAMBSHIFT_OUTPUTS,
        },
        "fig3_hopfield": {
            "base": {"model": _model("Hopfield"), "ancilla": HOPFIELD_ANCILLA},
            "axis": "N_list",
            "values": [1, 3, 10, 30],
            "lambdas": _grid(2.0),
            "outputs": LAMBSHIFT_OUTPUTS,
        },
        "fig4_dicke": {
            "base": {
                "model": _model("Dicke"),
                "ancilla": DICKE_ANCILLA,
                "dissipation": _dissipation(),
                "drive": {"Omega_p": 0.5 * GAMMA},
            },
            "values": [0.0, 0.25, 0.5, 0.75, 1.0],
            "outputs": SPECTROSCOPY_OUTPUTS,
        },
        "fig4_tc": {
            "base": {
                "model": _model("TavisCummings"),
                "ancilla": DICKE_ANCILLA,
                "dissipation": _dissipation(),
                "drive": {"Omega_p": 0.2 * GAMMA},
            },
            "values": [0.0, 0.25, 0.5, 0.75, 1.0],
            "outputs": SPECTROSCOPY_OUTPUTS,
        },
        "fig5_dicke": {
            "base": {
                "model": _model("Dicke"),
                "ancilla": DICKE_ANCILLA,
                "dissipation": _dissipation(),
                "drive": {"Omega_p": 0.5 * GAMMA},
            },
            "axis": "eta_list",
            "values": [0.0, 1.0, 10.0],
            "lambdas": [0.25, 0.5, 1.0],
            "outputs": SPECTROSCOPY_OUTPUTS,
        },
    }


def figure_presets() -> dict[str, SweepSpec]:
    return {name: validate_config({"name": name, **doc}) for name, doc in _presets().items()}


def preset_document(name: str) -> dict:
    docs = _presets()
    if name not in docs:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(docs))}", "preset")
    return {"name": name, **docs[name]}


def get_preset(name: str) -> SweepSpec:
    return validate_config(preset_document(name))
