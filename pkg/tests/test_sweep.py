import io
import time

import numpy as np
import orjson
import pandas as pd
import pytest

from app.errors import ConfigError
from app.physics.hilbert import SpaceSpec
from app.physics.models import AncillaSpec
from app.physics.spectra import lamb_shift, solve_point
from app.services import sweep as sweep_module
from app.services.presets import figure_presets, get_preset, preset_document
from app.services.result_codec import crc32_hex
from app.services.sweep import build_tasks, run_sweep, sweep_columns
from app.services.sweep_schema import validate_config
from tests.conftest import dicke


def _doc(**overrides) -> dict:
    doc = {
        "name": "unit",
        "base": {
            "model": {"kind": "Dicke", "N": 1, "lambda": 0.0},
            "ancilla": {"omega_M": 2.75, "g_M": 0.1},
        },
        "values": [0.0, 0.2, 0.4],
        "outputs": ["shift_numeric", "shift_analytic", "fidelity_G"],
        "numerics": {"n_max": 8},
    }
    doc.update(overrides)
    return doc


def _frame(result) -> pd.DataFrame:
    return pd.read_csv(io.BytesIO(result.csv_bytes()), keep_default_na=False, na_values=["nan", "NaN", ""])


# ---------- schema ----------
def test_unknown_key_names_the_key():
    doc = _doc()
    doc["base"]["model"]["lamda"] = 0.3
    with pytest.raises(ConfigError) as err:
        validate_config(doc)
    assert err.value.key == "base.model.lamda"


def test_empty_grid_rejected():
    with pytest.raises(ConfigError) as err:
        validate_config(_doc(values=[]))
    assert err.value.key == "values"


def test_non_monotone_grid_rejected():
    with pytest.raises(ConfigError):
        validate_config(_doc(values=[0.0, 0.4, 0.2]))


def test_unknown_quantity_rejected():
    with pytest.raises(ConfigError) as err:
        validate_config(_doc(outputs=["shift", "n_up"]))
    assert err.value.key == "outputs"


def test_omega_p_axis_needs_spectroscopic_output():
    with pytest.raises(ConfigError):
        validate_config(_doc(axis="omega_p_grid", values=[2.7, 2.75, 2.8]))


# ---------- presets ----------
def test_presets_carry_caption_parameters():
    presets = figure_presets()
    assert set(presets) == {
        "fig2_dicke", "fig2_tc", "fig2_hopfield", "fig3_dicke", "fig3_hopfield", "fig4_dicke", "fig4_tc", "fig5_dicke",
    }
    assert presets["fig2_dicke"].base.ancilla.omega_M == 2.75
    assert presets["fig2_hopfield"].base.ancilla.omega_M == 6.75
    assert len(presets["fig2_tc"].values) == 60
    assert presets["fig2_tc"].values[-1] == pytest.approx(2.0)
    assert presets["fig3_dicke"].values == [1, 3, 10, 30]
    assert presets["fig4_dicke"].base.drive.Omega_p == pytest.approx(0.5 * 0.01)
    assert presets["fig4_tc"].base.drive.Omega_p == pytest.approx(0.2 * presets["fig4_tc"].base.dissipation.gamma_M)


def test_fig5_damping_follows_eta():
    spec = get_preset("fig5_dicke")
    assert spec.values == [0.0, 1.0, 10.0]
    tasks = build_tasks(spec, n_max=4)
    for t in tasks:
        assert t.dissipation.gamma_M == 0.01
        assert t.dissipation.gamma_c == pytest.approx(t.axis_value * 0.01)
        assert t.dissipation.gamma_0 == pytest.approx(t.axis_value * 0.01)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        get_preset("fig9")


# ---------- runs ----------
def test_single_point_sweep_matches_spectra_ops():
    result = run_sweep(validate_config(_doc(values=[0.0])))
    assert len(result.rows) == 1
    row = result.rows[0]
    expected = lamb_shift(solve_point(dicke(0.0, N=1), AncillaSpec(omega_M=2.75, g_M=0.1), SpaceSpec(n_max=8, N=1)))
    assert row["shift_numeric"] == expected.shift_numeric
    assert row["shift_analytic"] == expected.shift_analytic
    assert row["fidelity_G"] == expected.fidelity_G
    assert row["n_max"] == 8
    assert row["flags"] == ""


def test_csv_layout_and_sidecar(tmp_path):
    spec = validate_config(_doc())
    result = run_sweep(spec)
    frame = _frame(result)
    assert list(frame.columns) == ["lambda", "shift_numeric", "shift_analytic", "fidelity_G", "n_max", "K", "flags", "error"]
    assert list(frame["lambda"]) == [0.0, 0.2, 0.4]
    assert (frame["K"] == 24).all()

    csv_path, json_path = result.write(tmp_path)
    sidecar = orjson.loads(json_path.read_bytes())
    assert sidecar["csv_crc32"] == crc32_hex(csv_path.read_bytes())
    assert sidecar["spec"]["name"] == "unit"
    assert sidecar["provenance"]["n_max"] == 8
    assert sidecar["provenance"]["truncation"] is None


def test_rows_identical_across_worker_counts():
    spec = validate_config(_doc(values=[0.0, 0.1, 0.2, 0.3]))
    serial = run_sweep(spec, workers=1)
    parallel = run_sweep(spec, workers=2)
    assert serial.csv_bytes() == parallel.csv_bytes()


def test_failed_point_is_recorded(monkeypatch):
    real = sweep_module.solve_point

    def flaky(model, *args, **kwargs):
        if model.lam == 0.2:
            raise RuntimeError("boom")
        return real(model, *args, **kwargs)

    monkeypatch.setattr(sweep_module, "solve_point", flaky)
    result = run_sweep(validate_config(_doc()))
    assert result.failed_rows == 1
    failed = result.rows[1]
    assert failed["flags"] == "failed"
    assert failed["error"] == "RuntimeError: boom"
    assert np.isnan(failed["shift_numeric"])
    assert "failed" not in result.rows[2]["flags"]


def test_levels_rows_expand_per_level():
    spec = validate_config(_doc(outputs=["energies", "weights"], numerics={"n_max": 6, "levels": 5}))
    frame = _frame(run_sweep(spec))
    assert len(frame) == 3 * 5
    assert list(frame.columns[:4]) == ["lambda", "level", "energies", "weights"]
    first = frame[frame["lambda"] == 0.0]
    assert list(first["level"]) == [1, 2, 3, 4, 5]
    assert (np.diff(first["energies"].to_numpy()) >= 0).all()


def test_undriven_spectroscopy_is_flat():
    doc = _doc(
        values=[0.1],
        outputs=["n_up", "fidelity_F"],
        omega_p_grid=[2.70, 2.72, 2.74, 2.76, 2.78],
        numerics={"n_max": 6, "K": 6},
    )
    doc["base"]["drive"] = {"Omega_p": 0.0}
    result = run_sweep(validate_config(doc))
    assert [r["omega_p"] for r in result.rows] == [2.70, 2.72, 2.74, 2.76, 2.78]
    assert all(r["n_up"] < 1e-12 for r in result.rows)
    assert "omega_p" in sweep_columns(result.spec)


def test_adaptive_truncation_recorded():
    result = run_sweep(validate_config(_doc(values=[0.0, 0.1], numerics={"n_max_start": 4})))
    truncation = result.provenance["truncation"]
    assert truncation["converged"]
    assert truncation["tried"][0] == 4
    assert all(r["n_max"] == result.provenance["n_max"] for r in result.rows)


@pytest.mark.slow
def test_fig2_dicke_shift_increases():
    result = run_sweep(get_preset("fig2_dicke"))
    rows = [r for r in result.rows if r["flags"] == ""]
    shifts = [r["shift_numeric"] for r in rows if r["lambda"] <= 1.0]
    assert shifts[-1] > shifts[0]


@pytest.mark.slow
def test_spectroscopy_smoke_subset_runs_in_minutes():
    doc = preset_document("fig4_dicke")
    doc["values"] = [0.0, 0.5, 1.0]
    doc["numerics"] = {"omega_p_points": 51}
    started = time.perf_counter()
    result = run_sweep(validate_config(doc))
    elapsed = time.perf_counter() - started
    assert result.failed_rows == 0
    assert len(result.rows) == 3 * 51
    assert not any("not_converged" in r["flags"] for r in result.rows)
    assert elapsed < 120.0
