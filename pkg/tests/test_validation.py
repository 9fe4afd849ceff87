import pytest

from app.services import validation
from app.services.sweep_schema import validate_config
from app.services.validation import EXACT_SUM_TOL, run_validation


def _spec(kind: str = "Dicke", g_M: float = 0.1, values=(0.0, 0.25, 0.5)):
    return validate_config(
        {
            "name": "checks",
            "base": {"model": {"kind": kind, "N": 2, "lambda": 0.0}, "ancilla": {"omega_M": 2.75, "g_M": g_M}},
            "values": list(values),
            "numerics": {"n_max": 16, "K": 8},
        }
    )


def _exact_sum_checks(checks):
    return [c for c in checks if c.name.startswith("numeric shift vs exact second-order sum")]


@pytest.mark.parametrize("kind", ["Dicke", "TavisCummings"])
def test_exact_sum_checked_at_each_sampled_coupling(kind):
    found = _exact_sum_checks(run_validation(_spec(kind)))
    assert len(found) == 3
    assert all(c.passed and c.value < EXACT_SUM_TOL for c in found)


def test_exact_sum_skipped_without_ancilla_coupling():
    checks = run_validation(_spec(g_M=0.0))
    assert _exact_sum_checks(checks) == []
    assert all(c.ok for c in checks)


def test_exact_sum_failure_is_reported(monkeypatch):
    monkeypatch.setattr(validation, "exact_second_order_shift", lambda *args: 1.0)
    found = _exact_sum_checks(run_validation(_spec(), lambdas=[0.0]))
    assert len(found) == 1
    assert found[0].status == "FAIL"
