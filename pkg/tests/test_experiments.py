import numpy as np
import pytest

from transport_langevin import experiments as ex


def test_unknown_override_rejected():
    with pytest.raises(KeyError, match="not_a_key"):
        ex.run_preset("grad-check", seed=0, overrides={"not_a_key": 1})
    with pytest.raises(KeyError, match="unknown preset"):
        ex.run_preset("no-such-preset")


def test_preset_results_are_deterministic():
    a = ex.run_preset("ou-moment", seed=5)
    b = ex.run_preset("ou-moment", seed=5)
    assert a.table_rows == b.table_rows
    assert a.extras == b.extras


def test_overrides_change_the_run():
    small = ex.run_preset("grad-check", seed=0, overrides={"n_configs": 3})
    assert len(small.table_rows) == 9  # 3 configs x 3 architectures


def test_sweep_fit_regression_and_insufficient():
    results = [ex.regression_rate(0, {"n": n, "steps": 1500, "burn_in": 500})
               for n in (64, 128)]
    row = ex.sweep_fit("regression-rate", "n", [64, 128], results)
    assert row[3] == "insufficient-points"
    row = ex.sweep_fit("grad-check", "n", [1], [ex.run_preset("bernstein-suite")])
    assert row[1] == "none"


def test_criterion_result_line_format():
    c = ex.CriterionResult("thing", True, 1.23456, "<= 2")
    assert c.line().startswith("[PASS] thing:")
    c = ex.CriterionResult("thing", False, 9.9, "<= 2")
    assert c.line().startswith("[FAIL]")


def test_classification_sweep_zero_escape_logic():
    # when the largest beta reaches exactly zero error the criterion passes
    # regardless of the correlation (hand-built results)
    rows = []
    for b, e in [(25.0, 0.5), (50.0, 0.2), (100.0, 0.01), (200.0, 0.0)]:
        r = ex.ExperimentResult("classification-rate", 0, [], [], [[b, e, 0.33, 10]],
                                extras={"error_prob": e, "beta": b, "low_noise_gap": 0.33})
        rows.append(r)
    fit = ex.sweep_fit("classification-rate", "beta", [25.0, 50.0, 100.0, 200.0], rows)
    assert fit[3] is True
