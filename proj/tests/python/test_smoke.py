"""Smoke tests for the python bindings; the C++ suites carry the real load."""

import math

import numpy as np
import pytest

import flowcast as fc


def test_time_series_round_trip():
    ts = fc.TimeSeries(np.array([1.0, 3.0, 6.0, 10.0]), start_time=0)
    assert len(ts) == 4
    dd = fc.difference(ts, 2)
    assert dd.values.tolist() == [1.0, 1.0]
    back = fc.integrate(dd, np.array([1.0, 3.0]), 2)
    assert back.values.tolist() == [6.0, 10.0]


def test_rejects_bad_input():
    with pytest.raises(fc.FlowcastError):
        fc.difference(fc.TimeSeries(np.array([1.0]), 0), 2)


def test_fit_recovers_ar1():
    series = fc.simulate_arima(fc.ArimaOrder(1, 0, 0), 0.0, [0.6], [], 1.0, 2000, seed=1)
    model = fc.fit(series, fc.ArimaOrder(1, 0, 0))
    assert model.ar_coeffs[0] == pytest.approx(0.6, abs=0.06)
    preds = fc.forecast(model, series, 5)
    assert preds.shape == (5,)


def test_grid_search_prefers_white_noise_null():
    series = fc.simulate_arima(fc.ArimaOrder(0, 0, 0), 0.0, [], [], 1.0, 1000, seed=3)
    result = fc.grid_search(series, 2, 2, 0)
    assert result.chosen == fc.ArimaOrder(0, 0, 0)
    assert len(result.table) == 9
    assert result.n == 1000 - 4


def test_rmse_hand_value():
    assert fc.rmse(np.zeros(2), np.array([3.0, 4.0])) == pytest.approx(
        math.sqrt(12.5), abs=1e-12
    )


def test_select_d_on_trend():
    values = np.arange(300, dtype=float)
    assert fc.select_d(fc.TimeSeries(values, 0), 2) == 1


def test_scenario_comparison_end_to_end():
    scenario = fc.ScenarioConfig()
    scenario.rows = 2
    scenario.cols = 2
    scenario.days = 3
    scenario.seed = 11
    flows = fc.simulate_scenario(scenario)
    assert len(flows) == 8  # 2*(1*2 + 1*2)

    config = fc.ComparisonConfig()
    config.p_max = 1
    config.q_max = 1
    start = scenario.start_time
    split = start + 2 * 96 * 900
    report = fc.run_comparison(flows, start, split, split + 96 * 900, config)
    assert report.summary.n_roads == 8
    assert report.summary.n_failed == 0
    assert len(report.fleet_avg_actual) == 96


def test_timestamps():
    assert fc.format_rfc3339_utc(1425168000) == "2015-03-01T00:00:00Z"
    assert fc.parse_rfc3339_utc("2015-03-01T00:00:00Z") == 1425168000
