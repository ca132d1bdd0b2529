import numpy as np
import pytest

from gridrisk.metrics import (
    LossSeries, MetricsError, avoided_losses, loss_pct_gdp, present_value,
    relative_pv, relative_risk_change, rolling_pv,
)

YEARS = np.arange(2010, 2101)


def _series(losses=None, gdp=None):
    losses = np.ones(91) if losses is None else losses
    gdp = np.full(91, 100.0) if gdp is None else gdp
    return LossSeries(YEARS, losses, gdp)


def test_present_value_constant_unit_losses_geometric_oracle():
    pv = present_value(_series(), rate=0.015)
    q = 1.0 / 1.015
    expected = (1 - q ** 91) / (1 - q)
    assert pv == pytest.approx(expected, rel=1e-12)


def test_present_value_zero_rate_is_plain_sum():
    assert present_value(_series(), rate=0.0) == pytest.approx(91.0, rel=1e-12)


def test_present_value_subhorizon():
    pv = present_value(_series(), rate=0.015, t0=2010, t1=2011)
    assert pv == pytest.approx(1.0 + 1.0 / 1.015, rel=1e-12)


def test_loss_pct_gdp():
    s = _series(losses=np.full(91, 2.0), gdp=np.full(91, 50.0))
    assert loss_pct_gdp(s, 2050) == pytest.approx(4.0)


def test_relative_pv():
    assert relative_pv(50.0, 200.0) == pytest.approx(0.25)


def test_rolling_pv_matches_window_loop():
    rng = np.random.default_rng(8)
    losses = rng.random(91) * 10
    s = _series(losses=losses)
    years, values = rolling_pv(s, 0.015, 5)
    assert years[0] == 2010 and years[-1] == 2096
    for i, y in enumerate(years):
        expected = sum(losses[i + j] / 1.015 ** j for j in range(5))
        assert values[i] == pytest.approx(expected, rel=1e-12)


def test_rolling_pv_window_one_is_identity():
    losses = np.arange(91, dtype=float)
    _, values = rolling_pv(_series(losses=losses), 0.05, 1)
    assert np.allclose(values, losses)


def test_rolling_pv_rejects_bad_window():
    with pytest.raises(MetricsError):
        rolling_pv(_series(), 0.015, 0)
    with pytest.raises(MetricsError):
        rolling_pv(_series(), 0.015, 92)


def test_relative_risk_change_base_year_is_one():
    rng = np.random.default_rng(1)
    losses = rng.random(91) + 0.5
    years, values = rolling_pv(_series(losses=losses), 0.015, 5)
    sy, ratios = relative_risk_change(years, values, base_year=2024)
    assert ratios[np.flatnonzero(sy == 2024)[0]] == 1.0


def test_relative_risk_change_growth_direction():
    losses = np.linspace(1.0, 10.0, 91)  # growing losses
    years, values = rolling_pv(_series(losses=losses), 0.015, 5)
    _, ratios = relative_risk_change(years, values, base_year=2024)
    assert np.all(np.diff(ratios) > 0)


def test_relative_risk_change_missing_base_year():
    with pytest.raises(MetricsError):
        relative_risk_change(np.array([2010, 2011]), np.array([1.0, 2.0]),
                             base_year=2024)


def test_avoided_losses():
    assert avoided_losses(10.0, 4.0) == 6.0
    assert avoided_losses(4.0, 10.0) == -6.0
