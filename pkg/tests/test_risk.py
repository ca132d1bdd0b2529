import numpy as np
import pytest

from gridrisk.risk import (
    NO_DATE, RiskError, RiskIndexSpec, RiskThreshold, exceedance_date,
    exceedance_dates_array, exceedance_probability, hotspots,
    joint_exceedance_date, load_thresholds, parse_thresholds,
    percentile_field, risk_level_map, running_mean, running_mean_along_years,
    time_of_emergence,
)


def test_threshold_validation():
    RiskThreshold("dt", ">=", 3.0, 21)
    with pytest.raises(RiskError):
        RiskThreshold("humidity", ">=", 1.0)
    with pytest.raises(RiskError):
        RiskThreshold("dt", ">", 1.0)
    with pytest.raises(RiskError):
        RiskThreshold("dt", ">=", 1.0, window=4)  # even window
    with pytest.raises(RiskError):
        RiskThreshold("dt", ">=", float("nan"))


def test_index_spec_k_ordering():
    ths = tuple(RiskThreshold("dt", ">=", x) for x in (1.0, 2.0, 3.0))
    RiskIndexSpec(ths, k_moderate=2, k_high=3)
    with pytest.raises(RiskError):
        RiskIndexSpec(ths, k_moderate=3, k_high=2)
    with pytest.raises(RiskError):
        RiskIndexSpec(ths, k_moderate=1, k_high=4)


def test_running_mean_truncated_window_oracle():
    rng = np.random.default_rng(12)
    x = rng.random(40)
    for window in (1, 5, 21):
        got = running_mean(x, window)
        half = window // 2
        for i in range(40):
            lo, hi = max(0, i - half), min(40, i + half + 1)
            assert got[i] == pytest.approx(x[lo:hi].mean(), rel=1e-12)


def test_exceedance_date_simple():
    years = np.arange(2010, 2030)
    series = np.arange(20.0)
    th = RiskThreshold("dt", ">=", 10.0, window=1)
    assert exceedance_date(series, th, years) == 2020
    th_never = RiskThreshold("dt", ">=", 50.0, window=1)
    assert exceedance_date(series, th_never, years) is None
    th_le = RiskThreshold("dt", "<=", 5.0, window=1)
    assert exceedance_date(series, th_le, years) == 2010


def test_exceedance_dates_array_matches_scalar():
    rng = np.random.default_rng(13)
    years = np.arange(2010, 2101)
    series = rng.normal(1.0, 1.0, size=(6, 91, 7)).cumsum(axis=1) * 0.05
    th = RiskThreshold("dt", ">=", 1.5, window=21)
    dates = exceedance_dates_array(series, th, years)
    assert dates.shape == (6, 7)
    for r in range(6):
        for c in range(7):
            d = exceedance_date(series[r, :, c], th, years)
            expected = np.inf if d is None else d
            assert dates[r, c] == expected


def test_joint_exceedance_date_order_statistic():
    assert joint_exceedance_date([2030, 2040, None], 1) == 2030
    assert joint_exceedance_date([2030, 2040, None], 2) == 2040
    assert joint_exceedance_date([2030, 2040, None], 3) is None
    assert joint_exceedance_date([None, None], 1) is None


def test_exceedance_probability():
    years = np.arange(2010, 2020)
    # 3 realizations: two cross 1.0, one never does
    ens = np.stack([np.linspace(0, 2, 10),
                    np.linspace(0, 1.2, 10),
                    np.zeros(10)])
    th = RiskThreshold("dt", ">=", 1.0, window=1)
    # by the last year two of three members have crossed
    assert exceedance_probability(ens, th, 2019, years) == pytest.approx(2 / 3)
    # before any crossing the probability is zero
    assert exceedance_probability(ens, th, 2012, years) == 0.0


def test_percentile_field_order_statistics_oracle():
    rng = np.random.default_rng(14)
    ens = rng.random((9, 5))
    # q=0.5 of 9 samples with linear interpolation is the 5th order statistic
    med = percentile_field(ens, 0.5)
    assert np.allclose(med, np.sort(ens, axis=0)[4])
    assert np.allclose(percentile_field(ens, 0.0), ens.min(axis=0))
    assert np.allclose(percentile_field(ens, 1.0), ens.max(axis=0))


def test_running_mean_along_years_matches_1d():
    rng = np.random.default_rng(15)
    arr = rng.random((3, 30, 4))
    out = running_mean_along_years(arr, 5, axis=1)
    for r in range(3):
        for c in range(4):
            assert np.allclose(out[r, :, c], running_mean(arr[r, :, c], 5))


def test_time_of_emergence():
    # signal permanently clears the noise band from index 40 on
    ens = np.zeros((8, 80))
    ens[:, 40:] = 2.0
    years = np.arange(2010, 2090)
    toe = time_of_emergence(ens, noise_level=0.5, years=years)
    assert toe == 2050
    assert time_of_emergence(np.zeros((8, 80)), noise_level=0.5,
                             years=years) is None


def test_risk_level_map_two_thresholds():
    years = np.arange(2010, 2040)
    n_years = 30
    # deterministic single-realization ensemble, 2 cells
    dt = np.zeros((1, n_years, 2))
    dt[0, 5:, 0] = 3.5   # cell 0 crosses dt in 2015
    dt[0, 20:, 1] = 3.5  # cell 1 crosses dt in 2030
    dp = np.zeros((1, n_years, 2))
    dp[0, 10:, 0] = -15.0  # cell 0 crosses dp in 2020; cell 1 never
    spec = RiskIndexSpec((RiskThreshold("dt", ">=", 3.0, 1),
                          RiskThreshold("dp", "<=", -10.0, 1)),
                         k_moderate=1, k_high=2)
    maps = risk_level_map({"dt": dt, "dp": dp}, spec, years)
    mod, high = maps["moderate"], maps["high"]
    assert mod.years[0] == 2015 and high.years[0] == 2020
    assert mod.years[1] == 2030 and high.years[1] == NO_DATE
    assert mod.probability[0] == 1.0 and high.probability[1] == 0.0


def test_risk_level_map_missing_variable():
    spec = RiskIndexSpec((RiskThreshold("dt", ">=", 3.0, 1),), 1, 1)
    with pytest.raises(RiskError, match="dt"):
        risk_level_map({"dp": np.zeros((1, 3, 1))}, spec, np.arange(3))


def test_hotspots_sorted_by_date():
    from gridrisk.risk import ExceedanceMap
    emap = ExceedanceMap(years=np.array([2060, NO_DATE, 2030, 2045]),
                         probability=np.array([1.0, 0.0, 1.0, 1.0]))
    order = hotspots(emap)
    assert list(order) == [2, 3, 0]


def test_parse_thresholds_roundtrip(tmp_path):
    text = ("# comment\n"
            "dt,>=,3.0,21\n"
            "dp,<=,-10.0\n"
            "k_moderate=1\n"
            "k_high=2\n")
    path = tmp_path / "th.csv"
    path.write_text(text)
    spec = load_thresholds(path)
    assert len(spec.thresholds) == 2
    assert spec.thresholds[0].window == 21
    assert spec.thresholds[1].window == 21  # default
    assert spec.k_moderate == 1 and spec.k_high == 2


def test_parse_thresholds_bad_line():
    with pytest.raises(RiskError, match="2"):
        parse_thresholds(["dt,>=,3.0", "garbage line"])


def test_parse_thresholds_empty():
    with pytest.raises(RiskError):
        parse_thresholds(["# nothing"])
