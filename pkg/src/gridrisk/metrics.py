"""Economic loss metrics: annual %GDP, present value, relative present
value, rolling-window present value, and relative systematic-risk change."""

from dataclasses import dataclass

import numpy as np

from . import YEAR_START


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class LossSeries:
    """Annual losses and GDP (US$2005) at any aggregation level."""

    years: np.ndarray
    losses: np.ndarray
    gdp: np.ndarray

    def __post_init__(self):
        if not (len(self.years) == len(self.losses) == len(self.gdp)):
            raise MetricsError("series lengths differ")


def loss_pct_gdp(series: LossSeries, year: int) -> float:
    """Yearly loss as a percentage of the corresponding GDP."""
    t = _year_index(series.years, year)
    if series.gdp[t] <= 0:
        raise MetricsError(f"zero GDP in {year}")
    return 100.0 * series.losses[t] / series.gdp[t]


def present_value(series: LossSeries, rate: float,
                  t0: int = 2010, t1: int = 2100) -> float:
    """Discounted sum of annual losses from t0 through t1."""
    if rate <= -1:
        raise MetricsError("rate must exceed -1")
    sel = (series.years >= t0) & (series.years <= t1)
    years = series.years[sel]
    disc = (1.0 + rate) ** (years - t0)
    return float(np.sum(series.losses[sel] / disc))


def relative_pv(pv: float, reference_gdp: float) -> float:
    """Present value in units of a reference-year GDP."""
    if reference_gdp <= 0:
        raise MetricsError("reference GDP must be positive")
    return pv / reference_gdp


def rolling_pv(series: LossSeries, rate: float, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-start-year PV over a fixed window: for each start year s,
    sum of losses_t / (1+rate)^(t-s) for t in [s, s+window-1].

    Returns (start_years, values).
    """
    if window < 1:
        raise MetricsError("window must be at least 1")
    n = len(series.years)
    if window > n:
        raise MetricsError("window exceeds series length")
    disc = (1.0 + rate) ** np.arange(window)
    weights = 1.0 / disc
    values = np.convolve(series.losses, weights[::-1], mode="valid")
    return series.years[: n - window + 1], values


def relative_risk_change(start_years: np.ndarray, values: np.ndarray,
                         base_year: int = 2024) -> tuple[np.ndarray, np.ndarray]:
    """Rolling-window PV relative to the base-year window.

    Returns (start_years, ratios); ratio at the base year is exactly 1.
    Percentage increase is ratio - 1.
    """
    t = _year_index(start_years, base_year)
    base = values[t]
    if base <= 0:
        raise MetricsError(f"zero rolling PV at base year {base_year}")
    return start_years, values / base


def avoided_losses(pv_a: float, pv_b: float) -> float:
    """Avoided losses between two scenarios of the same variant: PV_a - PV_b."""
    return pv_a - pv_b


def _year_index(years: np.ndarray, year: int) -> int:
    idx = np.flatnonzero(np.asarray(years) == year)
    if len(idx) == 0:
        raise MetricsError(f"year {year} not in series")
    return int(idx[0])
