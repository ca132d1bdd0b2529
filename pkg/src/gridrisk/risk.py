"""Uni- and multivariate risk indices: exceedance dates, joint-threshold
risk levels, exceedance probabilities, time of emergence, percentile
fields, and hotspots."""

from dataclasses import dataclass, field

import numpy as np

from . import YEAR_END, YEAR_START

VARIABLES = ("dt", "dp", "loss_pct", "loss_value")

# per-cell date value meaning "not this century"
NO_DATE = -1


class RiskError(ValueError):
    pass


@dataclass(frozen=True)
class RiskThreshold:
    variable: str            # one of VARIABLES
    comparator: str          # ">=" or "<="
    level: float
    window: int = 21         # centered running-mean smoothing, years

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise RiskError(f"unknown variable {self.variable!r}; expected {VARIABLES}")
        if self.comparator not in (">=", "<="):
            raise RiskError("comparator must be '>=' or '<='")
        if not np.isfinite(self.level):
            raise RiskError("threshold level must be finite")
        if self.window < 1 or self.window % 2 == 0:
            raise RiskError("window must be odd and >= 1")


@dataclass(frozen=True)
class RiskIndexSpec:
    thresholds: tuple
    k_moderate: int = 2
    k_high: int = 3

    def __post_init__(self):
        n = len(self.thresholds)
        if not (1 <= self.k_moderate <= self.k_high <= n):
            raise RiskError(
                f"require 1 <= k_moderate <= k_high <= {n} thresholds"
            )


@dataclass(frozen=True)
class ExceedanceMap:
    """Per-cell exceedance year (NO_DATE when never) and, when
    ensemble-based, the probability of exceedance by 2100."""

    years: np.ndarray        # per-cell, int
    probability: np.ndarray  # per-cell, in [0, 1]


def running_mean(series: np.ndarray, window: int) -> np.ndarray:
    """Centered running mean, truncated at the series edges."""
    series = np.asarray(series, dtype=float)
    if window == 1:
        return series.copy()
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(series)])
    n = len(series)
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half, n - 1)
    return (csum[hi + 1] - csum[lo]) / (hi - lo + 1)


def exceedance_date(series: np.ndarray, threshold: RiskThreshold,
                    years: np.ndarray = None):
    """First year the smoothed series satisfies the comparator; None if it
    never does (a crossing is treated as permanent for dating purposes)."""
    if years is None:
        years = np.arange(YEAR_START, YEAR_START + len(series))
    smooth = running_mean(series, threshold.window)
    if threshold.comparator == ">=":
        hit = smooth >= threshold.level
    else:
        hit = smooth <= threshold.level
    idx = np.flatnonzero(hit)
    if len(idx) == 0:
        return None
    return int(years[idx[0]])


def joint_exceedance_date(dates, k: int):
    """Year the k-th threshold is crossed: the k-th smallest defined date.

    None when fewer than k thresholds are ever crossed.
    """
    if not (1 <= k <= len(dates)):
        raise RiskError("k outside [1, number of thresholds]")
    defined = sorted(d for d in dates if d is not None)
    if len(defined) < k:
        return None
    return defined[k - 1]


def exceedance_probability(ensemble: np.ndarray, threshold: RiskThreshold,
                           year: int, years: np.ndarray = None) -> float:
    """Fraction of realizations whose exceedance date is <= year."""
    ensemble = np.atleast_2d(ensemble)
    if ensemble.shape[0] == 0:
        raise RiskError("empty ensemble")
    hits = 0
    for member in ensemble:
        d = exceedance_date(member, threshold, years)
        if d is not None and d <= year:
            hits += 1
    return hits / ensemble.shape[0]


def time_of_emergence(ensemble_pct: np.ndarray, noise_level: float = 0.5,
                      q: float = 0.05, years: np.ndarray = None):
    """First year from which the q-quantile of the ensemble loss percentage
    exceeds `noise_level` for all remaining years."""
    if not (0 < q <= 0.5):
        raise RiskError("q must lie in (0, 0.5]")
    ensemble_pct = np.atleast_2d(ensemble_pct)
    if years is None:
        years = np.arange(YEAR_START, YEAR_START + ensemble_pct.shape[1])
    quant = np.quantile(ensemble_pct, q, axis=0)
    above = quant > noise_level
    # last year must be above; scan backwards for the start of the final run
    if not above[-1]:
        return None
    idx = len(above) - 1
    while idx > 0 and above[idx - 1]:
        idx -= 1
    return int(years[idx])


def percentile_field(cell_ensembles: np.ndarray, q: float) -> np.ndarray:
    """Per-cell empirical quantile (linear interpolation between order
    statistics). Input is (n_realizations, n_cells)."""
    if not (0.0 <= q <= 1.0):
        raise RiskError("q must lie in [0, 1]")
    cell_ensembles = np.atleast_2d(cell_ensembles)
    if cell_ensembles.shape[0] == 0:
        raise RiskError("empty ensemble")
    return np.quantile(cell_ensembles, q, axis=0, method="linear")


def running_mean_along_years(arr: np.ndarray, window: int, axis: int = 1) -> np.ndarray:
    """Centered running mean along one axis, truncated at the edges."""
    if window == 1:
        return np.asarray(arr, dtype=float)
    arr = np.moveaxis(np.asarray(arr, dtype=float), axis, 0)
    half = window // 2
    n = arr.shape[0]
    csum = np.concatenate([np.zeros((1,) + arr.shape[1:]), np.cumsum(arr, axis=0)])
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half, n - 1)
    counts = (hi - lo + 1).reshape((n,) + (1,) * (arr.ndim - 1))
    out = (csum[hi + 1] - csum[lo]) / counts
    return np.moveaxis(out, 0, axis)


def exceedance_dates_array(series: np.ndarray, threshold: RiskThreshold,
                           years: np.ndarray = None) -> np.ndarray:
    """Vectorized exceedance dates for (n_realizations, n_years, n_cells)
    series; np.inf marks 'never this century'."""
    series = np.asarray(series)
    if years is None:
        years = np.arange(YEAR_START, YEAR_START + series.shape[1])
    smooth = running_mean_along_years(series, threshold.window, axis=1)
    hit = smooth >= threshold.level if threshold.comparator == ">=" else smooth <= threshold.level
    first = np.argmax(hit, axis=1)
    ever = np.any(hit, axis=1)
    dates = np.where(ever, np.asarray(years)[first], np.inf)
    return dates


def risk_level_map(cell_series: dict, spec: RiskIndexSpec,
                   years: np.ndarray = None) -> dict:
    """Moderate/high risk-level maps over an ensemble.

    `cell_series` maps variable id -> (n_realizations, n_years, n_cells).
    The per-cell date is the median of per-realization joint dates; the
    probability is the fraction of realizations with a defined joint date.
    """
    for th in spec.thresholds:
        if th.variable not in cell_series:
            raise RiskError(f"variable {th.variable!r} missing from store")
    sample = next(iter(cell_series.values()))
    n_real, n_years, n_cells = sample.shape
    if years is None:
        years = np.arange(YEAR_START, YEAR_START + n_years)
    # (n_thresholds, n_realizations, n_cells) marginal dates
    marginal = np.stack([
        exceedance_dates_array(cell_series[th.variable], th, years)
        for th in spec.thresholds
    ])
    ordered = np.sort(marginal, axis=0)  # inf sorts last, so the k-th entry
    out = {}                             # is the k-th smallest defined date
    for name, k in (("moderate", spec.k_moderate), ("high", spec.k_high)):
        joint = ordered[k - 1]  # (n_realizations, n_cells)
        med = np.median(joint, axis=0)
        dates = np.where(np.isfinite(med), np.round(med), NO_DATE).astype(int)
        prob = np.mean(np.isfinite(joint), axis=0)
        out[name] = ExceedanceMap(years=dates, probability=prob)
    return out


def hotspots(emap: ExceedanceMap, cutoff_year: int = YEAR_END) -> np.ndarray:
    """Cells with a date <= cutoff, ranked ascending by date."""
    dated = np.flatnonzero((emap.years != NO_DATE) & (emap.years <= cutoff_year))
    return dated[np.argsort(emap.years[dated], kind="stable")]


def parse_thresholds(lines, source: str = "<thresholds>") -> RiskIndexSpec:
    """Parse threshold lines: variable,comparator,level[,window]; directives
    'k_moderate=' and 'k_high=' may appear on their own lines."""
    thresholds = []
    k_moderate, k_high = 2, 3
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("k_moderate"):
            k_moderate = int(line.partition("=")[2])
            continue
        if line.startswith("k_high"):
            k_high = int(line.partition("=")[2])
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (3, 4):
            raise RiskError(f"{source}:{lineno}: expected variable,comparator,level[,window]")
        window = int(parts[3]) if len(parts) == 4 else 21
        thresholds.append(RiskThreshold(parts[0], parts[1], float(parts[2]), window))
    if not thresholds:
        raise RiskError(f"{source}: no thresholds")
    return RiskIndexSpec(tuple(thresholds), k_moderate=k_moderate, k_high=k_high)


def load_thresholds(path) -> RiskIndexSpec:
    """Parse a thresholds file (see parse_thresholds for the line format)."""
    with open(path) as f:
        return parse_thresholds(f, source=str(path))
