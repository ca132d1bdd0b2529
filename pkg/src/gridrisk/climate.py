"""Stochastic reduced-complexity climate core.

Emissions -> concentrations (impulse-response carbon cycle, one-box CH4/N2O)
-> radiative forcing -> global temperature (two-box energy balance with
sampled climate sensitivity) -> pattern-scaled grid temperature and
precipitation changes, plus urban-heat-island increments.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .grid import CellField, GridSpec, GridError
from .scenario import EmissionsPathway

F2X = 3.71  # W/m^2 forcing from doubled CO2

# Preindustrial baselines
CO2_PPM_0 = 278.0
CH4_PPB_0 = 720.0
N2O_PPB_0 = 270.0

# Unit conversions
GTC_PER_PPM = 2.124
MT_CH4_PER_PPB = 2.75
MT_N2O_PER_PPB = 4.8


class ClimateError(ValueError):
    pass


@dataclass(frozen=True)
class EcsDistribution:
    """Triangular equilibrium-climate-sensitivity distribution (degC)."""

    min: float = 2.5
    mode: float = 3.0
    max: float = 4.0

    def __post_init__(self):
        if not (0 < self.min < self.mode < self.max):
            raise ClimateError("require 0 < min < mode < max")

    def quantile(self, u) -> np.ndarray:
        """Inverse CDF of the triangular distribution."""
        u = np.asarray(u, dtype=float)
        fc = (self.mode - self.min) / (self.max - self.min)
        lo = self.min + np.sqrt(u * (self.max - self.min) * (self.mode - self.min))
        hi = self.max - np.sqrt((1 - u) * (self.max - self.min) * (self.max - self.mode))
        out = np.where(u < fc, lo, hi)
        return out if out.ndim else float(out)

    @property
    def mean(self) -> float:
        return (self.min + self.mode + self.max) / 3.0

    @property
    def variance(self) -> float:
        a, c, b = self.min, self.mode, self.max
        return (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0


def sample_ecs(dist: EcsDistribution, rng: np.random.Generator) -> float:
    """Inverse-CDF triangular draw; deterministic given the stream state."""
    return float(dist.quantile(rng.random()))


@dataclass(frozen=True)
class CarbonCycleParams:
    """3-pool impulse-response carbon cycle plus one-box CH4/N2O decay.

    The first CO2 pool is permanent (infinite lifetime).
    """

    co2_pool_fractions: tuple = (0.15, 0.30, 0.55)
    co2_pool_lifetimes: tuple = (math.inf, 70.0, 10.0)
    ch4_lifetime: float = 11.8
    n2o_lifetime: float = 121.0

    def __post_init__(self):
        if abs(sum(self.co2_pool_fractions) - 1.0) > 1e-9:
            raise ClimateError("CO2 pool fractions must sum to 1")


@dataclass(frozen=True)
class Concentrations:
    years: np.ndarray
    co2_ppm: np.ndarray
    ch4_ppb: np.ndarray
    n2o_ppb: np.ndarray


def concentrations(emissions: EmissionsPathway,
                   params: CarbonCycleParams = CarbonCycleParams()) -> Concentrations:
    """Annual concentrations from emissions, starting at preindustrial
    baselines at the start of the pathway."""
    n = len(emissions.years)
    decay = np.array([
        1.0 if math.isinf(tau) else math.exp(-1.0 / tau)
        for tau in params.co2_pool_lifetimes
    ])
    fractions = np.asarray(params.co2_pool_fractions)
    pools = np.zeros(len(fractions))  # GtC
    co2 = np.empty(n)
    for t in range(n):
        pools = pools * decay + fractions * emissions.co2[t]
        co2[t] = CO2_PPM_0 + pools.sum() / GTC_PER_PPM

    ch4 = np.empty(n)
    n2o = np.empty(n)
    ch4_box = 0.0  # ppb above baseline
    n2o_box = 0.0
    dch4 = math.exp(-1.0 / params.ch4_lifetime)
    dn2o = math.exp(-1.0 / params.n2o_lifetime)
    for t in range(n):
        ch4_box = ch4_box * dch4 + emissions.ch4[t] / MT_CH4_PER_PPB
        n2o_box = n2o_box * dn2o + emissions.n2o[t] / MT_N2O_PER_PPB
        ch4[t] = CH4_PPB_0 + ch4_box
        n2o[t] = N2O_PPB_0 + n2o_box
    return Concentrations(years=emissions.years, co2_ppm=co2, ch4_ppb=ch4, n2o_ppb=n2o)


def forcing(conc: Concentrations, other_forcing=None) -> np.ndarray:
    """Radiative forcing (W/m^2) from concentrations plus exogenous terms.

    CO2 uses the logarithmic form; CH4 and N2O use square-root forms.
    """
    if np.any(conc.co2_ppm <= 0) or np.any(conc.ch4_ppb <= 0) or np.any(conc.n2o_ppb <= 0):
        raise ClimateError("non-positive concentration")
    f = 5.35 * np.log(conc.co2_ppm / CO2_PPM_0)
    f = f + 0.036 * (np.sqrt(conc.ch4_ppb) - np.sqrt(CH4_PPB_0))
    f = f + 0.12 * (np.sqrt(conc.n2o_ppb) - np.sqrt(N2O_PPB_0))
    if other_forcing is not None:
        f = f + np.asarray(other_forcing)
    return f


@dataclass(frozen=True)
class EbmParams:
    """Two-box (surface + deep ocean) energy-balance parameters.

    Heat capacities in W yr m^-2 K^-1; exchange coefficient in W m^-2 K^-1.
    """

    c_surface: float = 7.3
    c_deep: float = 91.0
    exchange: float = 1.3

    def __post_init__(self):
        if self.c_surface <= 0 or self.c_deep <= 0:
            raise ClimateError("unstable parameterization: non-positive heat capacity")


@dataclass(frozen=True)
class GlobalTempPath:
    """Annual global-mean warming relative to preindustrial, degC."""

    years: np.ndarray
    delta_t: np.ndarray
    realization: int = 0
    ecs: float = float("nan")
    pattern_id: str = ""

    def __post_init__(self):
        if not np.all(np.isfinite(self.delta_t)):
            raise ClimateError("non-finite temperature path")


def simulate_global_temperature(forcing_series: np.ndarray, ecs: float,
                                years: np.ndarray,
                                offset_2010: float = 0.0,
                                params: EbmParams = EbmParams(),
                                realization: int = 0,
                                pattern_id: str = "") -> GlobalTempPath:
    """Two-box energy balance integrated annually from rest.

    Equilibrium warming for constant forcing F is ecs * F / F2X. The output
    adds `offset_2010`, the base-period warming above preindustrial.
    """
    if ecs <= 0:
        raise ClimateError("ecs must be positive")
    lam = F2X / ecs
    t_s, t_d = 0.0, 0.0
    out = np.empty(len(forcing_series))
    for t, f in enumerate(np.asarray(forcing_series, dtype=float)):
        flux = params.exchange * (t_s - t_d)
        t_s = t_s + (f - lam * t_s - flux) / params.c_surface
        t_d = t_d + flux / params.c_deep
        out[t] = t_s + offset_2010
    return GlobalTempPath(years=np.asarray(years), delta_t=out,
                          realization=realization, ecs=ecs, pattern_id=pattern_id)


@dataclass(frozen=True)
class EsmPattern:
    """Per-cell scaling of local change per degree of global warming."""

    pattern_id: str
    grid: GridSpec
    t_scale: np.ndarray  # degC local per degC global
    p_scale: np.ndarray  # % precipitation per degC global

    def validate(self, land: np.ndarray, areas: np.ndarray) -> None:
        if np.any(self.t_scale[land] <= 0):
            raise ClimateError("temperature scaling must be positive over land")
        mean = float(np.sum(self.t_scale * areas) / np.sum(areas))
        if abs(mean - 1.0) > 0.05:
            raise ClimateError(f"area-weighted t_scale mean {mean:.3f} outside 1 +/- 0.05")


def load_pattern(path, grid: GridSpec) -> EsmPattern:
    """Load a pattern file: cell, t_scale, p_scale, pattern (id)."""
    rows = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
    t_scale = np.zeros(grid.n_cells)
    p_scale = np.zeros(grid.n_cells)
    idx = rows["cell"].astype(int)
    if len(idx) != grid.n_cells:
        raise GridError("pattern file does not cover the grid")
    t_scale[idx] = rows["t_scale"].astype(float)
    p_scale[idx] = rows["p_scale"].astype(float)
    pid = str(np.atleast_1d(rows["pattern"])[0])
    return EsmPattern(pattern_id=pid, grid=grid, t_scale=t_scale, p_scale=p_scale)


@dataclass(frozen=True)
class ClimateField:
    """Per-cell annual warming, precipitation change, and UHI increment."""

    grid: GridSpec
    years: np.ndarray
    delta_t: np.ndarray   # (n_years, n_cells) degC
    delta_p: np.ndarray   # (n_years, n_cells) % of baseline precipitation
    uhi: np.ndarray       # (n_years, n_cells) degC, zero outside urban cells

    def __post_init__(self):
        if np.any(self.delta_p < -100):
            raise ClimateError("precipitation change below -100%")


def pattern_scale(global_path: GlobalTempPath, pattern: EsmPattern) -> ClimateField:
    """Scale the global path to per-cell warming and precipitation change.

    Precipitation change is clamped at -100%.
    """
    gt = global_path.delta_t[:, None]
    delta_t = pattern.t_scale[None, :] * gt
    delta_p = np.maximum(pattern.p_scale[None, :] * gt, -100.0)
    uhi = np.zeros_like(delta_t)
    return ClimateField(grid=pattern.grid, years=global_path.years,
                        delta_t=delta_t, delta_p=delta_p, uhi=uhi)


def uhi_increment(population, urban, alpha: float = 1.0, beta: float = 5.0):
    """Urban-heat-island warming (degC) from population count.

    Zero outside urban cells; max(0, alpha*log10(pop) - beta) inside, about
    1 degC at 1e6 and 2 degC at 1e7 people with the defaults.
    """
    population = np.asarray(population, dtype=float)
    urban = np.asarray(urban, dtype=bool)
    if np.any(population < 0):
        raise ClimateError("negative population")
    with np.errstate(divide="ignore"):
        inc = np.maximum(0.0, alpha * np.log10(np.maximum(population, 1.0)) - beta)
    out = np.where(urban, inc, 0.0)
    return out if out.ndim else float(out)


def load_ebm_params(path) -> EbmParams:
    vals = _load_kv(path)
    return EbmParams(
        c_surface=float(vals.get("c_surface", 7.3)),
        c_deep=float(vals.get("c_deep", 91.0)),
        exchange=float(vals.get("exchange", 1.3)),
    )


def load_carbon_params(path) -> CarbonCycleParams:
    vals = _load_kv(path)
    lifetimes = tuple(
        math.inf if v.strip() in ("inf", "Inf") else float(v)
        for v in vals.get("co2_pool_lifetimes", "inf,70,10").split(",")
    )
    fractions = tuple(float(v) for v in vals.get("co2_pool_fractions", "0.15,0.30,0.55").split(","))
    return CarbonCycleParams(
        co2_pool_fractions=fractions,
        co2_pool_lifetimes=lifetimes,
        ch4_lifetime=float(vals.get("ch4_lifetime", 11.8)),
        n2o_lifetime=float(vals.get("n2o_lifetime", 121.0)),
    )


def _load_kv(path) -> dict:
    out = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
