"""Emissions pathways, socioeconomic downscaling, and urban-cell identification."""

import os
from dataclasses import dataclass

import numpy as np

from . import N_YEARS, YEAR_END, YEAR_START
from .grid import CellField, GridSpec, RegionMap, GridError

SCENARIO_IDS = ("CP", "B2", "DT", "FR", "custom")

DEFAULT_URBAN_THRESHOLD = 1_000_000  # persons per cell


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class EmissionsPathway:
    scenario_id: str
    years: np.ndarray          # contiguous, 2010..2100
    co2: np.ndarray            # GtC/yr
    ch4: np.ndarray            # Mt/yr
    n2o: np.ndarray            # Mt/yr
    other_forcing: np.ndarray  # W/m^2, exogenous

    def __post_init__(self):
        n = len(self.years)
        if np.any(np.diff(self.years) != 1):
            gap = int(self.years[np.flatnonzero(np.diff(self.years) != 1)[0]] + 1)
            raise ScenarioError(f"years not contiguous: missing {gap}")
        for name in ("co2", "ch4", "n2o", "other_forcing"):
            series = getattr(self, name)
            if len(series) != n:
                raise ScenarioError(f"{name} length {len(series)} != {n} years")
        for name in ("co2", "ch4", "n2o"):
            if np.any(getattr(self, name) < 0):
                raise ScenarioError(f"negative {name} emissions")


@dataclass(frozen=True)
class SocioScenario:
    """Per-country national series plus base/target grid share patterns."""

    grid: GridSpec
    countries: list
    years: np.ndarray
    gdp: dict        # country -> annual series, US$2005
    population: dict  # country -> annual series, persons
    gdp_shares_base: np.ndarray    # per-cell, sum to 1 per country
    gdp_shares_target: np.ndarray
    pop_shares_base: np.ndarray
    pop_shares_target: np.ndarray
    ssp: str = "SSP2"

    def __post_init__(self):
        for c in self.countries:
            if np.any(self.gdp[c] < 0) or np.any(self.population[c] < 0):
                raise ScenarioError(f"negative GDP or population for {c}")


@dataclass(frozen=True)
class UrbanMask:
    """Per-cell, per-year urban flag and population count."""

    grid: GridSpec
    years: np.ndarray
    urban: np.ndarray       # (n_years, n_cells) bool
    population: np.ndarray  # (n_years, n_cells) persons
    threshold: float


def load_emissions(path, scenario_id: str = "custom") -> EmissionsPathway:
    """Load an emissions pathway from delimited text.

    Columns: year, co2_gtc, ch4_mt, n2o_mt, other_wm2. A missing other_wm2
    column defaults to zero.
    """
    with open(path) as f:
        header = f.readline().strip().split(",")
        required = ["year", "co2_gtc", "ch4_mt", "n2o_mt"]
        for col in required:
            if col not in header:
                raise ScenarioError(f"missing column {col!r} in {path}")
        cols = {name: [] for name in header}
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise ScenarioError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise ScenarioError(f"{path}:{lineno}: malformed numeric value")
            for name, v in zip(header, vals):
                cols[name].append(v)
    other = np.array(cols.get("other_wm2", [0.0] * len(cols["year"])))
    return EmissionsPathway(
        scenario_id=scenario_id,
        years=np.array(cols["year"], dtype=int),
        co2=np.array(cols["co2_gtc"]),
        ch4=np.array(cols["ch4_mt"]),
        n2o=np.array(cols["n2o_mt"]),
        other_forcing=other,
    )


def save_emissions(path, pathway: EmissionsPathway) -> None:
    with open(path, "w") as f:
        f.write("year,co2_gtc,ch4_mt,n2o_mt,other_wm2\n")
        for i, y in enumerate(pathway.years):
            f.write(
                f"{y},{pathway.co2[i]:.6f},{pathway.ch4[i]:.4f},"
                f"{pathway.n2o[i]:.4f},{pathway.other_forcing[i]:.4f}\n"
            )


def interpolate_shares(base: np.ndarray, target: np.ndarray, year: int,
                       year_base: int = YEAR_START, year_target: int = YEAR_END) -> np.ndarray:
    """Linear base->target interpolation of shares, renormalized to sum 1."""
    w = (year - year_base) / (year_target - year_base)
    w = min(max(w, 0.0), 1.0)
    shares = (1.0 - w) * base + w * target
    total = shares.sum()
    if total <= 0:
        raise ScenarioError("shares not normalizable (all zero)")
    return shares / total


def downscale_series(national: float, base_shares: np.ndarray,
                     target_shares: np.ndarray, year: int) -> np.ndarray:
    """Distribute a national total over cells by dynamic pattern scaling.

    Cell values sum to the national total by construction.
    """
    return national * interpolate_shares(base_shares, target_shares, year)


def identify_urban(population: np.ndarray, years: np.ndarray, grid: GridSpec,
                   threshold: float = DEFAULT_URBAN_THRESHOLD) -> UrbanMask:
    """Flag cells whose population count reaches `threshold`, year by year."""
    population = np.asarray(population)
    if np.any(population < 0):
        raise ScenarioError("negative population")
    return UrbanMask(
        grid=grid,
        years=np.asarray(years),
        urban=population >= threshold,
        population=population,
        threshold=threshold,
    )


def load_national_series(path):
    """Load per-country GDP/population series: country, year, gdp_usd2005, pop."""
    rows = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
    countries = [str(c) for c in np.unique(rows["country"])]
    years = np.unique(rows["year"]).astype(int)
    gdp, pop = {}, {}
    for c in countries:
        sel = rows["country"].astype(str) == c
        order = np.argsort(rows["year"][sel])
        gdp[c] = rows["gdp_usd2005"][sel][order].astype(float)
        pop[c] = rows["pop"][sel][order].astype(float)
        if len(gdp[c]) != len(years):
            raise ScenarioError(f"country {c} series length mismatch")
    return countries, years, gdp, pop


def load_shares(path, grid: GridSpec):
    """Load a share-grid file: cell, gdp_share, pop_share (per-country sums 1)."""
    rows = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
    gdp_shares = np.zeros(grid.n_cells)
    pop_shares = np.zeros(grid.n_cells)
    idx = rows["cell"].astype(int)
    gdp_shares[idx] = rows["gdp_share"].astype(float)
    pop_shares[idx] = rows["pop_share"].astype(float)
    return gdp_shares, pop_shares


def validate_shares(shares: np.ndarray, rmap: RegionMap, what: str) -> None:
    for c in np.unique(rmap.country[rmap.land]):
        total = shares[rmap.land & (rmap.country == c)].sum()
        if abs(total - 1.0) > 1e-9:
            raise ScenarioError(f"{what} shares for {c} sum to {total}, expected 1")


@dataclass(frozen=True)
class ScenarioBundle:
    """Mutually consistent emissions + downscaled socioeconomics on one grid."""

    grid: GridSpec
    region_map: RegionMap
    emissions: EmissionsPathway
    socio: SocioScenario
    gdp: np.ndarray         # (n_years, n_cells) US$2005
    population: np.ndarray  # (n_years, n_cells) persons
    urban: UrbanMask


def build_scenario(grid: GridSpec, rmap: RegionMap, emissions: EmissionsPathway,
                   socio: SocioScenario,
                   urban_threshold: float = DEFAULT_URBAN_THRESHOLD) -> ScenarioBundle:
    """Downscale national series to the grid and identify urban cells."""
    if socio.grid != grid:
        raise ScenarioError("socio scenario grid does not match")
    validate_shares(socio.gdp_shares_base, rmap, "base GDP")
    validate_shares(socio.gdp_shares_target, rmap, "target GDP")
    validate_shares(socio.pop_shares_base, rmap, "base population")
    validate_shares(socio.pop_shares_target, rmap, "target population")
    years = socio.years
    gdp = np.zeros((len(years), grid.n_cells))
    pop = np.zeros((len(years), grid.n_cells))
    for c in socio.countries:
        mask = rmap.land & (rmap.country == c)
        gb = socio.gdp_shares_base[mask]
        gt = socio.gdp_shares_target[mask]
        pb = socio.pop_shares_base[mask]
        pt = socio.pop_shares_target[mask]
        for t, year in enumerate(years):
            gdp[t, mask] = downscale_series(socio.gdp[c][t], gb, gt, int(year))
            pop[t, mask] = downscale_series(socio.population[c][t], pb, pt, int(year))
    urban = identify_urban(pop, years, grid, urban_threshold)
    return ScenarioBundle(
        grid=grid, region_map=rmap, emissions=emissions, socio=socio,
        gdp=gdp, population=pop, urban=urban,
    )
