"""Synthetic demo asset generator.

Builds a complete, self-consistent offline asset set: demo grids, emissions
proxies for the four scenarios, national socioeconomic series with share
grids, emulated-model patterns, damage calibrations, default thresholds,
and ready-to-run engine configs. Regeneration with the same seed is
byte-identical.
"""

import os

import numpy as np

from . import N_YEARS, YEAR_END, YEAR_START
from .grid import GridSpec, RegionMap, WATER, save_grid
from .rng import stream

YEARS = np.arange(YEAR_START, YEAR_END + 1)

REGIONS = ("USA", "WEU", "JPN", "RUS", "EEU", "CHN", "IND", "MEA", "AFR",
           "LAM", "OHI", "OAS")

# synthetic population centers on the demo grid: (lat, lon, 2010 persons, growth/yr)
CITIES = (
    (19.25, -99.25, 20.0e6, 0.010),   # Valley of Mexico
    (20.75, -103.25, 4.4e6, 0.013),   # Guadalajara
    (25.75, -100.25, 4.1e6, 0.015),   # Monterrey
    (19.25, -98.25, 2.7e6, 0.012),    # Puebla
    (21.25, -89.75, 1.0e6, 0.016),    # Merida
    (32.25, -116.75, 1.7e6, 0.014),   # Tijuana border cluster
    (20.75, -100.25, 1.1e6, 0.018),   # Queretaro corridor
)


def demo_grid_spec() -> GridSpec:
    return GridSpec(lat_min=14.0, lat_max=33.5, lon_min=-118.0, lon_max=-86.0,
                    resolution=0.5)


def _demo_land(lat, lon):
    # diagonal strip narrowing southeastward, a rough continental outline
    west = -117.0 + 1.15 * (33.5 - lat)
    east = -86.5 - 0.55 * (lat - 14.0)
    return (lon >= west) & (lon <= east)


def build_demo_grid() -> tuple[GridSpec, RegionMap]:
    spec = demo_grid_spec()
    lat, lon = spec.cell_center(np.arange(spec.n_cells))
    land = _demo_land(lat, lon)
    country = np.full(spec.n_cells, WATER, dtype=object)
    country[land] = "MEX"
    country[land & (lat > 31.5)] = "USA"
    country[land & (lat < 17.5) & (lon > -91.0)] = "GTM"
    region = np.full(spec.n_cells, WATER, dtype=object)
    region[land] = "LAM"
    region[country == "USA"] = "USA"
    admin1 = np.full(spec.n_cells, WATER, dtype=object)
    admin2 = np.full(spec.n_cells, WATER, dtype=object)
    # states as 2.5-degree latitude bands within a country; municipalities as
    # 2-degree longitude blocks within a state
    band = np.floor((lat - 14.0) / 2.5).astype(int)
    block = np.floor((lon + 118.0) / 2.0).astype(int)
    for i in np.flatnonzero(land):
        admin1[i] = f"{country[i]}-S{band[i]:02d}"
        admin2[i] = f"{admin1[i]}-M{block[i]:02d}"
    return spec, RegionMap(grid=spec, country=country, region=region,
                           admin1=admin1, admin2=admin2, land=land)


def build_world_lite_grid() -> tuple[GridSpec, RegionMap]:
    """Coarse 2-degree grid with 12 macro-region 'countries' for global
    aggregation exercises."""
    spec = GridSpec(lat_min=-60.0, lat_max=84.0, lon_min=-180.0, lon_max=180.0,
                    resolution=2.0)
    lat, lon = spec.cell_center(np.arange(spec.n_cells))
    rng = stream(7, 0, "world-lite-land")
    # blocky pseudo-continents: land probability higher in a few lat/lon boxes
    boxes = ((-35, 12, -82, -34), (8, 70, -125, -55), (35, 70, -10, 60),
             (-35, 35, -18, 50), (5, 75, 60, 145), (-45, -10, 112, 155))
    p = np.full(spec.n_cells, 0.02)
    for (la0, la1, lo0, lo1) in boxes:
        p[(lat >= la0) & (lat <= la1) & (lon >= lo0) & (lon <= lo1)] = 0.85
    land = rng.random(spec.n_cells) < p
    region = np.full(spec.n_cells, WATER, dtype=object)
    lam = (lon < -30) & (lat < 12)
    usa = (lon < -30) & (lat >= 12)
    weu = (lon >= -30) & (lon < 30) & (lat >= 35)
    afr = (lon >= -30) & (lon < 60) & (lat < 35)
    rus = (lon >= 30) & (lat >= 55)
    chn = (lon >= 60) & (lon < 145) & (lat >= 20) & (lat < 55)
    ind = (lon >= 60) & (lon < 95) & (lat < 20)
    for mask, code in ((lam, "LAM"), (usa, "USA"), (weu, "WEU"), (afr, "AFR"),
                       (rus, "RUS"), (chn, "CHN"), (ind, "IND")):
        region[land & mask] = code
    rest = land & (region == WATER)
    rest_codes = np.array(["MEA", "OAS", "EEU", "JPN", "OHI"], dtype=object)
    region[rest] = rest_codes[np.flatnonzero(rest) % len(rest_codes)]
    admin1 = np.full(spec.n_cells, WATER, dtype=object)
    admin2 = np.full(spec.n_cells, WATER, dtype=object)
    admin1[land] = region[land]
    admin2[land] = region[land]
    return spec, RegionMap(grid=spec, country=region.copy(), region=region,
                           admin1=admin1, admin2=admin2, land=land)


# --- emissions proxies -------------------------------------------------------

MEX_CO2_SHARE = 0.014  # Mexico's share of global CO2 emissions


def _ramp(v0, v1, shape=1.0):
    f = ((YEARS - YEAR_START) / (YEAR_END - YEAR_START)) ** shape
    return v0 + (v1 - v0) * f


def emissions_series(scenario: str) -> dict:
    """Annual emissions proxies for CP, B2, DT, and FR."""
    cp = {
        "co2": _ramp(8.0, 10.0, 1.1),
        "ch4": _ramp(330.0, 460.0),
        "n2o": _ramp(7.0, 9.5),
        "other": _ramp(0.0, 0.25),
    }
    if scenario == "CP":
        return cp
    b2 = {
        "co2": np.clip(_ramp(8.0, -4.0), 0.0, None),  # zero from about 2070
        "ch4": _ramp(330.0, 180.0),
        "n2o": _ramp(7.0, 5.5),
        "other": _ramp(0.0, 0.05),
    }
    if scenario == "B2":
        return b2
    if scenario == "FR":
        # Mexico stays on CP while the rest of the world follows B2
        return {
            key: b2[key] + (MEX_CO2_SHARE * (cp[key] - b2[key]) if key == "co2" else 0.0)
            for key in cp
        }
    if scenario == "DT":
        # late transition: CP until 2030, then decline to the B2 endpoint
        w = np.clip((YEARS - 2030) / 25.0, 0.0, 1.0)
        return {key: (1 - w) * cp[key] + w * b2[key] for key in cp}
    raise ValueError(f"unknown scenario {scenario!r}")


def write_emissions(path, scenario: str) -> None:
    e = emissions_series(scenario)
    with open(path, "w") as f:
        f.write("year,co2_gtc,ch4_mt,n2o_mt,other_wm2\n")
        for i, y in enumerate(YEARS):
            f.write(f"{y},{e['co2'][i]:.6f},{e['ch4'][i]:.4f},"
                    f"{e['n2o'][i]:.4f},{e['other'][i]:.4f}\n")


# --- socioeconomics ----------------------------------------------------------

NATIONAL_2010 = {
    # country: (GDP US$2005, population, gdp growth/yr, pop growth/yr)
    "MEX": (1.348e12, 114.0e6, 0.0200, 0.009),
    "USA": (0.180e12, 6.0e6, 0.0180, 0.008),   # in-grid border strip only
    "GTM": (0.040e12, 14.5e6, 0.0250, 0.014),
}


def write_national(path) -> None:
    # growth rates taper linearly to 60% of their 2010 value by 2100
    taper = 0.6 + 0.4 * (1 - np.arange(N_YEARS) / (N_YEARS - 1))
    with open(path, "w") as f:
        f.write("country,year,gdp_usd2005,pop\n")
        for c, (gdp0, pop0, g, p) in sorted(NATIONAL_2010.items()):
            gdp = gdp0 * np.cumprod(np.concatenate([[1.0], 1 + g * taper[:-1]]))
            pop = pop0 * np.cumprod(np.concatenate([[1.0], 1 + p * taper[:-1]]))
            for i, y in enumerate(YEARS):
                f.write(f"{c},{y},{gdp[i]:.6e},{pop[i]:.6e}\n")


def _city_population(lat, lon, year_index: int) -> np.ndarray:
    pop = np.zeros(len(lat))
    for (clat, clon, base, growth) in CITIES:
        d2 = (lat - clat) ** 2 + (lon - clon) ** 2
        pop += base * (1 + growth) ** year_index * np.exp(-d2 / 0.18)
    return pop


def build_share_grids(spec: GridSpec, rmap: RegionMap):
    """Base (2010) and target (2100) GDP/population share patterns.

    Shares concentrate further into cities by 2100.
    """
    lat, lon = spec.cell_center(np.arange(spec.n_cells))
    rural = np.where(rmap.land, 1.0, 0.0)
    pop_base = (_city_population(lat, lon, 0) + 2.0e5 * rural) * rmap.land
    pop_target = (_city_population(lat, lon, 90) + 1.2e5 * rural) * rmap.land
    gdp_base = pop_base ** 1.08
    gdp_target = pop_target ** 1.12
    out = {}
    for name, raw in (("pop_base", pop_base), ("pop_target", pop_target),
                      ("gdp_base", gdp_base), ("gdp_target", gdp_target)):
        shares = np.zeros(spec.n_cells)
        for c in np.unique(rmap.country[rmap.land]):
            mask = rmap.land & (rmap.country == c)
            total = raw[mask].sum()
            shares[mask] = raw[mask] / total
        out[name] = shares
    return out


def write_shares(path, gdp_shares, pop_shares) -> None:
    with open(path, "w") as f:
        f.write("cell,gdp_share,pop_share\n")
        for i in range(len(gdp_shares)):
            f.write(f"{i},{gdp_shares[i]:.12e},{pop_shares[i]:.12e}\n")


# --- patterns ----------------------------------------------------------------

def build_patterns(spec: GridSpec, rmap: RegionMap, n_patterns: int = 8,
                   seed: int = 1234):
    """Synthetic emulated-model patterns: mild latitudinal amplification in
    temperature, subtropical drying in precipitation, area-normalized so the
    weighted mean temperature scaling is exactly 1."""
    lat, _ = spec.cell_center(np.arange(spec.n_cells))
    areas = spec.cell_areas()
    lat_norm = (lat - lat.mean()) / (lat.max() - lat.min())
    patterns = []
    for k in range(n_patterns):
        rng = stream(seed, k, "pattern-synth")
        amp = 0.15 + 0.25 * rng.random()           # polar amplification slope
        noise = rng.normal(0.0, 0.03, spec.n_cells)
        t_scale = 1.0 + amp * lat_norm + noise
        t_scale = np.maximum(t_scale, 0.2)
        t_scale = t_scale * (areas.sum() / np.sum(t_scale * areas))
        dry = -(3.5 + 3.0 * rng.random())          # % per degC, drying core
        p_scale = dry * (0.5 + 0.8 * np.exp(-((lat - 26.0) ** 2) / 40.0))
        p_scale = p_scale + rng.normal(0.0, 0.4, spec.n_cells)
        patterns.append((f"P{k:02d}", t_scale, p_scale))
    return patterns


def write_pattern(path, pattern_id: str, t_scale, p_scale) -> None:
    with open(path, "w") as f:
        f.write("cell,t_scale,p_scale,pattern\n")
        for i in range(len(t_scale)):
            f.write(f"{i},{t_scale[i]:.8f},{p_scale[i]:.8f},{pattern_id}\n")


# --- damage calibrations -------------------------------------------------------

RICE_THETA = {
    "USA": (0.0000, 0.0020), "WEU": (0.0002, 0.0022), "JPN": (0.0001, 0.0019),
    "RUS": (0.0000, 0.0015), "EEU": (0.0001, 0.0020), "CHN": (0.0003, 0.0024),
    "IND": (0.0008, 0.0028), "MEA": (0.0006, 0.0026), "AFR": (0.0010, 0.0030),
    "LAM": (0.0004, 0.0024), "OHI": (0.0001, 0.0018), "OAS": (0.0006, 0.0026),
}

# tuned to sit above the regional quadratics on 1-4 degC
KW_B = {r: (t1 + 0.006, t2 + 0.002) for r, (t1, t2) in RICE_THETA.items()}


def build_kompas(spec: GridSpec, rmap: RegionMap) -> np.ndarray:
    """Per-cell kappa from a latitude + GDP-density heuristic: warmer
    (lower-latitude) and denser cells are more sensitive."""
    lat, lon = spec.cell_center(np.arange(spec.n_cells))
    shares = build_share_grids(spec, rmap)["gdp_base"]
    lat_span = max(lat.max() - lat.min(), 1.0)
    heat = (lat.max() - lat) / lat_span            # 0 at the cold edge
    density = shares / max(shares.max(), 1e-30)
    kappa = (0.0012 + 0.0020 * heat + 0.0015 * density) * rmap.land
    return kappa


def write_kompas(path, kappa) -> None:
    with open(path, "w") as f:
        f.write("cell,kappa\n")
        for i in range(len(kappa)):
            f.write(f"{i},{kappa[i]:.8e}\n")


def write_regional_coeffs(path, table: dict, c1: str, c2: str) -> None:
    with open(path, "w") as f:
        f.write(f"region,{c1},{c2}\n")
        for r in sorted(table):
            f.write(f"{r},{table[r][0]:.6f},{table[r][1]:.6f}\n")


DEFAULT_THRESHOLDS = """\
# variable,comparator,level[,window]
dt,>=,3.0,21
dp,<=,-10.0,21
loss_pct,>=,10.0,21
loss_value,>=,1.0e9,21
k_moderate=2
k_high=3
"""


def write_config(path, scenario: str, n_realizations: int, seed: int,
                 workers: int) -> None:
    variants = "K,KU,RU_d,RPU_d,RU_w,RPU_w,KW,KWU"
    with open(path, "w") as f:
        f.write(f"""\
scenario = {scenario}
emissions = ../emissions/{scenario.lower()}.csv
grid = ../grids/demo_mexico.csv
national = ../socio/national.csv
shares_base = ../socio/shares_base.csv
shares_target = ../socio/shares_target.csv
patterns = {','.join(f'../patterns/pattern_{k:02d}.csv' for k in range(8))}
ebm = ../calib/ebm.cfg
carbon = ../calib/carbon.cfg
dice = ../calib/dice.cfg
rice = ../calib/rice.csv
kw = ../calib/kw.csv
kompas = ../calib/kompas.csv
weitzman = ../calib/weitzman.cfg
variants = {variants}
n_realizations = {n_realizations}
seed = {seed}
discount_rate = 0.015
reference_year = 2024
country = MEX
offset_2010 = 1.0
ecs_min = 2.5
ecs_mode = 3.0
ecs_max = 4.0
rho = 0.5
workers = {workers}
""")


def generate(out_dir, seed: int = 1234, n_realizations: int = 100,
             workers: int = 4) -> None:
    """Write the complete demo asset set under `out_dir`."""
    for sub in ("grids", "emissions", "socio", "patterns", "calib",
                "thresholds", "configs"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)

    spec, rmap = build_demo_grid()
    save_grid(os.path.join(out_dir, "grids", "demo_mexico.csv"), spec, rmap)
    wspec, wmap = build_world_lite_grid()
    save_grid(os.path.join(out_dir, "grids", "world_lite.csv"), wspec, wmap)

    for scenario in ("CP", "B2", "DT", "FR"):
        write_emissions(os.path.join(out_dir, "emissions", f"{scenario.lower()}.csv"),
                        scenario)

    write_national(os.path.join(out_dir, "socio", "national.csv"))
    shares = build_share_grids(spec, rmap)
    write_shares(os.path.join(out_dir, "socio", "shares_base.csv"),
                 shares["gdp_base"], shares["pop_base"])
    write_shares(os.path.join(out_dir, "socio", "shares_target.csv"),
                 shares["gdp_target"], shares["pop_target"])

    for k, (pid, t_scale, p_scale) in enumerate(build_patterns(spec, rmap, seed=seed)):
        write_pattern(os.path.join(out_dir, "patterns", f"pattern_{k:02d}.csv"),
                      pid, t_scale, p_scale)

    calib = os.path.join(out_dir, "calib")
    with open(os.path.join(calib, "ebm.cfg"), "w") as f:
        f.write("c_surface = 7.3\nc_deep = 91.0\nexchange = 1.3\n")
    with open(os.path.join(calib, "carbon.cfg"), "w") as f:
        f.write("co2_pool_fractions = 0.15,0.30,0.55\n"
                "co2_pool_lifetimes = inf,70,10\n"
                "ch4_lifetime = 11.8\nn2o_lifetime = 121.0\n")
    with open(os.path.join(calib, "dice.cfg"), "w") as f:
        f.write("a = 0.00236\n")
    with open(os.path.join(calib, "weitzman.cfg"), "w") as f:
        f.write("c1 = 20.46\nc2 = 6.081\np = 6.754\n")
    write_regional_coeffs(os.path.join(calib, "rice.csv"), RICE_THETA,
                          "theta1", "theta2")
    write_regional_coeffs(os.path.join(calib, "kw.csv"), KW_B, "b1", "b2")
    write_kompas(os.path.join(calib, "kompas.csv"), build_kompas(spec, rmap))

    with open(os.path.join(out_dir, "thresholds", "default.csv"), "w") as f:
        f.write(DEFAULT_THRESHOLDS)

    for scenario in ("CP", "B2", "DT", "FR"):
        write_config(os.path.join(out_dir, "configs", f"{scenario.lower()}.cfg"),
                     scenario, n_realizations, 42, workers)
