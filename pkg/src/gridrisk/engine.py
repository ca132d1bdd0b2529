"""Monte Carlo ensemble orchestration: scenario -> climate -> damages,
with deterministic seeding, persistence, and summary reporting."""

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import N_YEARS, YEAR_END, YEAR_START
from .climate import (
    ClimateField, EcsDistribution, concentrations, forcing, load_carbon_params,
    load_ebm_params, load_pattern, pattern_scale, sample_ecs,
    simulate_global_temperature, uhi_increment,
)
from .damage import DamageSpec, DamageParams, canonical_variant, evaluate_series, load_damage_params
from .grid import RegionMap, load_grid, lookup_cells
from .metrics import LossSeries, present_value, relative_pv
from .rng import stream
from .scenario import build_scenario, load_emissions, load_national_series, load_shares, SocioScenario
from .store import RunStore

DEFAULT_VARIANTS = ("K", "KU", "RU_d", "RPU_d", "RU_w", "RPU_w", "KW", "KWU")


class ConfigError(ValueError):
    pass


class EngineError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    emissions: str
    grid: str
    national: str
    shares_base: str
    shares_target: str
    patterns: tuple          # pattern file paths
    ebm: str
    carbon: str
    dice: str
    rice: str
    kw: str
    kompas: str
    weitzman: str
    variants: tuple = DEFAULT_VARIANTS
    n_realizations: int = 500
    seed: int = 42
    discount_rate: float = 0.015
    reference_year: int = 2024
    country: str = "MEX"
    urban_threshold: float = 1_000_000.0
    offset_2010: float = 1.0
    ecs_min: float = 2.5
    ecs_mode: float = 3.0
    ecs_max: float = 4.0
    rho: float = 0.5
    uhi_alpha: float = 1.0
    uhi_beta: float = 5.0
    store_cell_fields: bool = True
    workers: int = 1

    _PATH_FIELDS = ("emissions", "grid", "national", "shares_base", "shares_target",
                    "ebm", "carbon", "dice", "rice", "kw", "kompas", "weitzman")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        base = os.path.dirname(os.path.abspath(path))
        kv = {}
        with open(path) as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, _, value = line.partition("=")
                kv[key.strip()] = value.strip()

        def resolve(p):
            return p if os.path.isabs(p) else os.path.join(base, p)

        try:
            patterns = tuple(resolve(p.strip()) for p in kv["patterns"].split(","))
            args = dict(
                scenario=kv["scenario"],
                emissions=resolve(kv["emissions"]),
                grid=resolve(kv["grid"]),
                national=resolve(kv["national"]),
                shares_base=resolve(kv["shares_base"]),
                shares_target=resolve(kv["shares_target"]),
                patterns=patterns,
                ebm=resolve(kv["ebm"]),
                carbon=resolve(kv["carbon"]),
                dice=resolve(kv["dice"]),
                rice=resolve(kv["rice"]),
                kw=resolve(kv["kw"]),
                kompas=resolve(kv["kompas"]),
                weitzman=resolve(kv["weitzman"]),
            )
        except KeyError as e:
            raise ConfigError(f"{path}: missing required key {e.args[0]!r}")
        if "variants" in kv:
            args["variants"] = tuple(v.strip() for v in kv["variants"].split(","))
        for key, cast in (
            ("n_realizations", int), ("seed", int), ("discount_rate", float),
            ("reference_year", int), ("country", str), ("urban_threshold", float),
            ("offset_2010", float), ("ecs_min", float), ("ecs_mode", float),
            ("ecs_max", float), ("rho", float), ("uhi_alpha", float),
            ("uhi_beta", float), ("workers", int),
        ):
            if key in kv:
                args[key] = cast(kv[key])
        if "store_cell_fields" in kv:
            args["store_cell_fields"] = kv["store_cell_fields"] not in ("0", "false", "no")
        return cls(**args)

    def content_hash(self) -> str:
        parts = []
        for name in sorted(self.__dataclass_fields__):
            if name.startswith("_") or name == "workers":
                continue
            parts.append(f"{name}={getattr(self, name)}")
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()


def validate_config(config: RunConfig) -> list:
    """Cross-reference checks. An empty list means ok; diagnostics name the
    offending field or file."""
    diags = []
    if config.n_realizations < 1:
        diags.append("n_realizations: must be >= 1")
    for variant in config.variants:
        try:
            canonical_variant(variant)
        except Exception as e:
            diags.append(f"variants: {e}")
    for name in RunConfig._PATH_FIELDS:
        path = getattr(config, name)
        if not os.path.exists(path):
            diags.append(f"{name}: file not found: {path}")
    for p in config.patterns:
        if not os.path.exists(p):
            diags.append(f"patterns: file not found: {p}")
    try:
        EcsDistribution(config.ecs_min, config.ecs_mode, config.ecs_max)
    except Exception as e:
        diags.append(f"ecs: {e}")
    return diags


def _load_inputs(config: RunConfig):
    spec, rmap = load_grid(config.grid)
    emissions = load_emissions(config.emissions, config.scenario)
    countries, years, gdp, pop = load_national_series(config.national)
    gsb, psb = load_shares(config.shares_base, spec)
    gst, pst = load_shares(config.shares_target, spec)
    socio = SocioScenario(
        grid=spec, countries=countries, years=years, gdp=gdp, population=pop,
        gdp_shares_base=gsb, gdp_shares_target=gst,
        pop_shares_base=psb, pop_shares_target=pst,
    )
    bundle = build_scenario(spec, rmap, emissions, socio, config.urban_threshold)
    patterns = [load_pattern(p, spec) for p in config.patterns]
    areas = spec.cell_areas()
    for pat in patterns:
        pat.validate(rmap.land, areas)
    ebm = load_ebm_params(config.ebm)
    carbon = load_carbon_params(config.carbon)
    dparams = load_damage_params(config.dice, config.rice, config.kw,
                                 config.kompas, config.weitzman, spec)
    return bundle, patterns, ebm, carbon, dparams


def run_ensemble(config: RunConfig, out_dir, workers: int = None) -> RunStore:
    """Run the full ensemble and persist it to `out_dir`.

    Each realization draws (ECS, pattern) from its own counter-based
    stream, so output is independent of execution order and worker count.
    """
    diags = validate_config(config)
    if diags:
        raise ConfigError("; ".join(diags))
    workers = workers or config.workers
    bundle, patterns, ebm, carbon, dparams = _load_inputs(config)
    spec = bundle.grid
    years = bundle.socio.years
    n_years, n_cells, n_real = len(years), spec.n_cells, config.n_realizations

    conc = concentrations(bundle.emissions, carbon)
    total_forcing = forcing(conc, bundle.emissions.other_forcing)
    # boxes start at rest in the base year; offset_2010 carries pre-2010 warming
    forcing_anom = total_forcing - total_forcing[0]
    ecs_dist = EcsDistribution(config.ecs_min, config.ecs_mode, config.ecs_max)

    uhi = uhi_increment(bundle.urban.population, bundle.urban.urban,
                        config.uhi_alpha, config.uhi_beta)

    store = RunStore.create(out_dir, {
        "run_id": os.path.basename(os.path.normpath(out_dir)),
        "scenario": config.scenario,
        "config_hash": config.content_hash(),
        "n_realizations": n_real,
        "year_start": int(years[0]),
        "year_end": int(years[-1]),
        "variants": ",".join(config.variants),
        "country": config.country,
        "discount_rate": config.discount_rate,
        "reference_year": config.reference_year,
        "code_version": _code_version(),
    })
    src = _write_config_copy(config, out_dir)
    store.add_file("config.cfg", src)
    os.remove(src)
    store.add_file("grid.csv", config.grid)

    global_dt = store.allocate("global_dt", (n_real, n_years), "f8", "degC")
    ecs_draws = store.allocate("ecs", (n_real,), "f8", "degC")
    pattern_ids = store.allocate("pattern_index", (n_real,), "i4", "index")
    store.put("gdp", bundle.gdp.astype("f8"), "US$2005")
    store.put("population", bundle.population.astype("f8"), "persons")
    store.put("uhi", uhi.astype("f4"), "degC")
    cell_dt = cell_dp = None
    loss = {}
    if config.store_cell_fields:
        cell_dt = store.allocate("cell_dt", (n_real, n_years, n_cells), "f4", "degC")
        cell_dp = store.allocate("cell_dp", (n_real, n_years, n_cells), "f4", "%")
        for v in config.variants:
            vid = canonical_variant(v)
            loss[vid] = store.allocate(f"loss_frac__{vid}", (n_real, n_years, n_cells),
                                       "f4", "fraction")

    def one_realization(r: int):
        ecs = sample_ecs(ecs_dist, stream(config.seed, r, "ecs"))
        pidx = int(stream(config.seed, r, "pattern").integers(len(patterns)))
        path = simulate_global_temperature(
            forcing_anom, ecs, years, offset_2010=config.offset_2010,
            params=ebm, realization=r, pattern_id=patterns[pidx].pattern_id,
        )
        global_dt[r] = path.delta_t
        ecs_draws[r] = ecs
        pattern_ids[r] = pidx
        if not config.store_cell_fields:
            return
        clim = pattern_scale(path, patterns[pidx])
        clim = ClimateField(grid=spec, years=clim.years, delta_t=clim.delta_t,
                            delta_p=clim.delta_p, uhi=uhi)
        cell_dt[r] = clim.delta_t
        cell_dp[r] = clim.delta_p
        for v in config.variants:
            vid = canonical_variant(v)
            result = evaluate_series(DamageSpec(vid, rho=config.rho), clim,
                                     bundle.gdp, path.delta_t,
                                     bundle.region_map, dparams)
            loss[vid][r] = result.fraction

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one_realization, range(n_real)))
    else:
        for r in range(n_real):
            one_realization(r)

    store.finalize()
    return store


def _write_config_copy(config: RunConfig, out_dir) -> str:
    tmp = os.path.join(out_dir, "_config_src.tmp")
    os.makedirs(out_dir, exist_ok=True)
    with open(tmp, "w") as f:
        for name in sorted(config.__dataclass_fields__):
            if name.startswith("_"):
                continue
            value = getattr(config, name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            f.write(f"{name} = {value}\n")
    return tmp


def _code_version() -> str:
    from . import __version__
    return __version__


# --- store queries -----------------------------------------------------------

def store_grid(store: RunStore):
    return load_grid(os.path.join(store.path, "grid.csv"))


def national_loss_ensemble(store: RunStore, variant: str,
                           country: str = None) -> tuple[np.ndarray, np.ndarray]:
    """(losses, gdp): per-realization national annual dollar losses
    (n_realizations, n_years) and the national GDP series (n_years,)."""
    vid = canonical_variant(variant)
    spec, rmap = store_grid(store)
    country = country or store.meta.get("country")
    cells = lookup_cells(rmap, "country", country)
    gdp = np.asarray(store.load("gdp"))[:, cells]
    frac = np.asarray(store.load(f"loss_frac__{vid}"))[:, :, cells].astype("f8")
    losses = np.einsum("rtc,tc->rt", frac, gdp)
    return losses, gdp.sum(axis=1)


def reference_gdp(store: RunStore, country: str = None) -> float:
    country = country or store.meta.get("country")
    ref_year = int(store.meta.get("reference_year", 2024))
    spec, rmap = store_grid(store)
    cells = lookup_cells(rmap, "country", country)
    years = store.years()
    t = int(np.flatnonzero(years == ref_year)[0])
    return float(np.asarray(store.load("gdp"))[t, cells].sum())


def pv_percentiles(store: RunStore, variant: str, rate: float = None,
                   country: str = None) -> dict:
    """Median and 5th/95th percentile present values of national losses."""
    rate = rate if rate is not None else float(store.meta["discount_rate"])
    losses, gdp = national_loss_ensemble(store, variant, country)
    years = store.years()
    pvs = np.array([
        present_value(LossSeries(years, row, gdp), rate) for row in losses
    ])
    ref = reference_gdp(store, country)
    out = {
        "central": float(np.quantile(pvs, 0.5)),
        "p5": float(np.quantile(pvs, 0.05)),
        "p95": float(np.quantile(pvs, 0.95)),
        "reference_gdp": ref,
    }
    out["relative"] = relative_pv(out["central"], ref)
    out["relative_p5"] = relative_pv(out["p5"], ref)
    out["relative_p95"] = relative_pv(out["p95"], ref)
    return out


def pv_table(stores: dict, variants=None, rate: float = None,
             country: str = None) -> dict:
    """Table-shaped PV report: one row per scenario label plus an
    avoided-losses row 'AL' = CP - B2 when both scenarios are present.

    Returns {row_label: {variant: pv_percentiles-dict}}.
    """
    first = next(iter(stores.values()))
    if variants is None:
        variants = first.meta["variants"].split(",")
    rows = {}
    for label, store in stores.items():
        rows[label] = {v: pv_percentiles(store, v, rate, country) for v in variants}
    if "CP" in rows and "B2" in rows:
        al = {}
        for v in variants:
            cp, b2 = rows["CP"][v], rows["B2"][v]
            al[v] = {
                key: cp[key] - b2[key]
                for key in ("central", "p5", "p95", "relative", "relative_p5", "relative_p95")
            }
            al[v]["reference_gdp"] = cp["reference_gdp"]
        rows["AL"] = al
    return rows


def format_pv_table(table: dict, fmt: str = "csv") -> str:
    """Emit the PV table as CSV or aligned text: central [relative]
    (5th, 95th) [relative 5th, 95th] per variant x scenario."""
    variants = list(next(iter(table.values())).keys())
    lines = []
    if fmt == "csv":
        lines.append("scenario," + ",".join(
            f"{v}_central,{v}_relative,{v}_p5,{v}_p95,{v}_rel5,{v}_rel95" for v in variants
        ))
        for label, row in table.items():
            cells = []
            for v in variants:
                e = row[v]
                cells.append(
                    f"{e['central']:.6g},{e['relative']:.4g},{e['p5']:.6g},"
                    f"{e['p95']:.6g},{e['relative_p5']:.4g},{e['relative_p95']:.4g}"
                )
            lines.append(f"{label}," + ",".join(cells))
    elif fmt == "text":
        lines.append(" ".ljust(9) + "  ".join(v.ljust(30) for v in variants))
        for label, row in table.items():
            cells = []
            for v in variants:
                e = row[v]
                cells.append(
                    f"{e['central']:.4g} [{e['relative']:.3g}] "
                    f"({e['p5']:.4g}, {e['p95']:.4g})".ljust(30)
                )
            lines.append(label.ljust(9) + "  ".join(cells))
    else:
        raise EngineError(f"unknown format {fmt!r}")
    return "\n".join(lines) + "\n"


def cell_series(store: RunStore, variable: str, variant: str = None) -> np.ndarray:
    """(n_realizations, n_years, n_cells) series for a risk variable."""
    if variable == "dt":
        return np.asarray(store.load("cell_dt"))
    if variable == "dp":
        return np.asarray(store.load("cell_dp"))
    if variable in ("loss_pct", "loss_value"):
        if variant is None:
            raise EngineError(f"variable {variable!r} needs a damage variant")
        vid = canonical_variant(variant)
        frac = np.asarray(store.load(f"loss_frac__{vid}"), dtype="f8")
        if variable == "loss_pct":
            return 100.0 * frac
        gdp = np.asarray(store.load("gdp"))
        return frac * gdp[None, :, :]
    raise EngineError(f"unknown risk variable {variable!r}")


# --- risk maps (shared by the CLI exporter and the HTTP service) -------------

RISK_LAYERS = ("moderate_dates", "moderate_prob", "high_dates", "high_prob")


def compute_risk_maps(store: RunStore, index_spec, variant: str = None) -> dict:
    """Evaluate a risk-index spec against a run store.

    Returns {"moderate": ExceedanceMap, "high": ExceedanceMap}. Loss-based
    thresholds read the given damage variant (default: the run's first)."""
    from .risk import risk_level_map

    if variant is None:
        variant = store.meta["variants"].split(",")[0]
    needed = {th.variable for th in index_spec.thresholds}
    series = {v: cell_series(store, v, variant) for v in needed}
    return risk_level_map(series, index_spec, store.years())


def risk_map_rasters(store: RunStore, maps: dict) -> dict:
    """Per-layer raster bytes for a computed risk map, keyed by RISK_LAYERS."""
    from .store import raster_bytes

    spec, _ = store_grid(store)
    years = store.years()
    y0, y1 = int(years[0]), int(years[-1])
    out = {}
    for level in ("moderate", "high"):
        emap = maps[level]
        out[f"{level}_dates"] = raster_bytes(
            spec, f"{level}_dates", y0, y1, emap.years.astype("f8"))
        out[f"{level}_prob"] = raster_bytes(
            spec, f"{level}_prob", y0, y1, emap.probability.astype("f8"))
    return out
