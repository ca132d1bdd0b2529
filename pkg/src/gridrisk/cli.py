"""Command-line entry point: run ensembles, emit reports, export maps,
compute risk indices, serve the HTTP API, and generate demo data.

Exit codes: 0 ok, 2 usage/config error, 3 runtime error. Diagnostics go to
stderr; stdout carries data only when a --format/--out option asks for it.
The GRIDRISK_DATA environment variable supplies the default data directory.
"""

import os
import sys
from dataclasses import replace

import click
import numpy as np

from .engine import (
    ConfigError, EngineError, RunConfig, cell_series, compute_risk_maps,
    format_pv_table, pv_table, risk_map_rasters, run_ensemble, store_grid,
    national_loss_ensemble, reference_gdp,
)
from .grid import GridError
from .metrics import LossSeries, relative_risk_change, rolling_pv
from .risk import RiskError, load_thresholds, percentile_field
from .scenario import ScenarioError
from .store import RunStore, StoreError, write_raster

DATA_ENV = "GRIDRISK_DATA"

_CONFIG_ERRORS = (ConfigError, ScenarioError, GridError, RiskError, ValueError)
_RUNTIME_ERRORS = (EngineError, StoreError, OSError, RuntimeError)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _open_store(run_dir) -> RunStore:
    try:
        return RunStore.open(run_dir)
    except _CONFIG_ERRORS + _RUNTIME_ERRORS as e:
        _fail(2, f"cannot open run {run_dir}: {e}")


@click.group()
def main():
    """Spatial climate risk engine."""


@main.command("run")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False), help="run config file")
@click.option("--scenario", default=None, help="override the config's scenario id")
@click.option("--realizations", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
def run_cmd(config_path, scenario, realizations, seed, workers, out_dir):
    """Run a Monte Carlo ensemble and persist it under --out."""
    if not os.path.exists(config_path):
        _fail(2, f"config file not found: {config_path}")
    try:
        config = RunConfig.from_file(config_path)
        overrides = {}
        if scenario is not None and scenario != config.scenario:
            # scenario override remaps to the sibling emissions pathway file
            emissions = os.path.join(os.path.dirname(config.emissions),
                                     f"{scenario.lower()}.csv")
            if not os.path.exists(emissions):
                _fail(2, f"unknown scenario {scenario!r}: no pathway at {emissions}")
            overrides["scenario"] = scenario
            overrides["emissions"] = emissions
        if realizations is not None:
            overrides["n_realizations"] = realizations
        if seed is not None:
            overrides["seed"] = seed
        if workers is not None:
            overrides["workers"] = workers
        if overrides:
            config = replace(config, **overrides)
        from .engine import validate_config
        diags = validate_config(config)
        if diags:
            for d in diags:
                click.echo(f"config: {d}", err=True)
            sys.exit(2)
    except _CONFIG_ERRORS as e:
        _fail(2, str(e))
    try:
        run_ensemble(config, out_dir)
    except _CONFIG_ERRORS as e:
        _fail(2, str(e))
    except _RUNTIME_ERRORS as e:
        _fail(3, str(e))
    click.echo(f"run complete: {out_dir}", err=True)


@main.command("report")
@click.option("--run", "run_dirs", multiple=True, required=True,
              type=click.Path(exists=True), help="run directory (repeatable)")
@click.option("--metric", type=click.Choice(["pv", "pct", "rolling", "risk-ratio"]),
              default="pv")
@click.option("--variant", default=None, help="damage variant (pct/rolling/risk-ratio)")
@click.option("--discount", type=float, default=None, help="annual discount rate")
@click.option("--window", type=int, default=5, help="rolling window, years")
@click.option("--format", "fmt", type=click.Choice(["csv", "text"]), default="csv")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="write to file instead of stdout")
def report_cmd(run_dirs, metric, variant, discount, window, fmt, out_path):
    """Emit metric tables: present values, %GDP losses, rolling PVs,
    or relative risk-change ratios."""
    stores = {}
    for d in run_dirs:
        store = _open_store(d)
        stores[store.meta["scenario"]] = store
    try:
        text = _render_report(stores, metric, variant, discount, window, fmt)
    except _CONFIG_ERRORS as e:
        _fail(2, str(e))
    except _RUNTIME_ERRORS as e:
        _fail(3, str(e))
    if out_path:
        with open(out_path, "w") as f:
            f.write(text)
        click.echo(f"wrote {out_path}", err=True)
    else:
        click.echo(text, nl=False)


def _national_median_losses(store, variant):
    losses, gdp = national_loss_ensemble(store, variant)
    return np.median(losses, axis=0), gdp


def _render_report(stores, metric, variant, discount, window, fmt):
    first = next(iter(stores.values()))
    if metric == "pv":
        return format_pv_table(pv_table(stores, rate=discount), fmt)
    if variant is None:
        variant = first.meta["variants"].split(",")[0]
    rate = discount if discount is not None else float(first.meta["discount_rate"])
    lines = []
    if metric == "pct":
        lines.append("year," + ",".join(f"{label}_pct_gdp" for label in stores))
        years = first.years()
        cols = []
        for store in stores.values():
            med, gdp = _national_median_losses(store, variant)
            cols.append(100.0 * med / gdp)
        for i, y in enumerate(years):
            lines.append(f"{y}," + ",".join(f"{c[i]:.6g}" for c in cols))
    elif metric == "rolling":
        lines.append("start_year," + ",".join(f"{label}_pv" for label in stores))
        out_cols, start_years = [], None
        for store in stores.values():
            med, gdp = _national_median_losses(store, variant)
            start_years, vals = rolling_pv(
                LossSeries(store.years(), med, gdp), rate, window)
            out_cols.append(vals)
        for i, y in enumerate(start_years):
            lines.append(f"{y}," + ",".join(f"{c[i]:.6g}" for c in out_cols))
    elif metric == "risk-ratio":
        lines.append("start_year," + ",".join(f"{label}_ratio" for label in stores))
        out_cols, start_years = [], None
        for store in stores.values():
            med, gdp = _national_median_losses(store, variant)
            sy, vals = rolling_pv(LossSeries(store.years(), med, gdp), rate, window)
            base = int(store.meta.get("reference_year", 2024))
            start_years, ratios = relative_risk_change(sy, vals, base_year=base)
            out_cols.append(ratios)
        for i, y in enumerate(start_years):
            lines.append(f"{y}," + ",".join(f"{c[i]:.6g}" for c in out_cols))
    return "\n".join(lines) + "\n"


@main.command("risk-index")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True))
@click.option("--thresholds", "thresholds_path", required=True,
              type=click.Path(exists=False))
@click.option("--k-moderate", type=int, default=None)
@click.option("--k-high", type=int, default=None)
@click.option("--variant", default=None, help="damage variant for loss thresholds")
@click.option("--out", "out_dir", required=True, type=click.Path())
def risk_index_cmd(run_dir, thresholds_path, k_moderate, k_high, variant, out_dir):
    """Compute moderate/high risk-level maps and export them as rasters."""
    store = _open_store(run_dir)
    if not os.path.exists(thresholds_path):
        _fail(2, f"thresholds file not found: {thresholds_path}")
    try:
        spec = load_thresholds(thresholds_path)
        if k_moderate is not None or k_high is not None:
            from .risk import RiskIndexSpec
            spec = RiskIndexSpec(
                thresholds=spec.thresholds,
                k_moderate=k_moderate if k_moderate is not None else spec.k_moderate,
                k_high=k_high if k_high is not None else spec.k_high,
            )
    except _CONFIG_ERRORS as e:
        _fail(2, str(e))
    try:
        maps = compute_risk_maps(store, spec, variant)
        rasters = risk_map_rasters(store, maps)
    except _CONFIG_ERRORS as e:
        _fail(2, str(e))
    except _RUNTIME_ERRORS as e:
        _fail(3, str(e))
    os.makedirs(out_dir, exist_ok=True)
    for layer, blob in rasters.items():
        path = os.path.join(out_dir, f"risk_{layer}.grdx")
        with open(path, "wb") as f:
            f.write(blob)
        click.echo(f"wrote {path}", err=True)


@main.command("map-export")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True))
@click.option("--variable", required=True,
              type=click.Choice(["dt", "dp", "loss_pct", "loss_value"]))
@click.option("--variant", default=None)
@click.option("--year", type=int, required=True)
@click.option("--quantile", type=float, default=50.0, help="ensemble percentile")
@click.option("--out", "out_path", required=True, type=click.Path())
def map_export_cmd(run_dir, variable, variant, year, quantile, out_path):
    """Export a per-cell ensemble-percentile field for one year as a raster."""
    store = _open_store(run_dir)
    years = store.years()
    if not (years[0] <= year <= years[-1]):
        _fail(2, f"year {year} outside run range {years[0]}-{years[-1]}")
    if not (0.0 <= quantile <= 100.0):
        _fail(2, f"quantile {quantile} outside [0, 100]")
    try:
        series = cell_series(store, variable, variant)
        t = int(np.flatnonzero(years == year)[0])
        values = percentile_field(series[:, t, :], quantile / 100.0)
        spec, _ = store_grid(store)
        write_raster(out_path, spec, f"{variable}_q{quantile:g}", year, year,
                     values.astype("f8"))
    except _CONFIG_ERRORS as e:
        _fail(2, str(e))
    except _RUNTIME_ERRORS as e:
        _fail(3, str(e))
    click.echo(f"wrote {out_path}", err=True)


@main.command("serve")
@click.option("--mount", "mounts", multiple=True, type=click.Path(exists=True),
              help="directory of run stores (repeatable); default $GRIDRISK_DATA")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8765)
def serve_cmd(mounts, host, port):
    """Serve mounted run stores over HTTP (read-only)."""
    if not mounts:
        env = os.environ.get(DATA_ENV)
        if not env:
            _fail(2, f"no --mount given and {DATA_ENV} is unset")
        mounts = (env,)
    from .api import create_app
    import uvicorn
    app = create_app(list(mounts))
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("synth-data")
@click.option("--out", "out_dir", default=None, type=click.Path(),
              help="target directory; default $GRIDRISK_DATA")
@click.option("--seed", type=int, default=1234)
@click.option("--realizations", type=int, default=100)
@click.option("--workers", type=int, default=4)
def synth_data_cmd(out_dir, seed, realizations, workers):
    """Generate the self-contained demo asset set (grids, emissions,
    socioeconomic shares, climate patterns, calibration files, configs)."""
    out_dir = out_dir or os.environ.get(DATA_ENV)
    if not out_dir:
        _fail(2, f"no --out given and {DATA_ENV} is unset")
    from .synth import generate
    try:
        generate(out_dir, seed=seed, n_realizations=realizations, workers=workers)
    except OSError as e:
        _fail(3, str(e))
    click.echo(f"demo data written to {out_dir}", err=True)


if __name__ == "__main__":
    main()
