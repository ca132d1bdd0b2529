"""Read-only HTTP service over completed run stores.

Endpoints:
  GET  /runs                                      run descriptors
  GET  /runs/{id}/cells/{cell}/series             quantile time series
  POST /runs/{id}/risk-index                      on-demand risk maps
  GET  /runs/{id}/localities/{admin}/summary      locality metrics

Payloads embed units and the run's config hash so clients can detect stale
caches. Risk-index responses are cached by request hash; the X-Cache header
reports hit/miss and X-Request-Hash carries the key. Stores are never
mutated.
"""

import hashlib
import json
import os
import threading

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel

from .engine import (
    EngineError, cell_series, compute_risk_maps, risk_map_rasters, store_grid,
)
from .grid import GridError, lookup_cells
from .metrics import LossSeries, present_value, relative_pv
from .risk import NO_DATE, RiskError, RiskIndexSpec, RiskThreshold
from .store import RunStore, StoreError

VARIABLE_UNITS = {
    "dt": "degC",
    "dp": "%",
    "loss_pct": "% of GDP",
    "loss_value": "US$2005",
}

DEFAULT_SUMMARY_THRESHOLDS = (
    RiskThreshold("dt", ">=", 3.0, 21),
    RiskThreshold("dp", "<=", -10.0, 21),
    RiskThreshold("loss_pct", ">=", 10.0, 21),
    RiskThreshold("loss_value", ">=", 1.0e9, 21),
)


class ThresholdIn(BaseModel):
    variable: str
    comparator: str
    level: float
    window: int = 21


class RiskIndexRequest(BaseModel):
    thresholds: list[ThresholdIn]
    k_moderate: int = 2
    k_high: int = 3
    variant: str | None = None
    bbox: list[float] | None = None   # lat_min, lat_max, lon_min, lon_max
    format: str = "json"              # "json" or "raster"
    layer: str | None = None          # raster layer, e.g. "moderate_dates"


def _discover_runs(mounts) -> dict:
    runs = {}
    for mount in mounts:
        candidates = [mount] + [os.path.join(mount, d) for d in sorted(os.listdir(mount))]
        for path in candidates:
            if os.path.isfile(os.path.join(path, "manifest.txt")):
                runs[os.path.basename(os.path.normpath(path))] = path
    return runs


def create_app(mounts: list) -> FastAPI:
    app = FastAPI(title="gridrisk", docs_url="/docs")
    run_paths = _discover_runs(mounts)
    stores: dict = {}
    risk_cache: dict = {}
    summary_maps: dict = {}
    lock = threading.Lock()

    def get_store(run_id: str) -> RunStore:
        if run_id not in run_paths:
            raise HTTPException(404, f"unknown run {run_id!r}")
        with lock:
            if run_id not in stores:
                try:
                    stores[run_id] = RunStore.open(run_paths[run_id])
                except (StoreError, OSError) as e:
                    raise HTTPException(500, f"unreadable store: {e}")
            return stores[run_id]

    def descriptor(run_id: str, store: RunStore) -> dict:
        spec, _ = store_grid(store)
        return {
            "id": run_id,
            "scenario": store.meta["scenario"],
            "variants": store.meta["variants"].split(","),
            "n_realizations": int(store.meta["n_realizations"]),
            "year_start": int(store.meta["year_start"]),
            "year_end": int(store.meta["year_end"]),
            "country": store.meta.get("country"),
            "discount_rate": float(store.meta["discount_rate"]),
            "config_hash": store.config_hash(),
            "grid": {
                "lat_min": spec.lat_min, "lat_max": spec.lat_max,
                "lon_min": spec.lon_min, "lon_max": spec.lon_max,
                "resolution": spec.resolution, "n_cells": spec.n_cells,
            },
        }

    @app.get("/runs")
    def list_runs():
        return [descriptor(rid, get_store(rid)) for rid in sorted(run_paths)]

    @app.get("/runs/{run_id}/cells/{cell}/series")
    def cell_quantile_series(
        run_id: str, cell: int,
        variable: str = Query(...),
        variant: str | None = Query(None),
        quantiles: str = Query("5,50,95"),
    ):
        store = get_store(run_id)
        spec, _ = store_grid(store)
        if not (0 <= cell < spec.n_cells):
            raise HTTPException(404, f"cell {cell} out of range (grid has {spec.n_cells})")
        if variable not in VARIABLE_UNITS:
            raise HTTPException(400, f"unknown variable {variable!r}")
        try:
            qs = [float(q) for q in quantiles.split(",") if q.strip()]
        except ValueError:
            raise HTTPException(400, f"bad quantile list {quantiles!r}")
        if not qs or any(not (0.0 <= q <= 100.0) for q in qs):
            raise HTTPException(400, f"quantiles must lie in [0, 100]: {quantiles!r}")
        try:
            series = cell_series(store, variable, variant)
        except EngineError as e:
            raise HTTPException(400, str(e))
        except KeyError as e:
            raise HTTPException(422, f"not stored in this run: {e}")
        values = np.asarray(series[:, :, cell], dtype="f8")
        lat, lon = spec.cell_center(cell)
        return {
            "run": run_id,
            "cell": cell,
            "lat": float(lat),
            "lon": float(lon),
            "variable": variable,
            "variant": variant,
            "units": VARIABLE_UNITS[variable],
            "config_hash": store.config_hash(),
            "years": [int(y) for y in store.years()],
            "series": {
                f"{q:g}": np.quantile(values, q / 100.0, axis=0).tolist()
                for q in qs
            },
        }

    @app.post("/runs/{run_id}/risk-index")
    def risk_index(run_id: str, req: RiskIndexRequest, response: Response):
        store = get_store(run_id)
        try:
            spec = RiskIndexSpec(
                thresholds=tuple(
                    RiskThreshold(t.variable, t.comparator, t.level, t.window)
                    for t in req.thresholds
                ),
                k_moderate=req.k_moderate,
                k_high=req.k_high,
            )
        except RiskError as e:
            raise HTTPException(400, str(e))
        if req.format not in ("json", "raster"):
            raise HTTPException(400, f"unknown format {req.format!r}")
        if req.format == "raster":
            if req.layer not in ("moderate_dates", "moderate_prob",
                                 "high_dates", "high_prob"):
                raise HTTPException(400, f"unknown raster layer {req.layer!r}")
            if req.bbox is not None:
                raise HTTPException(400, "bbox subsetting applies to json format only")
        if req.bbox is not None and len(req.bbox) != 4:
            raise HTTPException(400, "bbox must be [lat_min, lat_max, lon_min, lon_max]")

        key = hashlib.sha256(json.dumps(
            {"run": run_id, "hash": store.config_hash(),
             "req": req.model_dump()},
            sort_keys=True).encode()).hexdigest()
        response.headers["X-Request-Hash"] = key
        with lock:
            cached = risk_cache.get(key)
        if cached is not None:
            response.headers["X-Cache"] = "hit"
            if req.format == "raster":
                return Response(content=cached, media_type="application/octet-stream",
                                headers=dict(response.headers))
            return cached

        variant = req.variant or store.meta["variants"].split(",")[0]
        if variant not in store.meta["variants"].split(","):
            raise HTTPException(422, f"variant {variant!r} not stored in this run")
        try:
            maps = compute_risk_maps(store, spec, variant)
        except RiskError as e:
            raise HTTPException(422, str(e))
        except (KeyError, EngineError) as e:
            raise HTTPException(422, f"not stored in this run: {e}")

        if req.format == "raster":
            blob = risk_map_rasters(store, maps)[req.layer]
            with lock:
                risk_cache[key] = blob
            response.headers["X-Cache"] = "miss"
            return Response(content=blob, media_type="application/octet-stream",
                            headers=dict(response.headers))

        gspec, _ = store_grid(store)
        idx = np.arange(gspec.n_cells)
        if req.bbox is not None:
            lat, lon = gspec.cell_center(idx)
            lat_min, lat_max, lon_min, lon_max = req.bbox
            keep = (lat >= lat_min) & (lat <= lat_max) & \
                   (lon >= lon_min) & (lon <= lon_max)
            idx = idx[keep]
        lat, lon = gspec.cell_center(idx)
        mod, high = maps["moderate"], maps["high"]
        payload = {
            "run": run_id,
            "config_hash": store.config_hash(),
            "request_hash": key,
            "k_moderate": spec.k_moderate,
            "k_high": spec.k_high,
            "variant": variant,
            "no_date": NO_DATE,
            "units": {"dates": "year", "probability": "fraction"},
            "cells": idx.tolist(),
            "lat": lat.tolist(),
            "lon": lon.tolist(),
            "moderate_dates": mod.years[idx].tolist(),
            "moderate_prob": mod.probability[idx].tolist(),
            "high_dates": high.years[idx].tolist(),
            "high_prob": high.probability[idx].tolist(),
        }
        with lock:
            risk_cache[key] = payload
        response.headers["X-Cache"] = "miss"
        return payload

    def summary_risk_maps(run_id: str, store: RunStore, variant: str):
        key = (run_id, variant)
        with lock:
            if key in summary_maps:
                return summary_maps[key]
        spec = RiskIndexSpec(DEFAULT_SUMMARY_THRESHOLDS, k_moderate=2, k_high=3)
        maps = compute_risk_maps(store, spec, variant)
        with lock:
            summary_maps[key] = maps
        return maps

    @app.get("/runs/{run_id}/localities/{admin}/summary")
    def locality_summary(run_id: str, admin: str,
                         variant: str | None = Query(None)):
        store = get_store(run_id)
        gspec, rmap = store_grid(store)
        cells = None
        for level in ("state", "municipality", "country"):
            try:
                cells = lookup_cells(rmap, level, admin)
                break
            except GridError:
                continue
        if cells is None:
            raise HTTPException(404, f"unknown locality {admin!r}")
        variant = variant or store.meta["variants"].split(",")[0]
        if variant not in store.meta["variants"].split(","):
            raise HTTPException(422, f"variant {variant!r} not stored in this run")

        years = store.years()
        gdp = np.asarray(store.load("gdp"))[:, cells]
        frac = np.asarray(store.load(f"loss_frac__{variant}"))[:, :, cells].astype("f8")
        losses = np.einsum("rtc,tc->rt", frac, gdp)
        gdp_total = gdp.sum(axis=1)
        rate = float(store.meta["discount_rate"])
        pvs = np.array([
            present_value(LossSeries(years, row, gdp_total), rate)
            for row in losses
        ])
        ref_year = int(store.meta.get("reference_year", 2024))
        t = int(np.flatnonzero(years == ref_year)[0])
        ref_gdp = float(gdp_total[t])

        maps = summary_risk_maps(run_id, store, variant)
        out_dates = {}
        for level in ("moderate", "high"):
            d = maps[level].years[cells]
            defined = d[d != NO_DATE]
            out_dates[level] = {
                "median_date": int(np.median(defined)) if defined.size else NO_DATE,
                "cells_with_date": int(defined.size),
                "mean_probability": float(maps[level].probability[cells].mean()),
            }

        return {
            "run": run_id,
            "locality": admin,
            "variant": variant,
            "config_hash": store.config_hash(),
            "n_cells": int(cells.size),
            "units": {"pv": "US$2005", "relative_pv": "fraction of reference-year GDP"},
            "discount_rate": rate,
            "pv_mean": float(pvs.mean()),
            "pv_median": float(np.quantile(pvs, 0.5)),
            "pv_p5": float(np.quantile(pvs, 0.05)),
            "pv_p95": float(np.quantile(pvs, 0.95)),
            "reference_gdp": ref_gdp,
            "relative_pv": relative_pv(float(np.quantile(pvs, 0.5)), ref_gdp),
            "risk_dates": out_dates,
            "no_date": NO_DATE,
        }

    return app
