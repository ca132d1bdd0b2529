"""Shared fixtures: a session-scoped demo data set and small run stores."""

import os
from dataclasses import replace

import numpy as np
import pytest

from gridrisk import synth
from gridrisk.engine import RunConfig, run_ensemble
from gridrisk.grid import GridSpec, RegionMap

# variants carried by the shared session runs: enough for the UHI pair
# checks (K/KU, R/RU, KW/KWU) and the PV-report ordering checks
SESSION_VARIANTS = ("K", "KU", "R", "RU", "KW", "KWU",
                    "RU_d", "RPU_d", "RU_w", "RPU_w")


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("demo_data")
    synth.generate(str(d), seed=1234, n_realizations=100, workers=4)
    return str(d)


def make_run(data_dir, out_dir, scenario, n_realizations, variants=None,
             workers=4, seed=42, **overrides):
    cfg = RunConfig.from_file(
        os.path.join(data_dir, "configs", f"{scenario.lower()}.cfg"))
    fields = dict(n_realizations=n_realizations, workers=workers, seed=seed)
    if variants is not None:
        fields["variants"] = tuple(variants)
    fields.update(overrides)
    cfg = replace(cfg, **fields)
    return run_ensemble(cfg, str(out_dir))


@pytest.fixture(scope="session")
def cp_store(data_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("runs_cp") / "cp24"
    return make_run(data_dir, out, "CP", 24, SESSION_VARIANTS)


@pytest.fixture(scope="session")
def b2_store(data_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("runs_b2") / "b224"
    return make_run(data_dir, out, "B2", 24, SESSION_VARIANTS)


@pytest.fixture(scope="session")
def runs_dir(cp_store, b2_store):
    """Parent directory holding both session run stores is not shared, so
    expose the two store paths directly."""
    return {"cp24": cp_store.path, "b224": b2_store.path}


@pytest.fixture()
def toy_grid():
    """A 1x4 single-country strip: land, land, land, water."""
    spec = GridSpec(lat_min=20.0, lat_max=20.5, lon_min=-100.0,
                    lon_max=-98.0, resolution=0.5)
    rmap = RegionMap(
        grid=spec,
        country=np.array(["MEX", "MEX", "MEX", "-"]),
        region=np.array(["LAM", "LAM", "LAM", "-"]),
        admin1=np.array(["MEX-S00", "MEX-S00", "MEX-S01", "-"]),
        admin2=np.array(["MEX-S00-M00", "MEX-S00-M01", "MEX-S01-M00", "-"]),
        land=np.array([True, True, True, False]),
    )
    return spec, rmap
