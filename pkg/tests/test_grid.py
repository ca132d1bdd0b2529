import math

import numpy as np
import pytest

from gridrisk.grid import (
    CellField, GridError, GridSpec, WATER, aggregate, cell_area, load_grid,
    lookup_cells, save_grid,
)


def test_cell_area_matches_spherical_oracle():
    # independent recompute of the spherical band area at a few latitudes
    R = 6371.0
    for lat in (0.0, 19.25, 45.75, -33.25, 89.75):
        half = math.radians(0.5) / 2
        phi = math.radians(lat)
        hi = min(phi + half, math.pi / 2)
        lo = max(phi - half, -math.pi / 2)
        expected = R * R * math.radians(0.5) * (math.sin(hi) - math.sin(lo))
        assert cell_area(lat, 0.5) == pytest.approx(expected, rel=1e-12)


def test_cell_area_equator_value():
    # half-degree cell at the equator is a shade over 3000 km^2
    assert cell_area(0.0, 0.5) == pytest.approx(3091.1, rel=1e-3)


def test_cell_area_shrinks_with_latitude():
    lats = np.array([0.0, 20.0, 40.0, 60.0, 80.0])
    areas = cell_area(lats, 0.5)
    assert np.all(np.diff(areas) < 0)


def test_cell_area_rejects_bad_latitude():
    with pytest.raises(GridError):
        cell_area(95.0)


def test_grid_spec_shape():
    spec = GridSpec(14.0, 33.5, -118.0, -86.0, 0.5)
    assert spec.n_lat == 39
    assert spec.n_lon == 64
    assert spec.n_cells == 2496


def test_cell_index_center_bijection():
    spec = GridSpec(14.0, 33.5, -118.0, -86.0, 0.5)
    rng = np.random.default_rng(7)
    idx = rng.integers(0, spec.n_cells, size=200)
    lat, lon = spec.cell_center(idx)
    back = spec.cell_index(lat, lon)
    assert np.array_equal(np.asarray(back), idx)


def test_cell_center_out_of_range():
    spec = GridSpec(14.0, 33.5, -118.0, -86.0, 0.5)
    with pytest.raises(GridError):
        spec.cell_center(spec.n_cells)


def _tiny_map():
    from gridrisk.grid import RegionMap
    spec = GridSpec(0.0, 1.0, 0.0, 1.0, 0.5)  # 2x2
    rmap = RegionMap(
        grid=spec,
        country=np.array(["AAA", "AAA", "BBB", WATER]),
        region=np.array(["R1", "R1", "R2", WATER]),
        admin1=np.array(["AAA-S0", "AAA-S1", "BBB-S0", WATER]),
        admin2=np.array(["AAA-S0-M0", "AAA-S1-M0", "BBB-S0-M0", WATER]),
        land=np.array([True, True, True, False]),
    )
    return spec, rmap


def test_aggregate_levels_and_water_exclusion():
    spec, rmap = _tiny_map()
    field = CellField(grid=spec, values=np.array([1.0, 2.0, 4.0, 100.0]),
                      units="x")
    by_country = aggregate(field, "country", rmap)
    assert by_country == {"AAA": 3.0, "BBB": 4.0}
    assert aggregate(field, "global", rmap) == {"GLOBAL": 7.0}


def test_aggregate_partition_property():
    # country sums partition the global sum exactly (1e-12 relative)
    spec, rmap = _tiny_map()
    rng = np.random.default_rng(11)
    field = CellField(grid=spec, values=rng.random(4), units="x")
    total = aggregate(field, "global", rmap)["GLOBAL"]
    for level in ("country", "region", "state", "municipality"):
        parts = sum(aggregate(field, level, rmap).values())
        assert parts == pytest.approx(total, rel=1e-12)


def test_lookup_cells():
    spec, rmap = _tiny_map()
    assert list(lookup_cells(rmap, "country", "AAA")) == [0, 1]
    with pytest.raises(GridError):
        lookup_cells(rmap, "country", "ZZZ")


def test_grid_round_trip(tmp_path):
    spec, rmap = _tiny_map()
    path = tmp_path / "grid.csv"
    save_grid(path, spec, rmap)
    spec2, rmap2 = load_grid(path)
    assert spec2 == spec
    assert np.array_equal(rmap2.country, rmap.country)
    assert np.array_equal(rmap2.land, rmap.land)
