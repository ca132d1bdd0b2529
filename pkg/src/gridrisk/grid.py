"""Spatial lattice, land/region/admin mappings, and conservative aggregation."""

from dataclasses import dataclass, field

import numpy as np

EARTH_RADIUS_KM = 6371.0

# Country/admin code carried by water cells.
WATER = "-"

LEVELS = ("country", "region", "state", "municipality", "global")


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Regular lat/lon lattice of square cells of a fixed resolution.

    Cells are indexed row-major: index = row * n_lon + col, with row 0 at
    lat_min and col 0 at lon_min. Cell centers sit at the half-resolution
    offsets inside the bounding box.
    """

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    resolution: float = 0.5

    def __post_init__(self):
        if self.resolution <= 0:
            raise GridError("resolution must be positive")
        if self.lat_max <= self.lat_min or self.lon_max <= self.lon_min:
            raise GridError("bounding box is empty")

    @property
    def n_lat(self) -> int:
        return int(round((self.lat_max - self.lat_min) / self.resolution))

    @property
    def n_lon(self) -> int:
        return int(round((self.lon_max - self.lon_min) / self.resolution))

    @property
    def n_cells(self) -> int:
        return self.n_lat * self.n_lon

    def cell_center(self, index):
        """(lat, lon) of the center of cell `index`."""
        index = np.asarray(index)
        if np.any(index < 0) or np.any(index >= self.n_cells):
            raise GridError("cell index out of range")
        row, col = np.divmod(index, self.n_lon)
        lat = self.lat_min + (row + 0.5) * self.resolution
        lon = self.lon_min + (col + 0.5) * self.resolution
        return lat, lon

    def cell_index(self, lat, lon):
        """Index of the cell whose center is (lat, lon)."""
        row = np.round((np.asarray(lat) - self.lat_min) / self.resolution - 0.5)
        col = np.round((np.asarray(lon) - self.lon_min) / self.resolution - 0.5)
        row = row.astype(int)
        col = col.astype(int)
        if np.any(row < 0) or np.any(row >= self.n_lat) or np.any(col < 0) or np.any(col >= self.n_lon):
            raise GridError("coordinates outside grid")
        return row * self.n_lon + col

    def cell_lats(self) -> np.ndarray:
        """Latitude of every cell center, in index order."""
        lat, _ = self.cell_center(np.arange(self.n_cells))
        return lat

    def cell_areas(self) -> np.ndarray:
        """Area (km^2) of every cell, in index order."""
        return cell_area(self.cell_lats(), self.resolution)


@dataclass(frozen=True)
class RegionMap:
    """Per-cell country / macro-region / admin codes and land mask."""

    grid: GridSpec
    country: np.ndarray      # str codes, WATER for ocean cells
    region: np.ndarray       # 12-macro-region codes
    admin1: np.ndarray       # state codes, nested in country
    admin2: np.ndarray       # municipality codes, nested in admin1
    land: np.ndarray         # bool

    def __post_init__(self):
        n = self.grid.n_cells
        for name in ("country", "region", "admin1", "admin2", "land"):
            arr = getattr(self, name)
            if len(arr) != n:
                raise GridError(f"{name} length {len(arr)} != n_cells {n}")
        if np.any((self.country[self.land] == WATER)):
            raise GridError("land cell without country code")

    def codes(self, level: str) -> np.ndarray:
        if level == "country":
            return self.country
        if level == "region":
            return self.region
        if level == "state":
            return self.admin1
        if level == "municipality":
            return self.admin2
        raise GridError(f"unknown level {level!r}; expected one of {LEVELS}")


@dataclass(frozen=True)
class CellField:
    """Per-cell scalar array with units metadata."""

    grid: GridSpec
    values: np.ndarray
    units: str

    def __post_init__(self):
        if len(self.values) != self.grid.n_cells:
            raise GridError(
                f"field length {len(self.values)} != n_cells {self.grid.n_cells}"
            )
        if not self.units:
            raise GridError("units metadata required")


def cell_area(lat, resolution: float = 0.5):
    """Area (km^2) of a resolution x resolution cell centered at `lat` on a
    spherical Earth (R = 6371 km)."""
    lat = np.asarray(lat, dtype=float)
    if np.any(np.abs(lat) > 90):
        raise GridError("latitude outside [-90, 90]")
    half = np.radians(resolution) / 2.0
    phi = np.radians(lat)
    hi = np.minimum(phi + half, np.pi / 2)
    lo = np.maximum(phi - half, -np.pi / 2)
    area = EARTH_RADIUS_KM**2 * np.radians(resolution) * (np.sin(hi) - np.sin(lo))
    return area if area.ndim else float(area)


def aggregate(field: CellField, level: str, region_map: RegionMap) -> dict:
    """Sum of member-cell values per key at the requested level.

    Water cells are excluded. `global` returns a single-entry dict keyed
    'GLOBAL' holding the sum over all land cells.
    """
    if field.grid != region_map.grid:
        raise GridError("field and region map are on different grids")
    land = region_map.land
    if level == "global":
        return {"GLOBAL": float(np.sum(field.values[land]))}
    codes = region_map.codes(level)
    out = {}
    for key in np.unique(codes[land]):
        mask = land & (codes == key)
        out[str(key)] = float(np.sum(field.values[mask]))
    return out


def lookup_cells(region_map: RegionMap, level: str, key: str) -> np.ndarray:
    """Indices of land cells carrying `key` at `level`."""
    codes = region_map.codes(level)
    mask = region_map.land & (codes == key)
    if not np.any(mask):
        raise GridError(f"unknown {level} key {key!r}")
    return np.flatnonzero(mask)


def load_grid(path) -> tuple[GridSpec, RegionMap]:
    """Load grid and region map from a delimited-text file.

    One row per cell: lat, lon, country, region, admin1, admin2, land(0|1).
    Header row required. The bounding box and resolution are inferred from
    the coordinates; the file must cover the full lattice.
    """
    rows = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
    lat = np.atleast_1d(rows["lat"]).astype(float)
    lon = np.atleast_1d(rows["lon"]).astype(float)
    lats = np.unique(lat)
    lons = np.unique(lon)
    if len(lats) > 1:
        res = float(np.min(np.diff(lats)))
    elif len(lons) > 1:
        res = float(np.min(np.diff(lons)))
    else:
        raise GridError("cannot infer resolution from a single cell")
    spec = GridSpec(
        lat_min=float(lats[0] - res / 2),
        lat_max=float(lats[-1] + res / 2),
        lon_min=float(lons[0] - res / 2),
        lon_max=float(lons[-1] + res / 2),
        resolution=res,
    )
    if len(lat) != spec.n_cells:
        raise GridError(f"file has {len(lat)} rows, lattice needs {spec.n_cells}")
    idx = spec.cell_index(lat, lon)
    if len(np.unique(idx)) != spec.n_cells:
        raise GridError("duplicate or missing cells in grid file")

    def col(name):
        out = np.empty(spec.n_cells, dtype=object)
        out[idx] = np.atleast_1d(rows[name]).astype(str)
        return out

    land = np.zeros(spec.n_cells, dtype=bool)
    land[idx] = np.atleast_1d(rows["land"]).astype(int) == 1
    rmap = RegionMap(
        grid=spec,
        country=col("country"),
        region=col("region"),
        admin1=col("admin1"),
        admin2=col("admin2"),
        land=land,
    )
    return spec, rmap


def save_grid(path, spec: GridSpec, rmap: RegionMap) -> None:
    lat, lon = spec.cell_center(np.arange(spec.n_cells))
    with open(path, "w") as f:
        f.write("lat,lon,country,region,admin1,admin2,land\n")
        for i in range(spec.n_cells):
            f.write(
                f"{lat[i]:.3f},{lon[i]:.3f},{rmap.country[i]},{rmap.region[i]},"
                f"{rmap.admin1[i]},{rmap.admin2[i]},{int(rmap.land[i])}\n"
            )
