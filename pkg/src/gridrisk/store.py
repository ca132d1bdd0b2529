"""On-disk ensemble store: one directory per run, .npy column files plus a
plain-text manifest, and a compact binary raster format for map exports."""

import hashlib
import json
import os
import struct

import numpy as np

from .grid import GridSpec

MANIFEST = "manifest.txt"

RASTER_MAGIC = b"GRDX"
RASTER_VERSION = 1


class StoreError(RuntimeError):
    pass


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class RunStore:
    """Realization-indexed result store.

    Arrays are .npy files; the manifest records name, dtype, shape, units,
    and checksum per array plus run metadata. Concurrent writers may fill
    disjoint realization slots of a memmapped array; `finalize` freezes the
    manifest and the store is read-only afterwards.
    """

    def __init__(self, path):
        self.path = str(path)
        self.meta = {}
        self._arrays = {}   # name -> (file, dtype, shape, units)
        self._open = {}

    # --- writing -----------------------------------------------------------

    @classmethod
    def create(cls, path, meta: dict) -> "RunStore":
        os.makedirs(path, exist_ok=True)
        if os.path.exists(os.path.join(path, MANIFEST)):
            raise StoreError(f"run directory {path} already holds a finalized store")
        store = cls(path)
        store.meta = dict(meta)
        return store

    def allocate(self, name: str, shape, dtype, units: str) -> np.ndarray:
        """Create a writable memmap for an array; slots may be filled by
        concurrent workers."""
        fname = f"{name}.npy"
        arr = np.lib.format.open_memmap(
            os.path.join(self.path, fname), mode="w+", dtype=dtype, shape=tuple(shape)
        )
        self._arrays[name] = (fname, np.dtype(dtype).str, tuple(shape), units)
        self._open[name] = arr
        return arr

    def put(self, name: str, array: np.ndarray, units: str) -> None:
        out = self.allocate(name, array.shape, array.dtype, units)
        out[...] = array

    def add_file(self, name: str, src_path) -> None:
        """Copy an auxiliary text file (config, grid, calibration) into the run."""
        dst = os.path.join(self.path, name)
        with open(src_path, "rb") as f, open(dst, "wb") as g:
            g.write(f.read())

    def finalize(self) -> None:
        for arr in self._open.values():
            arr.flush()
        self._open.clear()
        lines = ["# gridrisk run manifest v1"]
        for key in sorted(self.meta):
            lines.append(f"meta {key}={self.meta[key]}")
        for name in sorted(self._arrays):
            fname, dtype, shape, units = self._arrays[name]
            shape_s = "x".join(str(s) for s in shape)
            digest = _sha256(os.path.join(self.path, fname))
            lines.append(
                f"array name={name} file={fname} dtype={dtype} "
                f"shape={shape_s} units={units} sha256={digest}"
            )
        with open(os.path.join(self.path, MANIFEST), "w") as f:
            f.write("\n".join(lines) + "\n")

    # --- reading -------------------------------------------------------------

    @classmethod
    def open(cls, path) -> "RunStore":
        store = cls(path)
        manifest = os.path.join(path, MANIFEST)
        if not os.path.exists(manifest):
            raise StoreError(f"no manifest in {path}; incomplete or invalid run")
        with open(manifest) as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                kind, _, rest = line.partition(" ")
                if kind == "meta":
                    key, _, value = rest.partition("=")
                    store.meta[key] = value
                elif kind == "array":
                    fields = dict(p.split("=", 1) for p in rest.split(" "))
                    shape = tuple(int(s) for s in fields["shape"].split("x"))
                    store._arrays[fields["name"]] = (
                        fields["file"], fields["dtype"], shape, fields["units"]
                    )
        return store

    @property
    def arrays(self) -> list:
        return sorted(self._arrays)

    def units(self, name: str) -> str:
        return self._arrays[name][3]

    def load(self, name: str, mmap: bool = True) -> np.ndarray:
        if name not in self._arrays:
            raise StoreError(f"array {name!r} not in store")
        fname = self._arrays[name][0]
        return np.load(os.path.join(self.path, fname),
                       mmap_mode="r" if mmap else None)

    def manifest_checksum(self) -> str:
        return _sha256(os.path.join(self.path, MANIFEST))

    def config_hash(self) -> str:
        return self.meta.get("config_hash", "")

    def years(self) -> np.ndarray:
        return np.arange(int(self.meta["year_start"]), int(self.meta["year_end"]) + 1)


# --- binary raster export ----------------------------------------------------

def write_raster(path_or_buf, grid: GridSpec, variable: str, year_start: int,
                 year_end: int, values: np.ndarray) -> None:
    """Compact binary raster: magic, version, grid spec, variable id,
    year range, then per-cell float64 values in index order.

    Header: 4s magic | u32 version | 5 f64 (lat_min, lat_max, lon_min,
    lon_max, resolution) | u32 variable-id length | bytes | 2 u32 years |
    u64 cell count | f64 data.
    """
    vid = variable.encode()
    header = RASTER_MAGIC + struct.pack(
        "<I5dI", RASTER_VERSION, grid.lat_min, grid.lat_max,
        grid.lon_min, grid.lon_max, grid.resolution, len(vid)
    ) + vid + struct.pack("<IIQ", year_start, year_end, len(values))
    payload = header + np.asarray(values, dtype="<f8").tobytes()
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(payload)
    else:
        with open(path_or_buf, "wb") as f:
            f.write(payload)


def raster_bytes(grid: GridSpec, variable: str, year_start: int,
                 year_end: int, values: np.ndarray) -> bytes:
    import io
    buf = io.BytesIO()
    write_raster(buf, grid, variable, year_start, year_end, values)
    return buf.getvalue()


def read_raster(path) -> dict:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != RASTER_MAGIC:
        raise StoreError("not a raster file (bad magic)")
    off = 4
    version, lat_min, lat_max, lon_min, lon_max, res, vlen = struct.unpack_from("<I5dI", data, off)
    off += struct.calcsize("<I5dI")
    variable = data[off:off + vlen].decode()
    off += vlen
    year_start, year_end, count = struct.unpack_from("<IIQ", data, off)
    off += struct.calcsize("<IIQ")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=off)
    return {
        "version": version,
        "grid": GridSpec(lat_min, lat_max, lon_min, lon_max, res),
        "variable": variable,
        "year_start": year_start,
        "year_end": year_end,
        "values": values,
    }
