/**
 * Parser for the engine's binary raster format (GRDX v1).
 *
 * Layout, all little-endian:
 *   4 bytes  magic "GRDX"
 *   u32      version (1)
 *   5 f64    lat_min, lat_max, lon_min, lon_max, resolution
 *   u32      variable-id byte length, then that many UTF-8 bytes
 *   u32      year_start
 *   u32      year_end
 *   u64      cell count
 *   f64[n]   values in grid index order (row-major: lat rows, lon columns)
 */

export interface GrdxRaster {
    version: number;
    latMin: number;
    latMax: number;
    lonMin: number;
    lonMax: number;
    resolution: number;
    variable: string;
    yearStart: number;
    yearEnd: number;
    values: Float64Array;
}

const MAGIC = 'GRDX';

export function parseGrdx(buffer: ArrayBuffer): GrdxRaster {
    const view = new DataView(buffer);
    const magic = new TextDecoder().decode(new Uint8Array(buffer, 0, 4));
    if (magic !== MAGIC) {
        throw new Error(`not a GRDX raster (magic '${magic}')`);
    }
    let off = 4;
    const version = view.getUint32(off, true);
    off += 4;
    if (version !== 1) {
        throw new Error(`unsupported GRDX version ${version}`);
    }
    const latMin = view.getFloat64(off, true);
    const latMax = view.getFloat64(off + 8, true);
    const lonMin = view.getFloat64(off + 16, true);
    const lonMax = view.getFloat64(off + 24, true);
    const resolution = view.getFloat64(off + 32, true);
    off += 40;
    const nameLen = view.getUint32(off, true);
    off += 4;
    const variable = new TextDecoder().decode(new Uint8Array(buffer, off, nameLen));
    off += nameLen;
    const yearStart = view.getUint32(off, true);
    const yearEnd = view.getUint32(off + 4, true);
    off += 8;
    const countLow = view.getUint32(off, true);
    const countHigh = view.getUint32(off + 4, true);
    off += 8;
    if (countHigh !== 0) {
        throw new Error('raster too large for this client');
    }
    if (buffer.byteLength < off + countLow * 8) {
        throw new Error('truncated GRDX raster');
    }
    // the payload may not be 8-byte aligned (variable-length id), so copy
    const values = new Float64Array(buffer.slice(off, off + countLow * 8));
    return {
        version,
        latMin,
        latMax,
        lonMin,
        lonMax,
        resolution,
        variable,
        yearStart,
        yearEnd,
        values,
    };
}

/** Number of latitude rows / longitude columns implied by the raster bbox. */
export function rasterShape(r: GrdxRaster): { rows: number; cols: number } {
    const rows = Math.round((r.latMax - r.latMin) / r.resolution);
    const cols = Math.round((r.lonMax - r.lonMin) / r.resolution);
    return { rows, cols };
}
