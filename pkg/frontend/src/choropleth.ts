/**
 * Grid-cell choropleths rendered as lat/lon rectangles in SVG — no basemap
 * or canvas dependency, so maps render offline and in tests.
 */

import { GridInfo, NO_DATE, RiskIndexPayload, RiskLayer } from './types';

export interface LegendBounds {
    min: number;
    max: number;
}

/**
 * Legend bounds are the min/max of the *defined* payload values; the
 * NO_DATE sentinel never stretches the scale.
 */
export function legendBounds(values: number[], noDate: number = NO_DATE): LegendBounds | null {
    let min = Infinity;
    let max = -Infinity;
    for (const v of values) {
        if (v === noDate || !Number.isFinite(v)) {
            continue;
        }
        if (v < min) min = v;
        if (v > max) max = v;
    }
    if (min === Infinity) {
        return null;
    }
    return { min, max };
}

/** Common scale for A/B compare: the union of both payloads' bounds. */
export function sharedBounds(a: LegendBounds | null, b: LegendBounds | null): LegendBounds | null {
    if (a === null) return b;
    if (b === null) return a;
    return { min: Math.min(a.min, b.min), max: Math.max(a.max, b.max) };
}

/** Sentinel styling for cells that never reach the risk level. */
export const NEVER_COLOR = '#d9d9d9';

/** Linear two-stop ramp; bounds with min === max map everything to the end stop. */
export function colorFor(value: number, bounds: LegendBounds, noDate: number = NO_DATE): string {
    if (value === noDate || !Number.isFinite(value)) {
        return NEVER_COLOR;
    }
    const span = bounds.max - bounds.min;
    const t = span > 0 ? Math.min(1, Math.max(0, (value - bounds.min) / span)) : 1;
    // light yellow -> dark red
    const from = [255, 245, 204];
    const to = [153, 0, 13];
    const rgb = from.map((f, i) => Math.round(f + t * ((to[i] as number) - f)));
    return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}

export interface ChoroplethOptions {
    /** pixels per degree */
    scale?: number;
    /** use a precomputed scale (A/B compare passes the shared bounds) */
    bounds?: LegendBounds;
}

export interface Choropleth {
    svg: string;
    bounds: LegendBounds | null;
    nCells: number;
}

const LAYER_TITLES: Record<RiskLayer, string> = {
    moderate_dates: 'moderate risk: exceedance year',
    moderate_prob: 'moderate risk: probability by 2100',
    high_dates: 'high risk: exceedance year',
    high_prob: 'high risk: probability by 2100',
};

/**
 * Render one layer of a risk-index payload. Each cell becomes a rectangle
 * centred on its lat/lon; the legend carries the payload min/max so the
 * scale is auditable against the raw response.
 */
export function renderChoropleth(
    payload: RiskIndexPayload,
    layer: RiskLayer,
    grid: GridInfo,
    options: ChoroplethOptions = {},
): Choropleth {
    const values = payload[layer];
    const scale = options.scale ?? 8;
    const ownBounds = legendBounds(values, payload.no_date);
    const bounds = options.bounds ?? ownBounds;
    const width = (grid.lon_max - grid.lon_min) * scale;
    const height = (grid.lat_max - grid.lat_min) * scale;
    const cell = grid.resolution * scale;

    const rects: string[] = [];
    for (let i = 0; i < payload.cells.length; i++) {
        const lat = payload.lat[i] as number;
        const lon = payload.lon[i] as number;
        const value = values[i] as number;
        const x = (lon - grid.resolution / 2 - grid.lon_min) * scale;
        // SVG y grows downward; put high latitudes at the top
        const y = (grid.lat_max - lat - grid.resolution / 2) * scale;
        const fill =
            bounds === null ? NEVER_COLOR : colorFor(value, bounds, payload.no_date);
        rects.push(
            `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${cell.toFixed(2)}"` +
                ` height="${cell.toFixed(2)}" fill="${fill}"` +
                ` data-cell="${payload.cells[i]}" data-value="${value}"/>`,
        );
    }

    const legend =
        bounds === null
            ? '<text class="legend">no cells reach this level</text>'
            : `<text class="legend" data-min="${bounds.min}" data-max="${bounds.max}">` +
              `${LAYER_TITLES[layer]}: ${bounds.min} – ${bounds.max}</text>`;
    const svg =
        `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"` +
        ` data-layer="${layer}" data-request-hash="${payload.request_hash}">` +
        `${rects.join('')}${legend}</svg>`;
    return { svg, bounds: ownBounds, nCells: payload.cells.length };
}
