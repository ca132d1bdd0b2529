/**
 * View state for the threshold panel and the map, with validation and URL
 * round-tripping (shareable links reproduce the exact view).
 */

import {
    Comparator,
    RiskIndexRequestBody,
    RiskLayer,
    RISK_LAYERS,
    ThresholdBody,
    Variable,
    VARIABLES,
} from './types';

export interface ThresholdRow {
    variable: Variable;
    comparator: Comparator;
    level: number;
    window: number;
}

export interface ThresholdPanelState {
    runId: string;
    variant: string | null;
    thresholds: ThresholdRow[];
    kModerate: number;
    kHigh: number;
    /** locality codes pinned by the user for drilldown cards */
    pinned: string[];
}

export type MapLayer = RiskLayer | 'loss_pct' | 'relative_pv';

export interface MapViewState {
    layer: MapLayer;
    year: number;
    compare: boolean;
    /** second run id when A/B compare is on */
    compareRunId: string | null;
}

export interface ExplorerState {
    panel: ThresholdPanelState;
    map: MapViewState;
}

/** Default four-threshold index, matching the server's summary defaults. */
export function defaultThresholds(): ThresholdRow[] {
    return [
        { variable: 'dt', comparator: '>=', level: 3.0, window: 21 },
        { variable: 'dp', comparator: '<=', level: -10.0, window: 21 },
        { variable: 'loss_pct', comparator: '>=', level: 10.0, window: 21 },
        { variable: 'loss_value', comparator: '>=', level: 1.0e9, window: 21 },
    ];
}

export function defaultState(runId: string): ExplorerState {
    return {
        panel: {
            runId,
            variant: null,
            thresholds: defaultThresholds(),
            kModerate: 2,
            kHigh: 3,
            pinned: [],
        },
        map: { layer: 'moderate_dates', year: 2050, compare: false, compareRunId: null },
    };
}

export interface FieldError {
    field: string;
    message: string;
}

/** Field-level validation; an empty result means the state can be submitted. */
export function validatePanel(panel: ThresholdPanelState): FieldError[] {
    const errors: FieldError[] = [];
    if (!panel.runId) {
        errors.push({ field: 'runId', message: 'select a run' });
    }
    if (panel.thresholds.length === 0) {
        errors.push({ field: 'thresholds', message: 'at least one threshold required' });
    }
    panel.thresholds.forEach((row, i) => {
        if (!(VARIABLES as readonly string[]).includes(row.variable)) {
            errors.push({ field: `thresholds[${i}].variable`, message: `unknown variable '${row.variable}'` });
        }
        if (row.comparator !== '>=' && row.comparator !== '<=') {
            errors.push({ field: `thresholds[${i}].comparator`, message: "comparator must be '>=' or '<='" });
        }
        if (!Number.isFinite(row.level)) {
            errors.push({ field: `thresholds[${i}].level`, message: 'level must be finite' });
        }
        if (!Number.isInteger(row.window) || row.window < 1 || row.window % 2 === 0) {
            errors.push({ field: `thresholds[${i}].window`, message: 'window must be odd and >= 1' });
        }
    });
    const n = panel.thresholds.length;
    if (
        !Number.isInteger(panel.kModerate) ||
        !Number.isInteger(panel.kHigh) ||
        panel.kModerate < 1 ||
        panel.kModerate > panel.kHigh ||
        panel.kHigh > n
    ) {
        errors.push({
            field: 'k',
            message: `require 1 <= k_moderate <= k_high <= ${n}`,
        });
    }
    return errors;
}

/**
 * Serialize panel state to a risk-index request body. Throws if the state
 * is invalid — callers must validate first, so no bad request ever leaves
 * the client.
 */
export function toRiskIndexRequest(panel: ThresholdPanelState): RiskIndexRequestBody {
    const errors = validatePanel(panel);
    if (errors.length > 0) {
        throw new Error(`invalid panel state: ${errors.map((e) => e.field).join(', ')}`);
    }
    const thresholds: ThresholdBody[] = panel.thresholds.map((row) => ({
        variable: row.variable,
        comparator: row.comparator,
        level: row.level,
        window: row.window,
    }));
    const body: RiskIndexRequestBody = {
        thresholds,
        k_moderate: panel.kModerate,
        k_high: panel.kHigh,
    };
    if (panel.variant !== null) {
        body.variant = panel.variant;
    }
    return body;
}

// --- URL serialization -------------------------------------------------------

const MAP_LAYERS: readonly string[] = [...RISK_LAYERS, 'loss_pct', 'relative_pv'];

function encodeThreshold(row: ThresholdRow): string {
    // '>=' / '<=' encode as ge / le to stay URL-friendly
    const cmp = row.comparator === '>=' ? 'ge' : 'le';
    return [row.variable, cmp, String(row.level), String(row.window)].join('~');
}

function decodeThreshold(text: string): ThresholdRow {
    const parts = text.split('~');
    if (parts.length !== 4) {
        throw new Error(`bad threshold token '${text}'`);
    }
    const [variable, cmp, level, window] = parts as [string, string, string, string];
    if (cmp !== 'ge' && cmp !== 'le') {
        throw new Error(`bad comparator token '${cmp}'`);
    }
    return {
        variable: variable as Variable,
        comparator: cmp === 'ge' ? '>=' : '<=',
        level: Number(level),
        window: Number(window),
    };
}

/** Encode the full explorer state as a URL query string (no leading '?'). */
export function encodeState(state: ExplorerState): string {
    const params = new URLSearchParams();
    params.set('run', state.panel.runId);
    if (state.panel.variant !== null) {
        params.set('variant', state.panel.variant);
    }
    for (const row of state.panel.thresholds) {
        params.append('th', encodeThreshold(row));
    }
    params.set('km', String(state.panel.kModerate));
    params.set('kh', String(state.panel.kHigh));
    for (const code of state.panel.pinned) {
        params.append('pin', code);
    }
    params.set('layer', state.map.layer);
    params.set('year', String(state.map.year));
    if (state.map.compare && state.map.compareRunId !== null) {
        params.set('vs', state.map.compareRunId);
    }
    return params.toString();
}

/** Inverse of encodeState; throws on malformed input. */
export function decodeState(query: string): ExplorerState {
    const params = new URLSearchParams(query);
    const runId = params.get('run');
    if (runId === null) {
        throw new Error("missing 'run' parameter");
    }
    const layer = params.get('layer') ?? 'moderate_dates';
    if (!MAP_LAYERS.includes(layer)) {
        throw new Error(`unknown map layer '${layer}'`);
    }
    const compareRunId = params.get('vs');
    return {
        panel: {
            runId,
            variant: params.get('variant'),
            thresholds: params.getAll('th').map(decodeThreshold),
            kModerate: Number(params.get('km') ?? '2'),
            kHigh: Number(params.get('kh') ?? '3'),
            pinned: params.getAll('pin'),
        },
        map: {
            layer: layer as MapLayer,
            year: Number(params.get('year') ?? '2050'),
            compare: compareRunId !== null,
            compareRunId,
        },
    };
}
