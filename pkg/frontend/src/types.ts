/**
 * Typed mirrors of the HTTP API payloads. The explorer performs no domain
 * math beyond display arithmetic: every number rendered on screen comes
 * from one of these fields.
 */

export const VARIABLES = ['dt', 'dp', 'loss_pct', 'loss_value'] as const;
export type Variable = (typeof VARIABLES)[number];

export type Comparator = '>=' | '<=';

/** Sentinel used by the server for "threshold never crossed this century". */
export const NO_DATE = -1;

export interface GridInfo {
    lat_min: number;
    lat_max: number;
    lon_min: number;
    lon_max: number;
    resolution: number;
    n_cells: number;
}

export interface RunDescriptor {
    id: string;
    scenario: string;
    variants: string[];
    n_realizations: number;
    year_start: number;
    year_end: number;
    country: string | null;
    discount_rate: number;
    config_hash: string;
    grid: GridInfo;
}

export interface CellSeriesPayload {
    run: string;
    cell: number;
    lat: number;
    lon: number;
    variable: Variable;
    variant: string | null;
    units: string;
    config_hash: string;
    years: number[];
    series: Record<string, number[]>;
}

export interface ThresholdBody {
    variable: Variable;
    comparator: Comparator;
    level: number;
    window: number;
}

/** Body of POST /runs/{id}/risk-index. */
export interface RiskIndexRequestBody {
    thresholds: ThresholdBody[];
    k_moderate: number;
    k_high: number;
    variant?: string;
    bbox?: [number, number, number, number];
    format?: 'json' | 'raster';
    layer?: RiskLayer;
}

export const RISK_LAYERS = [
    'moderate_dates',
    'moderate_prob',
    'high_dates',
    'high_prob',
] as const;
export type RiskLayer = (typeof RISK_LAYERS)[number];

export interface RiskIndexPayload {
    run: string;
    config_hash: string;
    request_hash: string;
    k_moderate: number;
    k_high: number;
    variant: string;
    no_date: number;
    units: { dates: string; probability: string };
    cells: number[];
    lat: number[];
    lon: number[];
    moderate_dates: number[];
    moderate_prob: number[];
    high_dates: number[];
    high_prob: number[];
}

export interface RiskDateSummary {
    median_date: number;
    cells_with_date: number;
    mean_probability: number;
}

export interface LocalitySummary {
    run: string;
    locality: string;
    variant: string;
    config_hash: string;
    n_cells: number;
    units: { pv: string; relative_pv: string };
    discount_rate: number;
    pv_mean: number;
    pv_median: number;
    pv_p5: number;
    pv_p95: number;
    reference_gdp: number;
    relative_pv: number;
    risk_dates: { moderate: RiskDateSummary; high: RiskDateSummary };
    no_date: number;
}
