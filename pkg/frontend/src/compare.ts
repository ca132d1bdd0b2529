/**
 * A/B scenario comparison: paired maps on a common color scale and an
 * avoided-loss readout. All numbers are display arithmetic on API payload
 * fields (avoided losses = PV(A) − PV(B)).
 */

import { ExplorerClient } from './api';
import { legendBounds, LegendBounds, sharedBounds } from './choropleth';
import { GridInfo, LocalitySummary, RiskIndexPayload, RiskLayer, RunDescriptor } from './types';

/** Both runs must share a grid; otherwise the UI shows a mismatch banner. */
export function gridsMatch(a: GridInfo, b: GridInfo): boolean {
    return (
        a.lat_min === b.lat_min &&
        a.lat_max === b.lat_max &&
        a.lon_min === b.lon_min &&
        a.lon_max === b.lon_max &&
        a.resolution === b.resolution &&
        a.n_cells === b.n_cells
    );
}

export interface AvoidedLossRow {
    variant: string;
    pvA: number;
    pvB: number;
    /** PV(A) − PV(B), in the payloads' PV units */
    avoided: number;
    relativeA: number;
    relativeB: number;
}

/** One readout row from two locality summaries of the same variant. */
export function avoidedLossRow(a: LocalitySummary, b: LocalitySummary): AvoidedLossRow {
    if (a.variant !== b.variant) {
        throw new Error(`variant mismatch: '${a.variant}' vs '${b.variant}'`);
    }
    return {
        variant: a.variant,
        pvA: a.pv_mean,
        pvB: b.pv_mean,
        avoided: a.pv_mean - b.pv_mean,
        relativeA: a.relative_pv,
        relativeB: b.relative_pv,
    };
}

export interface CompareResult {
    rows: AvoidedLossRow[];
    mismatch: boolean;
}

/**
 * Build the avoided-loss table for every variant both runs carry. Returns
 * mismatch=true (and no rows) when the grids differ, so the caller renders
 * the banner instead of maps.
 */
export async function compareScenarios(
    client: ExplorerClient,
    runA: RunDescriptor,
    runB: RunDescriptor,
    locality: string,
): Promise<CompareResult> {
    if (!gridsMatch(runA.grid, runB.grid)) {
        return { rows: [], mismatch: true };
    }
    const variants = runA.variants.filter((v) => runB.variants.includes(v));
    const rows: AvoidedLossRow[] = [];
    for (const variant of variants) {
        const [a, b] = await Promise.all([
            client.localitySummary(runA.id, locality, variant),
            client.localitySummary(runB.id, locality, variant),
        ]);
        rows.push(avoidedLossRow(a, b));
    }
    return { rows, mismatch: false };
}

/** Shared color scale for one layer across paired payloads. */
export function compareBounds(
    a: RiskIndexPayload,
    b: RiskIndexPayload,
    layer: RiskLayer,
): LegendBounds | null {
    return sharedBounds(legendBounds(a[layer], a.no_date), legendBounds(b[layer], b.no_date));
}
