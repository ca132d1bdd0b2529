import { readFileSync } from 'node:fs';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { ExplorerClient } from '../src/api';
import {
    avoidedLossRow,
    compareBounds,
    compareScenarios,
    gridsMatch,
} from '../src/compare';
import { legendBounds, sharedBounds } from '../src/choropleth';
import { LocalitySummary, RiskIndexPayload, RunDescriptor } from '../src/types';

const FIXTURES = join(__dirname, 'fixtures');

function load<T>(name: string): T {
    return JSON.parse(readFileSync(join(FIXTURES, name), 'utf-8')) as T;
}

const RUNS = load<RunDescriptor[]>('runs.json');
const CP = RUNS.find((r) => r.scenario === 'CP')!;
const B2 = RUNS.find((r) => r.scenario === 'B2')!;

function summary(scenario: string, variant: string): LocalitySummary {
    return load<LocalitySummary>(`summary_${scenario}_${variant}.json`);
}

/** Serves the recorded locality summaries. */
function fixtureFetch(url: string): Promise<Response> {
    const m = /\/runs\/(\w+)\/localities\/([\w-]+)\/summary\?variant=([\w.]+)/.exec(url);
    if (m === null) {
        return Promise.resolve(new Response('{"detail":"unknown"}', { status: 404 }));
    }
    const body = readFileSync(join(FIXTURES, `summary_${m[1]}_${m[3]}.json`), 'utf-8');
    return Promise.resolve(new Response(body, { status: 200 }));
}

describe('grid matching', () => {
    it('accepts the CP/B2 demo pair', () => {
        expect(gridsMatch(CP.grid, B2.grid)).toBe(true);
    });

    it('flags a resolution mismatch', () => {
        expect(gridsMatch(CP.grid, { ...B2.grid, resolution: 2.0 })).toBe(false);
    });
});

describe('avoided losses', () => {
    it('is zero when A equals B', () => {
        const s = summary('cp', 'K');
        expect(avoidedLossRow(s, s).avoided).toBe(0);
    });

    it('is PV(A) - PV(B) straight from the payloads', () => {
        const a = summary('cp', 'RU_d');
        const b = summary('b2', 'RU_d');
        const row = avoidedLossRow(a, b);
        expect(row.avoided).toBe(a.pv_mean - b.pv_mean);
        expect(row.relativeA).toBe(a.relative_pv);
        expect(row.relativeB).toBe(b.relative_pv);
    });

    it('refuses to mix variants', () => {
        expect(() => avoidedLossRow(summary('cp', 'K'), summary('b2', 'RU_d'))).toThrow(
            /variant mismatch/,
        );
    });

    it('CP vs B2 shows nonnegative avoided losses for all shared variants', async () => {
        const client = new ExplorerClient('http://test', fixtureFetch);
        const result = await compareScenarios(client, CP, B2, 'MEX');
        expect(result.mismatch).toBe(false);
        expect(result.rows.length).toBe(CP.variants.length);
        for (const row of result.rows) {
            expect(row.avoided).toBeGreaterThanOrEqual(0);
        }
    });

    it('reports a mismatch banner instead of rows when grids differ', async () => {
        const client = new ExplorerClient('http://test', fixtureFetch);
        const other = { ...B2, grid: { ...B2.grid, n_cells: 9 } };
        const result = await compareScenarios(client, CP, other, 'MEX');
        expect(result).toEqual({ rows: [], mismatch: true });
    });
});

describe('shared compare scale', () => {
    it('covers both payloads for each layer', () => {
        const a = load<RiskIndexPayload>('risk_index_cp.json');
        const b = load<RiskIndexPayload>('risk_index_b2.json');
        for (const layer of ['moderate_dates', 'high_prob'] as const) {
            const union = compareBounds(a, b, layer);
            expect(union).toEqual(
                sharedBounds(legendBounds(a[layer], a.no_date), legendBounds(b[layer], b.no_date)),
            );
        }
    });
});
