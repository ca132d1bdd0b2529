/**
 * End-to-end explorer flow against recorded server responses: submit the
 * default four-threshold index, render both risk maps, verify raster bytes
 * equal the CLI export, check CP-vs-B2 avoided losses, and round-trip the
 * view through a shareable URL.
 */

import { readFileSync } from 'node:fs';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { ExplorerClient } from '../src/api';
import { localityCard, notFoundCard } from '../src/cards';
import { renderChoropleth } from '../src/choropleth';
import { compareScenarios } from '../src/compare';
import { decodeState, defaultState, encodeState, toRiskIndexRequest } from '../src/state';
import { LocalitySummary, RiskIndexPayload, RunDescriptor } from '../src/types';

const FIXTURES = join(__dirname, 'fixtures');

function load<T>(name: string): T {
    return JSON.parse(readFileSync(join(FIXTURES, name), 'utf-8')) as T;
}

function binary(name: string): Buffer {
    return readFileSync(join(FIXTURES, name));
}

/** Replays every recorded endpoint of the demo server. */
function fixtureFetch(url: string, init?: RequestInit): Promise<Response> {
    if (url.endsWith('/runs')) {
        return Promise.resolve(new Response(readFileSync(join(FIXTURES, 'runs.json'), 'utf-8')));
    }
    const locality = /\/runs\/(\w+)\/localities\/([\w-]+)\/summary\?variant=([\w.]+)/.exec(url);
    if (locality !== null) {
        if (locality[2] !== 'MEX') {
            return Promise.resolve(new Response('{"detail":"unknown locality"}', { status: 404 }));
        }
        return Promise.resolve(
            new Response(readFileSync(join(FIXTURES, `summary_${locality[1]}_${locality[3]}.json`), 'utf-8')),
        );
    }
    const risk = /\/runs\/(\w+)\/risk-index$/.exec(url);
    if (risk !== null) {
        const body = JSON.parse((init?.body as string) ?? '{}') as { format?: string };
        if (body.format === 'raster') {
            const bytes = binary('api_moderate_dates.grdx');
            return Promise.resolve(
                new Response(new Uint8Array(bytes), {
                    status: 200,
                    headers: { 'Content-Type': 'application/octet-stream' },
                }),
            );
        }
        return Promise.resolve(
            new Response(readFileSync(join(FIXTURES, `risk_index_${risk[1]}.json`), 'utf-8')),
        );
    }
    return Promise.resolve(new Response('{"detail":"not found"}', { status: 404 }));
}

describe('explorer end to end (recorded demo store)', () => {
    const client = new ExplorerClient('http://demo', fixtureFetch);

    it('submits the default index and renders moderate and high maps', async () => {
        const runs = await client.listRuns();
        const cp = runs.find((r) => r.scenario === 'CP')!;
        const state = defaultState(cp.id);
        state.panel.variant = 'RU_d';
        const { payload } = await client.riskIndex(cp.id, toRiskIndexRequest(state.panel));

        const moderate = renderChoropleth(payload, 'moderate_dates', cp.grid);
        expect(moderate.nCells).toBe(cp.grid.n_cells);
        // non-empty legend: some demo cells reach the moderate level
        expect(moderate.bounds).not.toBeNull();
        expect(moderate.svg).toContain('class="legend"');

        // the high map renders every cell too; cells that never reach the
        // level carry the sentinel styling
        const high = renderChoropleth(payload, 'high_dates', cp.grid);
        expect(high.nCells).toBe(cp.grid.n_cells);
        expect(high.svg).toContain('class="legend"');
        const highProb = renderChoropleth(payload, 'high_prob', cp.grid);
        expect(highProb.bounds).not.toBeNull();
        // high-risk dates never precede moderate-risk dates (display check
        // on the payload; the invariant itself is enforced server-side)
        payload.high_dates.forEach((h, i) => {
            const m = payload.moderate_dates[i] as number;
            if (h !== payload.no_date && m !== payload.no_date) {
                expect(h).toBeGreaterThanOrEqual(m);
            }
        });
    });

    it('raster payload bytes equal the CLI export byte for byte', async () => {
        const state = defaultState('cp');
        state.panel.variant = 'RU_d';
        const { bytes } = await client.riskIndexRaster(
            'cp',
            toRiskIndexRequest(state.panel),
            'moderate_dates',
        );
        const cli = binary('cli_moderate_dates.grdx');
        expect(Buffer.from(bytes).equals(cli)).toBe(true);
    });

    it('CP vs B2 compare shows nonnegative avoided losses for all variants', async () => {
        const runs = await client.listRuns();
        const cp = runs.find((r) => r.scenario === 'CP')!;
        const b2 = runs.find((r) => r.scenario === 'B2')!;
        const result = await compareScenarios(client, cp, b2, 'MEX');
        expect(result.mismatch).toBe(false);
        expect(result.rows.length).toBeGreaterThan(0);
        for (const row of result.rows) {
            expect(row.avoided).toBeGreaterThanOrEqual(0);
        }
    });

    it('URL round trip restores identical view state', async () => {
        const runs = await client.listRuns();
        const state = defaultState(runs[0]!.id);
        state.panel.variant = 'RU_d';
        state.panel.pinned = ['MEX'];
        state.map.layer = 'high_prob';
        state.map.year = 2075;
        state.map.compare = true;
        state.map.compareRunId = runs[1]!.id;
        const link = encodeState(state);
        expect(decodeState(link)).toEqual(state);
        // and the restored state produces the identical request body
        expect(toRiskIndexRequest(decodeState(link).panel)).toEqual(
            toRiskIndexRequest(state.panel),
        );
    });

    it('locality drilldown card shows payload values; unknown code gets a not-found card', async () => {
        const summary = await client.localitySummary('cp', 'MEX', 'RU_d');
        const card = localityCard(summary);
        expect(card.found).toBe(true);
        const sources = card.rows.map((r) => r.source);
        expect(sources).toContain('pv_mean');
        expect(sources).toContain('risk_dates.moderate.median_date');

        await expect(client.localitySummary('cp', 'ATLANTIS', 'RU_d')).rejects.toMatchObject({
            status: 404,
        });
        expect(notFoundCard('ATLANTIS').found).toBe(false);
    });

    it('whole-country card numbers are formatted payload fields, nothing else', () => {
        const summary = load<LocalitySummary>('summary_cp_RU_d.json');
        const card = localityCard(summary);
        const pvRow = card.rows.find((r) => r.source === 'pv_mean')!;
        // parse the "$x.xxT/B/M" string back and compare to the raw field
        const m = /^\$([\d.]+)([TBM]?)$/.exec(pvRow.value)!;
        const scale = { T: 1e12, B: 1e9, M: 1e6, '': 1 }[m[2] as 'T' | 'B' | 'M' | ''];
        const rounded = Number(m[1]) * scale;
        expect(Math.abs(rounded - summary.pv_mean)).toBeLessThanOrEqual(0.005 * scale);
        expect(card.rows.find((r) => r.source === 'n_cells')!.value).toBe(String(summary.n_cells));
        expect(card.rows.find((r) => r.source === 'risk_dates.high.median_date')).toBeDefined();
    });
});
