import { readFileSync } from 'node:fs';
import { createHash } from 'node:crypto';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { ApiError, ExplorerClient } from '../src/api';
import { defaultState, toRiskIndexRequest } from '../src/state';
import { RiskIndexPayload } from '../src/types';

const FIXTURES = join(__dirname, 'fixtures');

function fixture(name: string): string {
    return readFileSync(join(FIXTURES, name), 'utf-8');
}

/**
 * Minimal stand-in for the server: replays recorded payloads and mimics the
 * request-hash cache (first POST per body is a miss, repeats are hits).
 */
function makeServer() {
    const cache = new Set<string>();
    const calls: string[] = [];
    const fetchImpl = (url: string, init?: RequestInit): Promise<Response> => {
        calls.push(url);
        const respond = (body: string, status = 200, headers: Record<string, string> = {}) =>
            Promise.resolve(new Response(body, { status, headers }));

        if (url.endsWith('/runs')) {
            return respond(fixture('runs.json'));
        }
        if (/\/runs\/missing\//.test(url)) {
            return respond('{"detail":"unknown run \'missing\'"}', 404);
        }
        if (/\/cells\/\d+\/series/.test(url)) {
            if (url.includes('variable=volume')) {
                return respond('{"detail":"unknown variable \'volume\'"}', 400);
            }
            const series = {
                run: 'cp',
                cell: 800,
                lat: 20.25,
                lon: -99.75,
                variable: 'dt',
                variant: null,
                units: 'degC',
                config_hash: 'abc',
                years: [2010, 2011],
                series: { '50': [0.1, 0.2] },
            };
            return respond(JSON.stringify(series));
        }
        if (url.includes('/risk-index')) {
            const body = init?.body as string;
            const hash = createHash('sha256').update(body).digest('hex');
            const hit = cache.has(hash);
            cache.add(hash);
            return respond(fixture('risk_index_cp.json'), 200, {
                'X-Request-Hash': hash,
                'X-Cache': hit ? 'hit' : 'miss',
            });
        }
        return respond('{"detail":"not found"}', 404);
    };
    return { fetchImpl, calls };
}

describe('explorer API client', () => {
    it('lists runs with typed descriptors', async () => {
        const client = new ExplorerClient('http://test', makeServer().fetchImpl);
        const runs = await client.listRuns();
        expect(runs.map((r) => r.scenario).sort()).toEqual(['B2', 'CP']);
        for (const run of runs) {
            expect(run.grid.n_cells).toBeGreaterThan(0);
            expect(run.config_hash).toBeTruthy();
        }
    });

    it('fetches cell series with query parameters', async () => {
        const server = makeServer();
        const client = new ExplorerClient('http://test/', server.fetchImpl);
        const series = await client.cellSeries('cp', 800, 'dt', { quantiles: [50] });
        expect(series.series['50']).toEqual([0.1, 0.2]);
        expect(server.calls[0]).toBe('http://test/runs/cp/cells/800/series?variable=dt&quantiles=50');
    });

    it('surfaces server errors as ApiError with status and detail', async () => {
        const client = new ExplorerClient('http://test', makeServer().fetchImpl);
        await expect(client.listRuns().then(() => client.cellSeries('missing', 0, 'dt'))).rejects.toMatchObject({
            name: 'ApiError',
            status: 404,
        });
        await expect(
            client.cellSeries('cp', 800, 'volume' as never),
        ).rejects.toSatisfy((e: unknown) => e instanceof ApiError && e.status === 400);
    });

    it('identical state resubmitted is served from cache with the same hash', async () => {
        const client = new ExplorerClient('http://test', makeServer().fetchImpl);
        const body = toRiskIndexRequest(defaultState('cp').panel);
        const first = await client.riskIndex('cp', body);
        const second = await client.riskIndex('cp', body);
        expect(first.cache).toBe('miss');
        expect(second.cache).toBe('hit');
        expect(second.requestHash).toBe(first.requestHash);
        const payload: RiskIndexPayload = second.payload;
        expect(payload.moderate_dates.length).toBe(payload.cells.length);
    });
});
