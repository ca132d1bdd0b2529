/**
 * Typed client for the run-store HTTP API. The fetch implementation is
 * injectable so tests can run against recorded payloads.
 */

import {
    CellSeriesPayload,
    LocalitySummary,
    RiskIndexPayload,
    RiskIndexRequestBody,
    RiskLayer,
    RunDescriptor,
    Variable,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        message: string,
    ) {
        super(message);
        this.name = 'ApiError';
    }
}

/** Cache metadata the server attaches to risk-index responses. */
export interface CacheInfo {
    requestHash: string;
    cache: 'hit' | 'miss' | null;
}

async function raiseForStatus(res: Response): Promise<void> {
    if (res.ok) {
        return;
    }
    let detail = res.statusText;
    try {
        const body = (await res.json()) as { detail?: string };
        if (typeof body.detail === 'string') {
            detail = body.detail;
        }
    } catch {
        // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail);
}

function cacheInfo(res: Response): CacheInfo {
    const hit = res.headers.get('X-Cache');
    return {
        requestHash: res.headers.get('X-Request-Hash') ?? '',
        cache: hit === 'hit' || hit === 'miss' ? hit : null,
    };
}

export class ExplorerClient {
    constructor(
        private readonly baseUrl: string,
        private readonly fetchImpl: FetchLike = fetch,
    ) {}

    private url(path: string, query?: Record<string, string>): string {
        const base = this.baseUrl.replace(/\/$/, '') + path;
        if (query === undefined || Object.keys(query).length === 0) {
            return base;
        }
        return `${base}?${new URLSearchParams(query).toString()}`;
    }

    async listRuns(): Promise<RunDescriptor[]> {
        const res = await this.fetchImpl(this.url('/runs'));
        await raiseForStatus(res);
        return (await res.json()) as RunDescriptor[];
    }

    async cellSeries(
        runId: string,
        cell: number,
        variable: Variable,
        options: { variant?: string; quantiles?: number[] } = {},
    ): Promise<CellSeriesPayload> {
        const query: Record<string, string> = { variable };
        if (options.variant !== undefined) {
            query.variant = options.variant;
        }
        if (options.quantiles !== undefined) {
            query.quantiles = options.quantiles.join(',');
        }
        const res = await this.fetchImpl(
            this.url(`/runs/${encodeURIComponent(runId)}/cells/${cell}/series`, query),
        );
        await raiseForStatus(res);
        return (await res.json()) as CellSeriesPayload;
    }

    async riskIndex(
        runId: string,
        body: RiskIndexRequestBody,
    ): Promise<{ payload: RiskIndexPayload } & CacheInfo> {
        const res = await this.fetchImpl(this.url(`/runs/${encodeURIComponent(runId)}/risk-index`), {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify({ ...body, format: 'json' }),
        });
        await raiseForStatus(res);
        return { payload: (await res.json()) as RiskIndexPayload, ...cacheInfo(res) };
    }

    async riskIndexRaster(
        runId: string,
        body: RiskIndexRequestBody,
        layer: RiskLayer,
    ): Promise<{ bytes: ArrayBuffer } & CacheInfo> {
        const res = await this.fetchImpl(this.url(`/runs/${encodeURIComponent(runId)}/risk-index`), {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify({ ...body, format: 'raster', layer }),
        });
        await raiseForStatus(res);
        return { bytes: await res.arrayBuffer(), ...cacheInfo(res) };
    }

    async localitySummary(
        runId: string,
        admin: string,
        variant?: string,
    ): Promise<LocalitySummary> {
        const query: Record<string, string> = {};
        if (variant !== undefined) {
            query.variant = variant;
        }
        const res = await this.fetchImpl(
            this.url(
                `/runs/${encodeURIComponent(runId)}/localities/${encodeURIComponent(admin)}/summary`,
                query,
            ),
        );
        await raiseForStatus(res);
        return (await res.json()) as LocalitySummary;
    }
}
