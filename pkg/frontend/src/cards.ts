/**
 * Locality drilldown cards. Every row records the payload field it came
 * from, so the on-screen number is traceable to the raw API response.
 */

import { LocalitySummary } from './types';

export interface CardRow {
    label: string;
    value: string;
    /** dotted path of the payload field this value displays */
    source: string;
}

export interface LocalityCard {
    title: string;
    found: boolean;
    rows: CardRow[];
    /** loss % of GDP sparkline values, straight from the series payload */
    sparkline: number[];
}

function dollars(v: number): string {
    const abs = Math.abs(v);
    if (abs >= 1e12) return `$${(v / 1e12).toFixed(2)}T`;
    if (abs >= 1e9) return `$${(v / 1e9).toFixed(2)}B`;
    if (abs >= 1e6) return `$${(v / 1e6).toFixed(2)}M`;
    return `$${v.toFixed(0)}`;
}

function riskDate(date: number, noDate: number): string {
    return date === noDate ? 'not this century' : String(date);
}

export function localityCard(summary: LocalitySummary, sparkline: number[] = []): LocalityCard {
    return {
        title: `${summary.locality} — ${summary.variant}`,
        found: true,
        rows: [
            { label: 'PV of losses (ensemble mean)', value: dollars(summary.pv_mean), source: 'pv_mean' },
            { label: 'PV of losses (median)', value: dollars(summary.pv_median), source: 'pv_median' },
            {
                label: '90% interval',
                value: `${dollars(summary.pv_p5)} – ${dollars(summary.pv_p95)}`,
                source: 'pv_p5,pv_p95',
            },
            {
                label: 'Relative PV',
                value: `${(summary.relative_pv * 100).toFixed(1)}% of ${summary.units.relative_pv.replace('fraction of ', '')}`,
                source: 'relative_pv',
            },
            {
                label: 'Moderate risk (median date)',
                value: riskDate(summary.risk_dates.moderate.median_date, summary.no_date),
                source: 'risk_dates.moderate.median_date',
            },
            {
                label: 'High risk (median date)',
                value: riskDate(summary.risk_dates.high.median_date, summary.no_date),
                source: 'risk_dates.high.median_date',
            },
            { label: 'Cells', value: String(summary.n_cells), source: 'n_cells' },
        ],
        sparkline,
    };
}

/** Card rendered on a 404 from the locality endpoint. */
export function notFoundCard(code: string): LocalityCard {
    return {
        title: code,
        found: false,
        rows: [{ label: 'error', value: `no locality '${code}' in this run`, source: '' }],
        sparkline: [],
    };
}
