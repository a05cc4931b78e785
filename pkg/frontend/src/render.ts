/** Pure view construction for plan responses. Views are built as data
 * first (testable without a DOM) and turned into HTML strings by the
 * renderers below; rows always keep the server's ranking order. */

import { WirePlan, WireResponse } from './types.js';

export interface PlanRow {
  rank: number;
  hardware: string; // e.g. "2 x a100-80g"
  parallelism: string; // e.g. "dp2 / tp1"
  framework: string;
  optimizations: string;
  ttft: string;
  throughput: string;
  batchLatency: string;
  cost: string;
}

export type View =
  | { kind: 'plans'; rows: PlanRow[] }
  | { kind: 'no_feasible'; constraint: string | null; suggestion: string }
  | { kind: 'error'; message: string; retryable: boolean };

const SUGGESTIONS: Record<string, string> = {
  budget: 'Raise the budget or pick a smaller model.',
  memory_capacity: 'The model weights do not fit; allow more GPUs per replica or a bigger GPU.',
  kv_memory: 'Shorten the sequence, reduce the batch, or relax precision tolerance.',
  throughput_floor: 'Lower the throughput requirement or raise the budget.',
  latency_ceiling: 'Relax the latency preference or raise the budget.',
};

function formatOpts(plan: WirePlan): string {
  const parts: string[] = [];
  if (plan.optimizations.flash_attention) parts.push('flash');
  if (plan.optimizations.h2o) parts.push(`h2o@${plan.optimizations.h2o_keep_ratio}`);
  return parts.length ? parts.join('+') : 'none';
}

export function planRow(plan: WirePlan, rank: number): PlanRow {
  return {
    rank,
    hardware: `${plan.gpu_count} x ${plan.gpu}`,
    parallelism: `dp${plan.dp} / tp${plan.tp}`,
    framework: plan.framework,
    optimizations: formatOpts(plan),
    ttft: `${(plan.metrics.ttft * 1000).toFixed(1)} ms`,
    throughput: `${plan.metrics.throughput.toFixed(0)} tok/s`,
    batchLatency: `${plan.metrics.batch_latency.toFixed(3)} s`,
    cost: plan.cost.toFixed(0),
  };
}

/** Classify a service response; never reorders the server's plans. */
export function planView(resp: WireResponse): View {
  if (resp.plans && resp.plans.length > 0) {
    return { kind: 'plans', rows: resp.plans.map((p, i) => planRow(p, i + 1)) };
  }
  if (resp.error && resp.error.code === 'NO_FEASIBLE_PLAN') {
    const constraint = resp.error.binding_constraint ?? null;
    return {
      kind: 'no_feasible',
      constraint,
      suggestion: (constraint && SUGGESTIONS[constraint]) || 'Relax a constraint and retry.',
    };
  }
  return {
    kind: 'error',
    message: resp.error ? `${resp.error.code}: ${resp.error.message}` : 'empty response',
    retryable: false,
  };
}

export function networkErrorView(detail: string): View {
  return { kind: 'error', message: `request failed: ${detail}`, retryable: true };
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderView(view: View): string {
  if (view.kind === 'plans') {
    const header =
      '<tr><th>#</th><th>hardware</th><th>parallelism</th><th>framework</th>' +
      '<th>optimizations</th><th>TTFT</th><th>throughput</th><th>batch latency</th>' +
      '<th>cost</th></tr>';
    const rows = view.rows
      .map(
        (r) =>
          `<tr><td>${r.rank}</td><td>${escapeHtml(r.hardware)}</td>` +
          `<td>${r.parallelism}</td><td>${escapeHtml(r.framework)}</td>` +
          `<td>${escapeHtml(r.optimizations)}</td><td>${r.ttft}</td>` +
          `<td>${r.throughput}</td><td>${r.batchLatency}</td><td>${r.cost}</td></tr>`,
      )
      .join('');
    return `<table class="plans">${header}${rows}</table>`;
  }
  if (view.kind === 'no_feasible') {
    const label = view.constraint ? escapeHtml(view.constraint) : 'unknown';
    return (
      `<div class="banner no-feasible"><strong>No feasible plan.</strong> ` +
      `Binding constraint: <code>${label}</code>. ${escapeHtml(view.suggestion)}</div>`
    );
  }
  const retry = view.retryable ? '<button id="retry">Retry</button>' : '';
  return `<div class="banner error">${escapeHtml(view.message)} ${retry}</div>`;
}
