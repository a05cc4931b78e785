/** Thin client for the /api/v1 endpoints. At most one plan request is
 * in flight: a new submission aborts the previous one, so stale
 * responses can never land on top of newer ones. */

import { catalogModelSchema, wireResponseSchema } from './schema.js';
import { CatalogModel, WireRequest, WireResponse } from './types.js';

export class NetworkError extends Error {}

type FetchLike = typeof fetch;

export class PlanClient {
  private inflight: AbortController | null = null;

  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  async listModels(): Promise<CatalogModel[]> {
    const resp = await this.request('/api/v1/catalog/models', { method: 'GET' });
    const body = await resp.json();
    return catalogModelSchema.array().parse(body);
  }

  /** Submit a plan request, cancelling any still-running one. Returns
   * null when this call was itself superseded by a newer submission. */
  async submitPlan(request: WireRequest): Promise<WireResponse | null> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const resp = await this.request('/api/v1/plan', {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(request),
        signal: controller.signal,
      });
      const body = await resp.json();
      if (resp.status === 404 || resp.status === 200) {
        return wireResponseSchema.parse(body) as WireResponse;
      }
      if (resp.status === 422) {
        // server rejected what our validation let through; surface the
        // detail as a domain error rather than a retryable failure
        return {
          error: { code: 'VALIDATION_ERROR', message: JSON.stringify(body.detail ?? body) },
        };
      }
      throw new NetworkError(`unexpected status ${resp.status}: ${JSON.stringify(body)}`);
    } catch (err) {
      if (controller.signal.aborted) {
        return null; // superseded; the newer submission owns the view
      }
      throw err instanceof NetworkError ? err : new NetworkError(String(err));
    } finally {
      if (this.inflight === controller) {
        this.inflight = null;
      }
    }
  }

  private async request(path: string, init: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new NetworkError(String(err));
    }
    if (resp.status >= 500) {
      throw new NetworkError(`server error ${resp.status}`);
    }
    return resp;
  }
}
