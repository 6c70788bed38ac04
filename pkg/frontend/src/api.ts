/** Thin JSON client for the prediction service. The fetch implementation is
 * injectable so tests can run without a network or a DOM. */

import type { CaseValues, ImportancesDoc, PredictResponse, SchemaDoc } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly field: string | null = null,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async schema(): Promise<SchemaDoc> {
    const resp = await this.fetchImpl(this.url("/schema"));
    if (!resp.ok) throw new ApiError(`schema fetch failed (${resp.status})`, resp.status);
    return resp.json();
  }

  async importances(): Promise<ImportancesDoc> {
    const resp = await this.fetchImpl(this.url("/importances"));
    if (!resp.ok) throw new ApiError(`importances fetch failed (${resp.status})`, resp.status);
    return resp.json();
  }

  async predict(values: CaseValues, mode?: "label" | "probability"): Promise<PredictResponse> {
    const resp = await this.fetchImpl(this.url("/predict"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(mode ? { values, mode } : { values }),
    });
    if (!resp.ok) {
      let field: string | null = null;
      let detail = `predict failed (${resp.status})`;
      try {
        const body = await resp.json();
        field = body.field ?? null;
        detail = body.error ?? detail;
      } catch {
        // non-JSON error body: keep the generic message
      }
      throw new ApiError(detail, resp.status, field);
    }
    return resp.json();
  }
}

export function resolveBaseUrl(search: string, origin: string): string {
  const match = /[?&]api=([^&]+)/.exec(search);
  if (match) return decodeURIComponent(match[1]);
  return origin.replace(/:\d+$/, ":8000");
}
