/**
 * Typed HTTP client for the labeling service.
 *
 * The annotator is a pure API consumer: every number it shows comes from
 * these endpoints verbatim, and every state change goes through them.  No
 * metric is ever recomputed client-side.
 */

export interface PendingInstance {
  instance_id: number;
  features: Record<string, number>;
  model_posterior: number[] | null;
  model_score: number | null;
  query_index: number | null;
  phase: "seed" | "query";
  class_names: string[];
}

export interface PendingResponse {
  schema_version: number;
  status: string;
  pending: PendingInstance | null;
}

export interface MetricSnapshot {
  query_index: number;
  ec: number;
  mu: number;
  cu: number;
  ce: number;
  ie: number;
  ic: number;
  s_al: number;
  accuracy: number | null;
}

export interface MetricsResponse {
  schema_version: number;
  from: number;
  total: number;
  snapshots: MetricSnapshot[];
  switches: number[];
}

export interface StrategyInfo {
  kind: string;
  measure: string;
  similarity: string;
}

export interface SessionSummary {
  schema_version: number;
  session_id: string;
  status: string;
  oracle_mode: string;
  queries_made: number;
  seed_count: number;
  seeds_remaining: number;
  budget: number;
  strategy: StrategyInfo;
  n_instances: number;
  n_labeled: number;
  n_classes: number;
  class_names: string[];
  snapshots: number;
}

export interface LabelSubmission {
  instance_id: number;
  class_index: number;
  z1: number;
  z2: number | null;
}

export interface LabelResponse {
  schema_version: number;
  accepted: boolean;
  status: string;
  queries_made: number;
  label_events: number;
  pending: PendingInstance | null;
}

/** Error carrying the HTTP status so callers can branch on 409 vs the rest. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function throwFromResponse(response: Response): Promise<never> {
  let detail = response.statusText || "request failed";
  try {
    const body: unknown = await response.json();
    if (body && typeof body === "object" && "detail" in body) {
      detail = String((body as { detail: unknown }).detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.url(path), {
      headers: { accept: "application/json" },
    });
    if (!response.ok) {
      await throwFromResponse(response);
    }
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      await throwFromResponse(response);
    }
    return (await response.json()) as T;
  }

  createSession(config: unknown): Promise<SessionSummary> {
    return this.postJson("/sessions", config);
  }

  getSummary(sessionId: string): Promise<SessionSummary> {
    return this.getJson(`/sessions/${sessionId}`);
  }

  getPending(sessionId: string): Promise<PendingResponse> {
    return this.getJson(`/sessions/${sessionId}/pending`);
  }

  submitLabel(
    sessionId: string,
    submission: LabelSubmission,
  ): Promise<LabelResponse> {
    return this.postJson(`/sessions/${sessionId}/label`, submission);
  }

  getMetrics(sessionId: string, from = 0): Promise<MetricsResponse> {
    return this.getJson(`/sessions/${sessionId}/metrics?from=${from}`);
  }

  stop(sessionId: string): Promise<SessionSummary> {
    return this.postJson(`/sessions/${sessionId}/stop`, {});
  }
}
