/** Thin typed client for the exploration service; all state lives server-side. */

import type {
  ApiErrorBody,
  DataPoint,
  ExplorationSummary,
  RunDetail,
  RunSource,
  RunSummary,
  StepResult,
  Verdict,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Raised when the service answers with a {status, code, message} body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let body: ApiErrorBody | null = null;
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    // non-JSON error body: fall through to the generic message
  }
  throw new ApiError(
    body?.status ?? response.status,
    body?.code ?? "http_error",
    body?.message ?? `request failed with status ${response.status}`,
  );
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private get<T>(path: string): Promise<T> {
    return this.fetchImpl(this.baseUrl + path).then((r) => unwrap<T>(r));
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    }).then((r) => unwrap<T>(r));
  }

  listRuns(): Promise<RunSummary[]> {
    return this.get("/api/runs");
  }

  getRun(runId: string): Promise<RunDetail> {
    return this.get(`/api/runs/${encodeURIComponent(runId)}`);
  }

  getRunSource(runId: string): Promise<RunSource> {
    return this.get(`/api/runs/${encodeURIComponent(runId)}/source`);
  }

  listDataPoints(opts: { verdict?: Verdict; feasible?: boolean; order?: string; limit?: number } = {}): Promise<DataPoint[]> {
    const params = new URLSearchParams();
    if (opts.verdict !== undefined) params.set("verdict", opts.verdict);
    if (opts.feasible !== undefined) params.set("feasible", String(opts.feasible));
    if (opts.order !== undefined) params.set("order", opts.order);
    if (opts.limit !== undefined) params.set("limit", String(opts.limit));
    const query = params.toString();
    return this.get(`/api/datapoints${query ? `?${query}` : ""}`);
  }

  submitVerdict(pointId: string, verdict: "accepted" | "rejected", notes: string): Promise<{ point_id: string; verdict: string; records: number }> {
    return this.post(`/api/datapoints/${encodeURIComponent(pointId)}/verdict`, { verdict, notes });
  }

  createExploration(config: Record<string, unknown>): Promise<{ exploration_id: string }> {
    return this.post("/api/explorations", config);
  }

  stepExploration(explorationId: string): Promise<StepResult> {
    return this.post(`/api/explorations/${encodeURIComponent(explorationId)}/step`);
  }

  getExploration(explorationId: string): Promise<ExplorationSummary> {
    return this.get(`/api/explorations/${encodeURIComponent(explorationId)}`);
  }

  search(q: string, k = 10): Promise<{ doc_id: string; score: number }[]> {
    const params = new URLSearchParams({ q, k: String(k) });
    return this.get(`/api/search?${params}`);
  }
}
