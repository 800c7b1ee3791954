import type {
  ApiErrorBody,
  AppConfig,
  BenchmarkRequest,
  BenchmarkResponse,
  SaRunHandle,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(body.detail || body.error || `HTTP ${status}`);
    this.status = status;
    this.body = body;
  }
}

async function errorBody(response: Response): Promise<ApiErrorBody> {
  try {
    const data = (await response.json()) as Partial<ApiErrorBody>;
    return {
      error: data.error ?? "unknown",
      detail: data.detail ?? `HTTP ${response.status}`,
      fields: data.fields ?? [],
    };
  } catch {
    return { error: "unknown", detail: `HTTP ${response.status}`, fields: [] };
  }
}

/** Thin typed client over the v1 API; the fetch implementation is injectable
 *  so tests can run against a canned server. */
export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl: FetchLike = (...args) => fetch(...args)) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorBody(response));
    }
    return (await response.json()) as T;
  }

  getConfig(): Promise<AppConfig> {
    return this.request<AppConfig>("/api/v1/config");
  }

  postBenchmark(body: BenchmarkRequest): Promise<BenchmarkResponse> {
    return this.request<BenchmarkResponse>("/api/v1/benchmark", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  startSensitivityRun(config: Record<string, unknown>): Promise<SaRunHandle> {
    return this.request<SaRunHandle>("/api/v1/sensitivity/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
    });
  }

  getSensitivityRun(runId: string): Promise<SaRunHandle> {
    return this.request<SaRunHandle>(
      `/api/v1/sensitivity/runs/${encodeURIComponent(runId)}`,
    );
  }
}

/** Poll a sensitivity run until it reaches a terminal state. */
export async function pollRun(
  api: ApiClient,
  runId: string,
  opts: { intervalMs?: number; timeoutMs?: number; onUpdate?: (h: SaRunHandle) => void } = {},
): Promise<SaRunHandle> {
  const interval = opts.intervalMs ?? 500;
  const deadline = Date.now() + (opts.timeoutMs ?? 120_000);
  for (;;) {
    const handle = await api.getSensitivityRun(runId);
    opts.onUpdate?.(handle);
    if (handle.status === "done" || handle.status === "failed") {
      return handle;
    }
    if (Date.now() > deadline) {
      throw new Error(`run ${runId} did not finish in time`);
    }
    await new Promise((resolve) => setTimeout(resolve, interval));
  }
}
