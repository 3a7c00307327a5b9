import type {
  BatchDetail,
  BatchSummary,
  Decision,
  DecisionInput,
  ImpactResponse,
  MetricsReport,
  ProjectSummary,
} from "./types";

export class ApiError extends Error {
  status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

export interface ClientOptions {
  baseUrl?: string;
  token?: string;
  fetchFn?: typeof fetch;
}

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `request failed with status ${res.status}`;
}

export class ApiClient {
  private baseUrl: string;
  private token: string;
  private fetchFn: typeof fetch;

  constructor(options: ClientOptions = {}) {
    this.baseUrl = options.baseUrl ?? "";
    this.token = options.token ?? "";
    // keep the default detached from `window` so call-through stays legal
    this.fetchFn = options.fetchFn ?? ((...args) => fetch(...args));
  }

  withToken(token: string): ApiClient {
    return new ApiClient({
      baseUrl: this.baseUrl,
      token,
      fetchFn: this.fetchFn,
    });
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = {};
    if (init?.body) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      ...init,
      headers,
    });
    if (!res.ok) {
      throw new ApiError(res.status, await errorDetail(res));
    }
    return res.json() as Promise<T>;
  }

  getProjects(): Promise<ProjectSummary[]> {
    return this.request("/projects");
  }

  getBatches(projectId: string): Promise<BatchSummary[]> {
    return this.request(`/projects/${encodeURIComponent(projectId)}/batches`);
  }

  getBatch(batchId: string): Promise<BatchDetail> {
    return this.request(`/batches/${encodeURIComponent(batchId)}`);
  }

  postDecision(
    batchId: string,
    decision: DecisionInput,
  ): Promise<{ recorded: Decision[] }> {
    return this.request(
      `/batches/${encodeURIComponent(batchId)}/decisions`,
      { method: "POST", body: JSON.stringify([decision]) },
    );
  }

  getMetrics(): Promise<MetricsReport> {
    return this.request("/metrics");
  }

  getImpact(windowDays?: number): Promise<ImpactResponse> {
    const query = windowDays === undefined ? "" : `?window_days=${windowDays}`;
    return this.request(`/impact${query}`);
  }
}
