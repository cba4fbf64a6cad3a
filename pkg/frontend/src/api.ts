import type {
  CorpusUploadResponse,
  HistoryResponse,
  NextBatchResponse,
  SessionSummary,
  SubmitLabelsResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Thin typed client over the session HTTP API; fetch is injectable for tests. */
export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let message = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { error?: string };
        if (body && typeof body.error === "string") message = body.error;
      } catch {
        // non-JSON error body; keep the status message
      }
      throw new ApiError(message, response.status);
    }
    return (await response.json()) as T;
  }

  health(): Promise<Response> {
    return this.fetchFn(`${this.baseUrl}/healthz`);
  }

  uploadCorpus(jsonl: string, embed?: string): Promise<CorpusUploadResponse> {
    const query = embed ? `?embed=${encodeURIComponent(embed)}` : "";
    return this.request(`/corpora${query}`, { method: "POST", body: jsonl });
  }

  createSession(corpusId: string, config: Record<string, unknown>): Promise<{ session_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ corpus_id: corpusId, config }),
    });
  }

  getSession(sessionId: string): Promise<SessionSummary> {
    return this.request(`/sessions/${sessionId}`);
  }

  nextBatch(sessionId: string): Promise<NextBatchResponse> {
    return this.request(`/sessions/${sessionId}/next-batch`);
  }

  submitLabels(sessionId: string, labels: Record<string, string>): Promise<SubmitLabelsResponse> {
    return this.request(`/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ labels }),
    });
  }

  history(sessionId: string): Promise<HistoryResponse> {
    return this.request(`/sessions/${sessionId}/history`);
  }

  historyCsvUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/history.csv`;
  }
}
