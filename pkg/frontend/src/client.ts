/**
 * Typed client for the session service.
 *
 * All mutating calls for one session are sequenced through an in-flight
 * queue, so a brush confirmation can never overtake the edit before it and
 * observe a half-applied session. Reads bypass the queue.
 */

import type { AnnotationDto, EvidenceSetDto, SessionState } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: Record<string, unknown>;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: Record<string, unknown>;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

/** True when the server no longer knows the session; the UI should refetch. */
export function isStaleSession(error: unknown): boolean {
  return error instanceof ApiError && error.status === 404 && error.code === "session_not_found";
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;
  private readonly queues = new Map<string, Promise<unknown>>();

  constructor(baseUrl = "", fetchImpl: FetchLike = fetch) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw new ApiError(response.status, (await response.json()) as ApiErrorBody);
    }
    return (await response.json()) as T;
  }

  /** Chain a mutation onto the session's queue; failures do not stall it. */
  private enqueue<T>(sessionId: string, job: () => Promise<T>): Promise<T> {
    const previous = this.queues.get(sessionId) ?? Promise.resolve();
    const next = previous.then(job, job);
    this.queues.set(
      sessionId,
      next.catch(() => undefined),
    );
    return next;
  }

  createSession(prompt: string, numSamples: number): Promise<{ session_id: string; state: SessionState }> {
    return this.request("POST", "/api/sessions", { prompt, num_samples: numSamples });
  }

  getSession(sessionId: string): Promise<{ state: SessionState }> {
    return this.request("GET", `/api/sessions/${sessionId}`);
  }

  suggestBrush(
    sessionId: string,
    sentenceIndex: number,
    start: number,
    end: number,
  ): Promise<{ suggested_question: string; token: string }> {
    return this.enqueue(sessionId, () =>
      this.request("POST", `/api/sessions/${sessionId}/brush`, {
        sentence_index: sentenceIndex,
        start,
        end,
      }),
    );
  }

  confirmBrush(sessionId: string, token: string): Promise<{ annotation: AnnotationDto }> {
    return this.enqueue(sessionId, () =>
      this.request("POST", `/api/sessions/${sessionId}/brush/confirm`, { token }),
    );
  }

  applyEdit(sessionId: string, newText: string): Promise<{ state: SessionState }> {
    return this.enqueue(sessionId, () =>
      this.request("POST", `/api/sessions/${sessionId}/edit`, { new_text: newText }),
    );
  }

  fetchEvidence(sessionId: string, target: string): Promise<{ evidence: EvidenceSetDto }> {
    const query = encodeURIComponent(target);
    return this.request("GET", `/api/sessions/${sessionId}/evidence?target=${query}`);
  }
}
