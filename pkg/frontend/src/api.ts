import type { AnswerPayload, HitDoc, Progress } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: { status?: string; error?: string },
  ) {
    super(body.error ?? `request failed with ${status}`);
  }
}

export interface TaskApi {
  nextHit(workerId: string): Promise<HitDoc | null>;
  submitAnswer(payload: AnswerPayload): Promise<void>;
  progress(): Promise<Progress>;
}

/** Thin fetch wrapper over the three service endpoints. */
export class TaskApiClient implements TaskApi {
  constructor(readonly baseUrl: string) {}

  /** Next HIT for this worker, or null when none remain (204). */
  async nextHit(workerId: string): Promise<HitDoc | null> {
    const url = `${this.baseUrl}/hits/next?worker_id=${encodeURIComponent(workerId)}`;
    const resp = await fetch(url);
    if (resp.status === 204) return null;
    if (!resp.ok) throw new ApiError(resp.status, await resp.json().catch(() => ({})));
    return (await resp.json()) as HitDoc;
  }

  async submitAnswer(payload: AnswerPayload): Promise<void> {
    const resp = await fetch(`${this.baseUrl}/answers`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) throw new ApiError(resp.status, await resp.json().catch(() => ({})));
  }

  async progress(): Promise<Progress> {
    const resp = await fetch(`${this.baseUrl}/progress`);
    if (!resp.ok) throw new ApiError(resp.status, await resp.json().catch(() => ({})));
    return (await resp.json()) as Progress;
  }
}
