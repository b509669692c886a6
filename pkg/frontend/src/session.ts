import { ApiError } from "./api.js";
import type { TaskApi } from "./api.js";
import type { HitDoc } from "./types.js";

export type SessionState = "idle" | "loading" | "question" | "complete" | "error";

/**
 * One worker's pass through the task queue: fetch a HIT, toggle selections,
 * submit, advance.  Pure state machine over the API client so the exact
 * browser code paths run headless in tests.
 */
export class WorkerSession {
  state: SessionState = "idle";
  hit: HitDoc | null = null;
  selectedInstances = new Set<string>();
  selectedProperties = new Set<string>();
  answered = 0;
  lastError: string | null = null;
  private submitting = false;

  constructor(
    private readonly api: TaskApi,
    readonly workerId: string,
  ) {
    if (!workerId) throw new Error("worker id must be set before starting a session");
  }

  /** Fetch the next HIT; flips to "complete" when the queue is drained. */
  async loadNext(): Promise<SessionState> {
    this.state = "loading";
    this.lastError = null;
    try {
      const hit = await this.api.nextHit(this.workerId);
      this.hit = hit;
      this.selectedInstances.clear();
      this.selectedProperties.clear();
      this.state = hit === null ? "complete" : "question";
    } catch (err) {
      // Network failure keeps the session retriable; nothing is lost.
      this.lastError = err instanceof Error ? err.message : String(err);
      this.state = "error";
    }
    return this.state;
  }

  toggleInstance(id: string): void {
    if (!this.hit || !this.hit.instances.some((i) => i.id === id)) return;
    if (this.selectedInstances.has(id)) this.selectedInstances.delete(id);
    else this.selectedInstances.add(id);
  }

  toggleProperty(name: string): void {
    if (!this.hit || !this.hit.candidate_properties.includes(name)) return;
    if (this.selectedProperties.has(name)) this.selectedProperties.delete(name);
    else this.selectedProperties.add(name);
  }

  /**
   * Submit the current selections (an empty selection is a valid judgment)
   * and advance.  A duplicate-submission conflict advances without
   * resubmitting; double-clicks are absorbed by the in-flight guard.
   */
  async submit(): Promise<SessionState> {
    if (!this.hit || this.state !== "question" || this.submitting) return this.state;
    this.submitting = true;
    try {
      await this.api.submitAnswer({
        hit_id: this.hit.id,
        worker_id: this.workerId,
        selected_instances: [...this.selectedInstances].sort(),
        selected_properties: [...this.selectedProperties].sort(),
      });
      this.answered += 1;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // already answered this one: just move on
      } else {
        this.lastError = err instanceof Error ? err.message : String(err);
        this.state = "error";
        return this.state;
      }
    } finally {
      this.submitting = false;
    }
    return this.loadNext();
  }
}
