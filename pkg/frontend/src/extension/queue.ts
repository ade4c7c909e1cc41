// Bounded delivery queue: at-least-once, in-order, exponential backoff.
// The server deduplicates replays by (url, captured_at), so retrying a
// possibly-delivered capture is safe.

import type { PageCapture } from "../types.js";
import type { RecorderSettings } from "./capture.js";

export interface DeliveryOutcome {
  ok: boolean;
  status: number;
}

export type Transport = (
  capture: PageCapture,
  settings: RecorderSettings,
) => Promise<DeliveryOutcome>;

export type Scheduler = (callback: () => void, delayMs: number) => void;

export interface QueueState {
  queued: number;
  delivered: number;
  /** Captures lost to overflow; surfaced in the badge, never silent. */
  dropped: number;
  warning: "none" | "auth" | "offline";
  nextRetryDelayMs: number;
}

export const DEFAULT_CAPACITY = 500;
const BASE_DELAY_MS = 1_000;
const MAX_DELAY_MS = 60_000;

export async function httpTransport(
  capture: PageCapture,
  settings: RecorderSettings,
  fetchImpl: typeof fetch = fetch,
): Promise<DeliveryOutcome> {
  try {
    const response = await fetchImpl(settings.ingestUrl, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${settings.recorderSecret}`,
      },
      body: JSON.stringify(capture),
    });
    return { ok: response.ok, status: response.status };
  } catch {
    return { ok: false, status: 0 };
  }
}

export class DeliveryQueue {
  private items: PageCapture[] = [];
  private delivered = 0;
  private dropped = 0;
  private warning: QueueState["warning"] = "none";
  private retryDelayMs = BASE_DELAY_MS;
  private flushing = false;
  private retryScheduled = false;

  constructor(
    private readonly transport: Transport,
    private readonly settings: () => RecorderSettings,
    private readonly schedule: Scheduler = (callback, delayMs) =>
      void setTimeout(callback, delayMs),
    private readonly capacity: number = DEFAULT_CAPACITY,
  ) {}

  state(): QueueState {
    return {
      queued: this.items.length,
      delivered: this.delivered,
      dropped: this.dropped,
      warning: this.warning,
      nextRetryDelayMs: this.retryDelayMs,
    };
  }

  enqueue(capture: PageCapture): void {
    if (this.items.length >= this.capacity) {
      this.items.shift();
      this.dropped += 1;
    }
    this.items.push(capture);
    void this.flush();
  }

  /** Deliver from the head until empty or a failure schedules a retry. */
  async flush(): Promise<void> {
    if (this.flushing) {
      return;
    }
    this.flushing = true;
    try {
      while (this.items.length > 0) {
        const head = this.items[0]!;
        const outcome = await this.transport(head, this.settings());
        if (outcome.ok) {
          this.items.shift();
          this.delivered += 1;
          this.warning = "none";
          this.retryDelayMs = BASE_DELAY_MS;
          continue;
        }
        this.warning = outcome.status === 401 ? "auth" : "offline";
        this.scheduleRetry();
        return;
      }
    } finally {
      this.flushing = false;
    }
  }

  private scheduleRetry(): void {
    if (this.retryScheduled) {
      return;
    }
    this.retryScheduled = true;
    const delay = this.retryDelayMs;
    this.retryDelayMs = Math.min(this.retryDelayMs * 2, MAX_DELAY_MS);
    this.schedule(() => {
      this.retryScheduled = false;
      void this.flush();
    }, delay);
  }
}
