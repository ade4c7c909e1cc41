import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { PageCapture } from "../src/types.js";
import { startRecorder } from "../src/extension/background.js";
import type { LoadedDocument, RecorderSettings } from "../src/extension/capture.js";
import { DeliveryQueue, DeliveryOutcome } from "../src/extension/queue.js";

const SETTINGS: RecorderSettings = {
  ingestUrl: "http://127.0.0.1:7710/ingest/page",
  recorderSecret: "s3cret",
  userId: "persona-001",
  blocklist: ["bank.example"],
};

function capture(n: number): PageCapture {
  return {
    url: `https://example.net/page-${n}`,
    title: `Page ${n}`,
    html_body: `<p>${n}</p>`,
    captured_at: `2026-05-12T09:00:${String(n % 60).padStart(2, "0")}.000Z`,
    user_id: "persona-001",
  };
}

/** Transport double: scripted failures, full delivery ledger. */
function fakeTransport(failUntilCall = 0, failStatus = 0) {
  let calls = 0;
  const delivered: string[] = [];
  const transport = async (item: PageCapture): Promise<DeliveryOutcome> => {
    calls += 1;
    if (calls <= failUntilCall) {
      return { ok: false, status: failStatus };
    }
    delivered.push(item.url);
    return { ok: true, status: 200 };
  };
  return { transport, delivered, callCount: () => calls };
}

describe("DeliveryQueue", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("delivers immediately when the server is up", async () => {
    const { transport, delivered } = fakeTransport();
    const queue = new DeliveryQueue(transport, () => SETTINGS);
    queue.enqueue(capture(1));
    await vi.runAllTimersAsync();
    expect(delivered).toEqual(["https://example.net/page-1"]);
    expect(queue.state().queued).toBe(0);
  });

  it("replays queued captures in order after the server comes back", async () => {
    const { transport, delivered } = fakeTransport(3); // first three attempts fail
    const queue = new DeliveryQueue(transport, () => SETTINGS);
    for (let n = 1; n <= 4; n += 1) {
      queue.enqueue(capture(n));
    }
    await vi.runAllTimersAsync();
    expect(delivered).toEqual([1, 2, 3, 4].map((n) => `https://example.net/page-${n}`));
    expect(queue.state().queued).toBe(0);
    expect(queue.state().warning).toBe("none");
  });

  it("backs off exponentially while the server is down", async () => {
    const delays: number[] = [];
    const { transport } = fakeTransport(Number.MAX_SAFE_INTEGER);
    const queue = new DeliveryQueue(
      transport,
      () => SETTINGS,
      (callback, delayMs) => {
        delays.push(delayMs);
        setTimeout(callback, delayMs);
      },
    );
    queue.enqueue(capture(1));
    await vi.advanceTimersByTimeAsync(1_000 + 2_000 + 4_000 + 8_000 + 100);
    expect(delays.slice(0, 4)).toEqual([1_000, 2_000, 4_000, 8_000]);
  });

  it("drops the oldest beyond capacity and counts drops visibly", async () => {
    const { transport } = fakeTransport(Number.MAX_SAFE_INTEGER);
    const queue = new DeliveryQueue(transport, () => SETTINGS, undefined, 3);
    for (let n = 1; n <= 5; n += 1) {
      queue.enqueue(capture(n));
    }
    const state = queue.state();
    expect(state.queued).toBe(3);
    expect(state.dropped).toBe(2);
  });

  it("a 401 raises the auth warning without losing the capture", async () => {
    const { transport } = fakeTransport(Number.MAX_SAFE_INTEGER, 401);
    const queue = new DeliveryQueue(transport, () => SETTINGS);
    queue.enqueue(capture(1));
    await vi.advanceTimersByTimeAsync(10);
    expect(queue.state().warning).toBe("auth");
    expect(queue.state().queued).toBe(1);
  });
});

describe("recorder wiring (instrumented at the network boundary)", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  function host(settings: RecorderSettings) {
    const badges: string[] = [];
    let pageHandler: ((doc: LoadedDocument) => void) | null = null;
    return {
      badges,
      emit(doc: LoadedDocument) {
        pageHandler?.(doc);
      },
      host: {
        onPageLoaded(handler: (doc: LoadedDocument) => void) {
          pageHandler = handler;
        },
        getSettings: async () => settings,
        setBadge(text: string) {
          badges.push(text);
        },
      },
    };
  }

  it("blocklisted pages cause zero network egress", async () => {
    const { transport, callCount } = fakeTransport();
    const wiring = host(SETTINGS);
    const recorder = startRecorder(wiring.host, transport);
    await recorder.handlePage({
      url: "https://secure.bank.example/account",
      title: "Account",
      markup: "<p>balance</p>",
    });
    await vi.runAllTimersAsync();
    expect(callCount()).toBe(0); // not a single transport call
    expect(recorder.queue.state().queued).toBe(0);
  });

  it("normal pages are captured and delivered", async () => {
    const { transport, delivered } = fakeTransport();
    const wiring = host(SETTINGS);
    const recorder = startRecorder(wiring.host, transport);
    await recorder.handlePage({
      url: "https://example.net/onsen-guide",
      title: "Onsen guide",
      markup: "<p>relaxing onsen</p>",
    });
    await vi.runAllTimersAsync();
    expect(delivered).toEqual(["https://example.net/onsen-guide"]);
  });

  it("unconfigured recorder captures nothing and warns", async () => {
    const { transport, callCount } = fakeTransport();
    const wiring = host({ ...SETTINGS, recorderSecret: "" });
    const recorder = startRecorder(wiring.host, transport);
    await recorder.handlePage({
      url: "https://example.net/a",
      title: "A",
      markup: "<p>a</p>",
    });
    await vi.runAllTimersAsync();
    expect(callCount()).toBe(0);
    expect(wiring.badges).toContain("?");
    expect(recorder.queue.state().queued).toBe(0);
  });
});
