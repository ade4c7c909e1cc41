// Recorder wiring: page-load events in, queued deliveries out. The browser
// API surface is injected so the logic runs (and is tested) without chrome.

import { capturePage, LoadedDocument, RecorderSettings } from "./capture.js";
import { DeliveryQueue, httpTransport, Scheduler, Transport } from "./queue.js";
import { isConfigured } from "./options.js";

export interface RecorderHost {
  /** Fires once per completed top-frame page load. */
  onPageLoaded(handler: (doc: LoadedDocument) => void): void;
  getSettings(): Promise<RecorderSettings>;
  /** Surface queue state to the user (toolbar badge or equivalent). */
  setBadge(text: string, tooltip: string): void;
}

export interface Recorder {
  queue: DeliveryQueue;
  /** The capture decision for one page; exported for instrumentation. */
  handlePage(doc: LoadedDocument): Promise<void>;
}

export function startRecorder(
  host: RecorderHost,
  transport: Transport = (capture, settings) => httpTransport(capture, settings),
  schedule?: Scheduler,
): Recorder {
  let settings: RecorderSettings | null = null;
  const currentSettings = (): RecorderSettings => {
    if (!settings) {
      throw new Error("recorder settings not loaded yet");
    }
    return settings;
  };
  const queue = new DeliveryQueue(
    async (capture, s) => {
      const outcome = await transport(capture, s);
      updateBadge();
      return outcome;
    },
    currentSettings,
    schedule,
  );

  function updateBadge(): void {
    const state = queue.state();
    if (state.warning === "auth") {
      host.setBadge("!", "Recorder secret rejected; check the extension options.");
    } else if (state.dropped > 0) {
      host.setBadge(String(state.dropped), `${state.dropped} captures dropped (queue full).`);
    } else if (state.queued > 0) {
      host.setBadge(String(state.queued), `${state.queued} captures waiting for the server.`);
    } else {
      host.setBadge("", "");
    }
  }

  async function handlePage(doc: LoadedDocument): Promise<void> {
    settings = await host.getSettings();
    if (!isConfigured(settings)) {
      host.setBadge("?", "Recorder not configured: set the ingest secret and user id.");
      return;
    }
    const capture = capturePage(doc, settings);
    if (capture === null) {
      return; // blocked or non-web scheme: nothing leaves the browser
    }
    queue.enqueue(capture);
    updateBadge();
  }

  host.onPageLoaded((doc) => void handlePage(doc));
  return { queue, handlePage };
}
