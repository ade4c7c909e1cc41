// Thin adapter binding the recorder to the MV3 extension APIs. All logic
// lives in background.ts; this file only translates events.

import { startRecorder } from "./background.js";
import type { RecorderSettings } from "./capture.js";
import { settingsFromStorage } from "./options.js";

interface ChromeLike {
  webNavigation: {
    onCompleted: {
      addListener(
        handler: (details: { tabId: number; frameId: number; url: string }) => void,
      ): void;
    };
  };
  scripting: {
    executeScript(injection: {
      target: { tabId: number };
      func: () => { title: string; markup: string };
    }): Promise<Array<{ result?: { title: string; markup: string } }>>;
  };
  storage: {
    sync: { get(defaults: Record<string, unknown>): Promise<Record<string, unknown>> };
  };
  action: {
    setBadgeText(details: { text: string }): void;
    setTitle(details: { title: string }): void;
  };
}

declare const chrome: ChromeLike | undefined;

export function wireChrome(api: ChromeLike): void {
  startRecorder({
    onPageLoaded(handler) {
      api.webNavigation.onCompleted.addListener((details) => {
        if (details.frameId !== 0) {
          return; // top frame only
        }
        void api.scripting
          .executeScript({
            target: { tabId: details.tabId },
            func: () => ({
              title: document.title,
              markup: document.documentElement.outerHTML,
            }),
          })
          .then((results) => {
            const page = results[0]?.result;
            if (page) {
              handler({ url: details.url, title: page.title, markup: page.markup });
            }
          });
      });
    },
    async getSettings(): Promise<RecorderSettings> {
      const raw = await api.storage.sync.get({
        ingestUrl: "",
        recorderSecret: "",
        userId: "",
        blocklist: [],
      });
      return settingsFromStorage(raw);
    },
    setBadge(text, tooltip) {
      api.action.setBadgeText({ text });
      api.action.setTitle({ title: tooltip || "puda recorder" });
    },
  });
}

if (typeof chrome !== "undefined" && chrome) {
  wireChrome(chrome);
}
