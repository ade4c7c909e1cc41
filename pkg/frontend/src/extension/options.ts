// Recorder options: parsing, defaults, and round-tripping to extension storage.

import type { RecorderSettings } from "./capture.js";

export const DEFAULT_SETTINGS: RecorderSettings = {
  ingestUrl: "http://127.0.0.1:7710/ingest/page",
  recorderSecret: "",
  userId: "",
  blocklist: [],
};

/** One domain per line; blank lines and #-comments allowed. */
export function parseBlocklist(text: string): string[] {
  return text
    .split("\n")
    .map((line) => line.trim().toLowerCase())
    .filter((line) => line.length > 0 && !line.startsWith("#"));
}

export function serializeBlocklist(blocklist: string[]): string {
  return blocklist.join("\n");
}

export function settingsFromStorage(raw: Record<string, unknown>): RecorderSettings {
  return {
    ingestUrl: typeof raw.ingestUrl === "string" && raw.ingestUrl ? raw.ingestUrl : DEFAULT_SETTINGS.ingestUrl,
    recorderSecret: typeof raw.recorderSecret === "string" ? raw.recorderSecret : "",
    userId: typeof raw.userId === "string" ? raw.userId : "",
    blocklist: Array.isArray(raw.blocklist) ? raw.blocklist.map(String) : [],
  };
}

export function isConfigured(settings: RecorderSettings): boolean {
  return settings.recorderSecret.length > 0 && settings.userId.length > 0;
}
