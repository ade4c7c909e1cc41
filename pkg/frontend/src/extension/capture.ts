// Page capture rules: what may leave the browser, and in what shape.

import type { PageCapture } from "../types.js";

export const MAX_MARKUP_BYTES = 2 * 1024 * 1024;
export const TRUNCATION_MARKER = "<!--puda:truncated-->";

export interface RecorderSettings {
  ingestUrl: string;
  recorderSecret: string;
  userId: string;
  /** Domains never captured; matches the host and all of its subdomains. */
  blocklist: string[];
}

export interface LoadedDocument {
  url: string;
  title: string;
  markup: string;
}

export function isBlocked(url: string, blocklist: string[]): boolean {
  let host: string;
  try {
    host = new URL(url).hostname.toLowerCase();
  } catch {
    return true; // unparseable URLs never leave the browser
  }
  return blocklist.some((entry) => {
    const domain = entry.trim().toLowerCase();
    return domain.length > 0 && (host === domain || host.endsWith(`.${domain}`));
  });
}

/** Cut a string so its UTF-8 length is at most maxBytes, on a code-point boundary. */
export function truncateUtf8(text: string, maxBytes: number): string {
  const encoder = new TextEncoder();
  if (encoder.encode(text).byteLength <= maxBytes) {
    return text;
  }
  // UTF-8 length per code unit never exceeds 3 (4-byte chars use two units),
  // so maxBytes is a safe starting slice; walk back to fit.
  let end = Math.min(text.length, maxBytes);
  while (end > 0) {
    const candidate = text.slice(0, end);
    if (encoder.encode(candidate).byteLength <= maxBytes) {
      // avoid splitting a surrogate pair
      const last = candidate.charCodeAt(candidate.length - 1);
      if (last >= 0xd800 && last <= 0xdbff) {
        end -= 1;
        continue;
      }
      return candidate;
    }
    end -= 1;
  }
  return "";
}

/**
 * Build the capture for a fully loaded page, or null when the page must not
 * be recorded at all (non-http(s) scheme, or a blocklisted domain).
 */
export function capturePage(
  doc: LoadedDocument,
  settings: RecorderSettings,
  now: Date = new Date(),
): PageCapture | null {
  let parsed: URL;
  try {
    parsed = new URL(doc.url);
  } catch {
    return null;
  }
  if (parsed.protocol !== "http:" && parsed.protocol !== "https:") {
    return null;
  }
  if (isBlocked(doc.url, settings.blocklist)) {
    return null;
  }
  let body = doc.markup;
  if (new TextEncoder().encode(body).byteLength > MAX_MARKUP_BYTES) {
    body = truncateUtf8(body, MAX_MARKUP_BYTES) + TRUNCATION_MARKER;
  }
  return {
    url: doc.url,
    title: doc.title,
    html_body: body,
    captured_at: now.toISOString(),
    user_id: settings.userId,
  };
}
