import { describe, expect, it } from "vitest";

import {
  MAX_MARKUP_BYTES,
  TRUNCATION_MARKER,
  capturePage,
  isBlocked,
  truncateUtf8,
} from "../src/extension/capture.js";

const SETTINGS = {
  ingestUrl: "http://127.0.0.1:7710/ingest/page",
  recorderSecret: "s3cret",
  userId: "persona-001",
  blocklist: ["bank.example", "Health.example"],
};

describe("blocklist", () => {
  it("matches the exact host", () => {
    expect(isBlocked("https://bank.example/login", SETTINGS.blocklist)).toBe(true);
  });

  it("matches subdomains", () => {
    expect(isBlocked("https://secure.bank.example/", SETTINGS.blocklist)).toBe(true);
  });

  it("is case-insensitive", () => {
    expect(isBlocked("https://HEALTH.example/records", SETTINGS.blocklist)).toBe(true);
  });

  it("does not match suffix overlaps", () => {
    expect(isBlocked("https://notbank.example/", SETTINGS.blocklist)).toBe(false);
  });

  it("treats unparseable urls as blocked", () => {
    expect(isBlocked("not a url", SETTINGS.blocklist)).toBe(true);
  });
});

describe("capturePage", () => {
  const doc = {
    url: "https://example.net/article",
    title: "An article",
    markup: "<html><body><p>Hello</p></body></html>",
  };

  it("captures a normal page with an RFC 3339 millisecond timestamp", () => {
    const when = new Date("2026-05-12T09:00:00.123Z");
    const capture = capturePage(doc, SETTINGS, when);
    expect(capture).not.toBeNull();
    expect(capture!.html_body).toBe(doc.markup);
    expect(capture!.captured_at).toBe("2026-05-12T09:00:00.123Z");
    expect(capture!.user_id).toBe("persona-001");
  });

  it("emits nothing for blocklisted domains", () => {
    expect(
      capturePage({ ...doc, url: "https://bank.example/statement" }, SETTINGS),
    ).toBeNull();
  });

  it("emits nothing for non-web schemes", () => {
    expect(capturePage({ ...doc, url: "chrome-extension://abc/page" }, SETTINGS)).toBeNull();
    expect(capturePage({ ...doc, url: "file:///etc/passwd" }, SETTINGS)).toBeNull();
  });

  it("truncates a 5 MB page to exactly 2 MiB plus the marker", () => {
    const big = { ...doc, markup: "x".repeat(5 * 1024 * 1024) };
    const capture = capturePage(big, SETTINGS)!;
    expect(capture.html_body.endsWith(TRUNCATION_MARKER)).toBe(true);
    const body = capture.html_body.slice(0, -TRUNCATION_MARKER.length);
    expect(new TextEncoder().encode(body).byteLength).toBe(MAX_MARKUP_BYTES);
  });

  it("leaves pages at the limit untouched", () => {
    const exact = { ...doc, markup: "y".repeat(MAX_MARKUP_BYTES) };
    const capture = capturePage(exact, SETTINGS)!;
    expect(capture.html_body).toBe(exact.markup);
  });
});

describe("truncateUtf8", () => {
  it("cuts on code-point boundaries for multibyte text", () => {
    const text = "温泉".repeat(10); // 3 bytes per char
    const cut = truncateUtf8(text, 7);
    expect(cut).toBe("温泉"); // 6 bytes; 7 would split a character
    expect(new TextEncoder().encode(cut).byteLength).toBeLessThanOrEqual(7);
  });

  it("never splits surrogate pairs", () => {
    const text = "🏯🏯🏯"; // 4 bytes each
    const cut = truncateUtf8(text, 6);
    expect(cut).toBe("🏯");
  });

  it("returns short input unchanged", () => {
    expect(truncateUtf8("abc", 10)).toBe("abc");
  });
});
