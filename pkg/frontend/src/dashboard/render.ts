// HTML rendering as pure string functions; main.ts owns the DOM and events.

import type { ConsentPromptView, DatasetView, GrantRow } from "./viewmodel.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderConsentPrompt(prompt: ConsentPromptView): string {
  const rows = prompt.rows
    .map(
      (row) => `
  <div class="scope-row" data-scope="${escapeHtml(row.scope)}">
    <label>
      <input type="checkbox" class="scope-approve" value="${escapeHtml(row.scope)}">
      <code>${escapeHtml(row.scope)}</code>
      <span class="rank">protection rank ${row.privacyRank || "n/a"}</span>
    </label>
    <p>${escapeHtml(row.description)}</p>
    <details>
      <summary>Exactly what this would share</summary>
      <pre>${escapeHtml(row.preview)}</pre>
    </details>
  </div>`,
    )
    .join("\n");
  return `
<section class="consent">
  <h2>${escapeHtml(prompt.clientName)} is asking for access</h2>
  <p>Approve only what you are comfortable sharing; anything unchecked is denied.</p>
  ${rows}
  <button id="consent-approve">Share selected</button>
  <button id="consent-deny">Deny all</button>
</section>`;
}

export function renderDatasetView(view: DatasetView): string {
  if (view.payload === null) {
    return `<section class="dataset empty"><p>${escapeHtml(view.emptyStateHint ?? "No dataset.")}</p></section>`;
  }
  return `
<section class="dataset">
  <h3><code>${escapeHtml(view.scope)}</code></h3>
  <pre>${escapeHtml(view.payload)}</pre>
</section>`;
}

export function renderGrants(rows: GrantRow[]): string {
  if (rows.length === 0) {
    return `<section class="grants"><p>No grants yet. Nothing can read your data.</p></section>`;
  }
  const body = rows
    .map(
      (row) => `
  <tr data-grant="${escapeHtml(row.grantId)}">
    <td>${escapeHtml(row.clientName)}</td>
    <td><code>${row.scopes.map(escapeHtml).join(" ")}</code></td>
    <td>${escapeHtml(row.issuedAt)}</td>
    <td class="status-${row.status}">${row.status}</td>
    <td>${row.status === "active" ? `<button class="revoke" value="${escapeHtml(row.grantId)}">Revoke</button>` : ""}</td>
  </tr>`,
    )
    .join("\n");
  return `
<section class="grants">
  <table>
    <thead><tr><th>Client</th><th>Scopes</th><th>Issued</th><th>Status</th><th></th></tr></thead>
    <tbody>${body}</tbody>
  </table>
</section>`;
}

export function renderError(message: string, retryable: boolean): string {
  const hint = retryable ? "<p>You can ask the requesting agent to try again.</p>" : "";
  return `<section class="error"><p>${escapeHtml(message)}</p>${hint}</section>`;
}
