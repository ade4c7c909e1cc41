// Dashboard view-models: pure data transformations driven by the API
// clients. Rendering is a separate, dumber layer.

import { ApiFailure, AuthClient, DataClient, Session } from "../api.js";
import {
  DATA_SCOPES,
  describeScope,
  isDataScope,
  scopeRank,
  snapThreshold,
  thresholdToCode,
} from "../scopes.js";
import type { Grant, PendingAuthorization } from "../types.js";

export interface ScopePromptRow {
  scope: string;
  description: string;
  /** Ordinal position in the protection ladder (1 = most protective). */
  privacyRank: number;
  /** Exact payload this scope would expose, fetched with the user's own session. */
  preview: string;
}

export interface ConsentPromptView {
  requestId: string;
  clientName: string;
  rows: ScopePromptRow[];
  expiresIn: number;
}

export class ConsentError extends Error {
  constructor(
    message: string,
    public readonly retryable: boolean,
  ) {
    super(message);
  }
}

/**
 * Build the consent prompt: every requested scope is shown (none hidden),
 * ranked by the privacy ladder, with a preview of exactly the data the scope
 * would expose. Previews use the user's own session token, never the
 * requesting client's credentials.
 */
export async function buildConsentPrompt(
  auth: AuthClient,
  data: DataClient,
  session: Session,
  requestId: string,
): Promise<ConsentPromptView> {
  let pending: PendingAuthorization;
  try {
    pending = await auth.pendingPrompt(session, requestId);
  } catch (error) {
    if (error instanceof ApiFailure && error.body.error === "authorization_request_expired") {
      throw new ConsentError(
        "This authorization request has expired. Ask the agent to start again.",
        true,
      );
    }
    throw error;
  }
  const dataScopes = pending.requested_scopes.filter(isDataScope);
  const previewToken =
    dataScopes.length > 0 ? (await auth.sessionToken(session, dataScopes)).access_token : "";

  const rows: ScopePromptRow[] = [];
  for (const scope of pending.requested_scopes) {
    if (!isDataScope(scope)) {
      rows.push({
        scope,
        description: "Not a data scope; grants no access to your dataset.",
        privacyRank: 0,
        preview: "",
      });
      continue;
    }
    let preview: string;
    try {
      preview = (await data.fetchScope(previewToken, scope)).raw;
    } catch (error) {
      if (error instanceof ApiFailure && error.body.error === "no_dataset_built") {
        preview = "(no dataset built yet)";
      } else {
        throw error;
      }
    }
    rows.push({
      scope,
      description: describeScope(scope),
      privacyRank: scopeRank(scope),
      preview,
    });
  }
  if (rows.length !== pending.requested_scopes.length) {
    throw new ConsentError("internal error: a requested scope went missing from the prompt", false);
  }
  return {
    requestId: pending.request_id,
    clientName: pending.client_name,
    rows,
    expiresIn: pending.expires_in,
  };
}

/**
 * Turn per-scope approve/deny decisions into the approved subset. The
 * submitted set can never widen the request: unknown scopes are rejected
 * here, and the server re-enforces the same rule.
 */
export function approvedSubset(
  requestedScopes: string[],
  decisions: Record<string, boolean>,
): string[] {
  for (const scope of Object.keys(decisions)) {
    if (!requestedScopes.includes(scope)) {
      throw new ConsentError(`decision refers to a scope that was never requested: ${scope}`, false);
    }
  }
  return requestedScopes.filter((scope) => decisions[scope] === true);
}

export async function decideConsent(
  auth: AuthClient,
  session: Session,
  prompt: ConsentPromptView,
  decisions: Record<string, boolean>,
): Promise<string> {
  const approved = approvedSubset(
    prompt.rows.map((row) => row.scope),
    decisions,
  );
  try {
    return await auth.submitConsent(session, prompt.requestId, approved);
  } catch (error) {
    if (error instanceof ApiFailure && error.body.error === "authorization_request_expired") {
      throw new ConsentError(
        "This authorization request expired before you answered. Ask the agent to retry.",
        true,
      );
    }
    throw error;
  }
}

// --- dataset views -----------------------------------------------------------

export type DatasetTab = "categories" | "keywords" | "history";

export interface DatasetView {
  tab: DatasetTab;
  /** The scope whose payload is shown; what an agent with it would receive. */
  scope: string;
  /** Raw canonical payload, or null when no dataset exists yet. */
  payload: string | null;
  emptyStateHint?: string;
}

export interface DatasetViewRequest {
  tab: DatasetTab;
  categoriesTier?: 1 | 2 | 3;
  keywordsThreshold?: number; // snapped to 0.90 / 0.85 / 0.80 / 0.75
  historyVariant?: "short" | "long";
}

export function scopeForView(request: DatasetViewRequest): string {
  switch (request.tab) {
    case "categories":
      return `puda:categories:${request.categoriesTier ?? 1}`;
    case "keywords": {
      const snapped = snapThreshold(request.keywordsThreshold ?? 0.9);
      return `puda:keywords:${thresholdToCode(snapped)}`;
    }
    case "history":
      return `puda:history:${request.historyVariant ?? "short"}`;
  }
}

export async function renderDatasetView(
  auth: AuthClient,
  data: DataClient,
  session: Session,
  request: DatasetViewRequest,
): Promise<DatasetView> {
  const scope = scopeForView(request);
  const token = (await auth.sessionToken(session, [scope])).access_token;
  try {
    const payload = await data.fetchScope(token, scope);
    return { tab: request.tab, scope, payload: payload.raw };
  } catch (error) {
    if (error instanceof ApiFailure && error.body.error === "no_dataset_built") {
      return {
        tab: request.tab,
        scope,
        payload: null,
        emptyStateHint:
          "No dataset yet. Ingest captures and run a rebuild (puda ingest … && puda rebuild …).",
      };
    }
    throw error;
  }
}

// --- grants ---------------------------------------------------------------------

export interface GrantRow {
  grantId: string;
  clientName: string;
  scopes: string[];
  issuedAt: string;
  status: "active" | "revoked";
  isOwnerSession: boolean;
}

export function grantRows(grants: Grant[]): GrantRow[] {
  return grants.map((grant) => ({
    grantId: grant.grant_id,
    clientName: grant.client_name,
    scopes: [...grant.scopes].sort(),
    issuedAt: grant.issued_at,
    status: grant.status,
    isOwnerSession: grant.client_id === "puda:self",
  }));
}

/** External grants only; the owner's own preview tokens are shown separately. */
export function externalGrantRows(grants: Grant[]): GrantRow[] {
  return grantRows(grants).filter((row) => !row.isOwnerSession);
}

export async function revokeGrant(
  auth: AuthClient,
  session: Session,
  grantId: string,
): Promise<GrantRow> {
  const grant = await auth.revokeGrant(session, grantId);
  return grantRows([grant])[0]!;
}

export const ALL_DATA_SCOPES = DATA_SCOPES;
