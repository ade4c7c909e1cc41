// Thin typed clients for the authorization server and dataset agent. Fetch
// is injectable so tests can instrument or fake the network.

import type {
  ApiError,
  CapabilityCard,
  DiscoveryDocument,
  Grant,
  PendingAuthorization,
  TokenResponse,
} from "./types.js";
import { scopeDataPath } from "./scopes.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiFailure extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(`HTTP ${status}: ${body.error ?? "unknown error"}`);
  }
}

async function expectJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let body: ApiError;
    try {
      body = (await response.json()) as ApiError;
    } catch {
      body = { error: `http_${response.status}` };
    }
    throw new ApiFailure(response.status, body);
  }
  return (await response.json()) as T;
}

export interface Session {
  session_token: string;
  user_id: string;
}

export class AuthClient {
  private discoveryCache: DiscoveryDocument | null = null;

  constructor(
    readonly issuer: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async discovery(): Promise<DiscoveryDocument> {
    if (!this.discoveryCache) {
      const response = await this.fetchImpl(
        `${this.issuer}/.well-known/openid-configuration`,
      );
      this.discoveryCache = await expectJson<DiscoveryDocument>(response);
    }
    return this.discoveryCache;
  }

  async openSession(username: string, password: string): Promise<Session> {
    const doc = await this.discovery();
    const response = await this.fetchImpl(doc.session_endpoint, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ username, password }),
    });
    return expectJson<Session>(response);
  }

  /** Self-issued token for previewing the user's own data. */
  async sessionToken(session: Session, scopes?: string[]): Promise<TokenResponse> {
    const response = await this.fetchImpl(`${this.issuer}/session/token`, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${session.session_token}`,
      },
      body: JSON.stringify(scopes ? { scopes } : {}),
    });
    return expectJson<TokenResponse>(response);
  }

  async pendingPrompt(session: Session, requestId: string): Promise<PendingAuthorization> {
    const response = await this.fetchImpl(`${this.issuer}/consent/${requestId}`, {
      headers: { Authorization: `Bearer ${session.session_token}` },
    });
    return expectJson<PendingAuthorization>(response);
  }

  /** Submit the user's decision; returns the redirect URL for the client. */
  async submitConsent(
    session: Session,
    requestId: string,
    approvedScopes: string[],
  ): Promise<string> {
    const doc = await this.discovery();
    const body =
      approvedScopes.length > 0
        ? { request_id: requestId, approved_scopes: approvedScopes }
        : { request_id: requestId, decision: "deny" };
    const response = await this.fetchImpl(doc.consent_endpoint, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${session.session_token}`,
      },
      body: JSON.stringify(body),
    });
    const payload = await expectJson<{ redirect_to: string }>(response);
    return payload.redirect_to;
  }

  async listGrants(session: Session): Promise<Grant[]> {
    const doc = await this.discovery();
    const response = await this.fetchImpl(doc.grants_endpoint, {
      headers: { Authorization: `Bearer ${session.session_token}` },
    });
    const payload = await expectJson<{ grants: Grant[] }>(response);
    return payload.grants;
  }

  async revokeGrant(session: Session, grantId: string): Promise<Grant> {
    const response = await this.fetchImpl(`${this.issuer}/grants/${grantId}/revoke`, {
      method: "POST",
      headers: { Authorization: `Bearer ${session.session_token}` },
    });
    return expectJson<Grant>(response);
  }
}

export interface ScopePayload {
  /** Raw response text; canonical JSON, byte-stable per dataset version. */
  raw: string;
  json: unknown;
}

export class DataClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async capabilityCard(): Promise<CapabilityCard> {
    const response = await this.fetchImpl(`${this.baseUrl}/.well-known/puda-agent`);
    return expectJson<CapabilityCard>(response);
  }

  async fetchScope(token: string, scope: string): Promise<ScopePayload> {
    const response = await this.fetchImpl(`${this.baseUrl}${scopeDataPath(scope)}`, {
      headers: { Authorization: `Bearer ${token}` },
    });
    if (!response.ok) {
      let body: ApiError;
      try {
        body = (await response.json()) as ApiError;
      } catch {
        body = { error: `http_${response.status}` };
      }
      throw new ApiFailure(response.status, body);
    }
    const raw = await response.text();
    return { raw, json: JSON.parse(raw) };
  }
}
