// Wire types for the two puda HTTP services. Field names and shapes follow
// the servers' canonical JSON (snake_case, RFC 3339 timestamps).

export interface PageCapture {
  url: string;
  title: string;
  html_body: string;
  captured_at: string;
  user_id: string;
}

export interface Profile {
  name: string;
  age: number;
  date_of_birth: string;
  gender: string;
  address: string;
}

export interface Keyword {
  text: string;
  sentiment: "positive" | "neutral" | "negative";
  score: number;
}

export interface HistoryEntry {
  url: string;
  title: string;
  summary: string;
  captured_at: string;
}

export interface DiscoveryDocument {
  issuer: string;
  authorization_endpoint: string;
  token_endpoint: string;
  registration_endpoint: string;
  jwks_uri: string;
  scopes_supported: string[];
  consent_endpoint: string;
  session_endpoint: string;
  grants_endpoint: string;
  revocation_list_endpoint: string;
  [key: string]: unknown;
}

export interface PendingAuthorization {
  status: "pending";
  request_id: string;
  client_id: string;
  client_name: string;
  requested_scopes: string[];
  expires_in: number;
}

export interface Grant {
  grant_id: string;
  user_id: string;
  client_id: string;
  client_name: string;
  scopes: string[];
  issued_at: string;
  expires_at: string;
  status: "active" | "revoked";
  revoked_at?: string;
}

export interface TokenResponse {
  access_token: string;
  token_type: "Bearer";
  expires_in: number;
  scope: string;
}

export interface CapabilityCard {
  agent_name: string;
  version: string;
  provision_endpoints: Record<string, { path: string; description: string }>;
  authorization_server: string;
}

export interface ApiError {
  error: string;
  error_description?: string;
  detail?: string;
  required_scope?: string;
}
