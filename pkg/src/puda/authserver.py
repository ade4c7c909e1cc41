"""Authorization server: OpenID Connect discovery, dynamic client and
resource registration, authorization-code flow with mandatory PKCE (S256),
granularity-scoped token issuance, and grant revocation.

Consent is a two-step HTTP exchange shaped for a single-page dashboard:
GET /authorize validates the request and parks it as a pending prompt; POST
/consent (session-authenticated) answers it and returns the client redirect
carrying the single-use code.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any
from urllib.parse import urlencode, urlparse, urlsplit, urlunsplit

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from puda.model import (
    DATA_SCOPES,
    REGISTER_SCOPE,
    format_ts,
    is_valid_scope,
    parse_ts,
    utc_now,
)
from puda.store import EventKind, Store
from puda.tokens import (
    AudienceMismatch,
    BadSignature,
    TokenExpired,
    b64url_encode,
    generate_signing_key,
    jwk_from_public,
    sign_token,
    verify_token,
)

GRANT_ACTIVE = "active"
GRANT_REVOKED = "revoked"

SELF_CLIENT_ID = "puda:self"


class RevokedGrant(Exception):
    """The grant backing a token is revoked, expired, or unknown."""


class AuthError(Exception):
    """Service-level failure mapped directly onto an HTTP error response."""

    def __init__(self, status: int, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.status = status
        self.code = code
        self.detail = detail


@dataclass
class AuthConfig:
    issuer: str
    users: dict[str, str]
    signing_key: Ed25519PrivateKey = field(default_factory=generate_signing_key)
    kid: str = "puda-as-1"
    code_ttl_s: float = 120.0
    token_ttl_s: float = 3600.0
    grant_ttl_s: float = 30 * 86400.0
    request_ttl_s: float = 300.0
    session_ttl_s: float = 12 * 3600.0
    dashboard_origin: str | None = None


@dataclass
class ClientRegistration:
    client_id: str
    client_name: str
    redirect_uris: tuple[str, ...]
    client_secret: str | None
    registered_at: datetime

    def to_dict(self, include_secret: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            "client_id": self.client_id,
            "client_name": self.client_name,
            "redirect_uris": list(self.redirect_uris),
            "registered_at": format_ts(self.registered_at),
        }
        if include_secret and self.client_secret is not None:
            data["client_secret"] = self.client_secret
        return data


@dataclass
class ResourceRegistration:
    resource_id: str
    endpoint_map: dict[str, str]
    registered_at: datetime

    def to_dict(self) -> dict[str, Any]:
        return {
            "resource_id": self.resource_id,
            "endpoint_map": dict(self.endpoint_map),
            "registered_at": format_ts(self.registered_at),
        }


@dataclass
class AccessGrant:
    grant_id: str
    user_id: str
    client_id: str
    client_name: str
    scopes: frozenset[str]
    issued_at: datetime
    expires_at: datetime
    status: str = GRANT_ACTIVE
    revoked_at: datetime | None = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "grant_id": self.grant_id,
            "user_id": self.user_id,
            "client_id": self.client_id,
            "client_name": self.client_name,
            "scopes": sorted(self.scopes),
            "issued_at": format_ts(self.issued_at),
            "expires_at": format_ts(self.expires_at),
            "status": self.status,
        }
        if self.revoked_at is not None:
            data["revoked_at"] = format_ts(self.revoked_at)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AccessGrant:
        return cls(
            grant_id=data["grant_id"],
            user_id=data["user_id"],
            client_id=data["client_id"],
            client_name=data.get("client_name", data["client_id"]),
            scopes=frozenset(data["scopes"]),
            issued_at=parse_ts(data["issued_at"]),
            expires_at=parse_ts(data["expires_at"]),
            status=data.get("status", GRANT_ACTIVE),
            revoked_at=parse_ts(data["revoked_at"]) if data.get("revoked_at") else None,
        )


@dataclass
class _PendingRequest:
    request_id: str
    client_id: str
    redirect_uri: str
    scopes: tuple[str, ...]
    state: str | None
    code_challenge: str
    expires_at: float


@dataclass
class _CodeRecord:
    client_id: str
    redirect_uri: str
    scopes: tuple[str, ...]
    code_challenge: str
    grant_id: str
    user_id: str
    expires_at: float
    consumed: bool = False
    issued_jti: str | None = None


@dataclass
class _TokenRecord:
    jti: str
    grant_id: str
    user_id: str
    revoked: bool = False


def _require_absolute_no_fragment(uri: str) -> bool:
    parsed = urlparse(uri)
    return bool(parsed.scheme and parsed.netloc and not parsed.fragment)


def _redirect_with(uri: str, params: dict[str, str]) -> str:
    parts = urlsplit(uri)
    extra = urlencode(params)
    query = f"{parts.query}&{extra}" if parts.query else extra
    return urlunsplit((parts.scheme, parts.netloc, parts.path, query, ""))


def s256_challenge(verifier: str) -> str:
    return b64url_encode(hashlib.sha256(verifier.encode("ascii")).digest())


class AuthService:
    """All authorization state and transitions; the HTTP app is a thin shell.

    Code consumption and grant transitions happen under one lock, so no
    interleaving of concurrent requests can redeem a code twice.
    """

    def __init__(self, config: AuthConfig, store: Store | None = None):
        self.config = config
        self.store = store
        self.issuer = config.issuer.rstrip("/")
        self._lock = threading.Lock()
        self._clients: dict[str, ClientRegistration] = {}
        self._resources: dict[str, ResourceRegistration] = {}
        self._resource_order: list[str] = []
        self._pending: dict[str, _PendingRequest] = {}
        self._codes: dict[str, _CodeRecord] = {}
        self._grants: dict[str, AccessGrant] = {}
        self._tokens: dict[str, _TokenRecord] = {}
        self._revocations: list[dict[str, str]] = []
        self._sessions: dict[str, tuple[str, float]] = {}
        if store is not None:
            self._restore()

    # -- persistence ------------------------------------------------------------

    def _restore(self) -> None:
        assert self.store is not None
        for user_id in self.store.known_users():
            for item in self.store.get_grants(user_id):
                grant = AccessGrant.from_dict(item)
                self._grants[grant.grant_id] = grant
            for event in self.store.read_events(user_id):
                if event.kind is EventKind.TOKEN_ISSUED:
                    payload = event.payload
                    self._tokens[payload["token_id"]] = _TokenRecord(
                        jti=payload["token_id"],
                        grant_id=payload["grant_id"],
                        user_id=user_id,
                    )
        for record in self._tokens.values():
            grant = self._grants.get(record.grant_id)
            if grant is not None and grant.status == GRANT_REVOKED:
                record.revoked = True
                self._revocations.append(
                    {
                        "token_id": record.jti,
                        "revoked_at": format_ts(grant.revoked_at or grant.issued_at),
                    }
                )

    def _persist_grants(self, user_id: str) -> None:
        if self.store is None:
            return
        grants = [g.to_dict() for g in self._grants.values() if g.user_id == user_id]
        grants.sort(key=lambda g: g["issued_at"])
        self.store.put_grants(user_id, grants)

    def _record_event(self, user_id: str, kind: EventKind, payload: dict[str, Any]) -> None:
        if self.store is not None:
            self.store.append(user_id, kind, payload)

    # -- discovery ---------------------------------------------------------------

    def discovery_document(self) -> dict[str, Any]:
        issuer = self.issuer
        return {
            "issuer": issuer,
            "authorization_endpoint": f"{issuer}/authorize",
            "token_endpoint": f"{issuer}/token",
            "registration_endpoint": f"{issuer}/register/client",
            "resource_registration_endpoint": f"{issuer}/register/resource",
            "jwks_uri": f"{issuer}/keys",
            "scopes_supported": list(DATA_SCOPES),
            "response_types_supported": ["code"],
            "grant_types_supported": ["authorization_code"],
            "code_challenge_methods_supported": ["S256"],
            "consent_endpoint": f"{issuer}/consent",
            "session_endpoint": f"{issuer}/session",
            "grants_endpoint": f"{issuer}/grants",
            "revocation_list_endpoint": f"{issuer}/revocations",
        }

    def jwks(self) -> dict[str, Any]:
        public = self.config.signing_key.public_key()
        return {"keys": [jwk_from_public(public, self.config.kid)]}

    # -- registration ------------------------------------------------------------

    def register_client(self, metadata: dict[str, Any]) -> ClientRegistration:
        name = metadata.get("client_name")
        uris = metadata.get("redirect_uris")
        if not isinstance(name, str) or not name:
            raise AuthError(400, "invalid_client_metadata", "client_name is required")
        if not isinstance(uris, list) or not uris:
            raise AuthError(400, "invalid_redirect_uri", "redirect_uris must be a non-empty list")
        for uri in uris:
            if not isinstance(uri, str) or not _require_absolute_no_fragment(uri):
                raise AuthError(
                    400, "invalid_redirect_uri", f"redirect URI must be absolute without fragment: {uri!r}"
                )
        secret = secrets.token_urlsafe(32) if metadata.get("confidential") else None
        registration = ClientRegistration(
            client_id=secrets.token_hex(16),
            client_name=name,
            redirect_uris=tuple(uris),
            client_secret=secret,
            registered_at=utc_now(),
        )
        with self._lock:
            self._clients[registration.client_id] = registration
        return registration

    def register_resource(self, token: str | None, body: dict[str, Any]) -> ResourceRegistration:
        claims = self._authenticate_registration_token(token)
        endpoint_map = body.get("endpoint_map")
        if not isinstance(endpoint_map, dict) or not endpoint_map:
            raise AuthError(400, "invalid_resource_metadata", "endpoint_map must be a non-empty object")
        for scope, uri in endpoint_map.items():
            if not is_valid_scope(scope):
                raise AuthError(400, "invalid_scope_string", f"bad scope string {scope!r}")
            if not isinstance(uri, str) or not _require_absolute_no_fragment(uri):
                raise AuthError(400, "invalid_resource_metadata", f"bad endpoint URI {uri!r}")
        registration = ResourceRegistration(
            resource_id=secrets.token_hex(16),
            endpoint_map=dict(endpoint_map),
            registered_at=utc_now(),
        )
        with self._lock:
            self._resources[registration.resource_id] = registration
            self._resource_order.append(registration.resource_id)
        del claims
        return registration

    def _authenticate_registration_token(self, token: str | None) -> dict[str, Any]:
        if not token:
            raise AuthError(401, "unauthorized", "resource registration requires a bearer token")
        try:
            claims = self.verify(token, audience=self.issuer)
        except (BadSignature, TokenExpired, AudienceMismatch, RevokedGrant) as exc:
            raise AuthError(401, "unauthorized", str(exc)) from exc
        if REGISTER_SCOPE not in claims.get("scopes", []):
            raise AuthError(401, "unauthorized", f"token lacks {REGISTER_SCOPE}")
        return claims

    # -- sessions ----------------------------------------------------------------

    def open_session(self, username: str, password: str) -> dict[str, str]:
        expected = self.config.users.get(username)
        if expected is None or not secrets.compare_digest(expected, password):
            raise AuthError(401, "invalid_credentials", "unknown user or wrong password")
        token = secrets.token_urlsafe(32)
        with self._lock:
            self._sessions[token] = (username, time.time() + self.config.session_ttl_s)
        return {"session_token": token, "user_id": username}

    def _session_user(self, bearer: str | None) -> str:
        if not bearer:
            raise AuthError(401, "invalid_session", "missing session token")
        with self._lock:
            entry = self._sessions.get(bearer)
            if entry is None or entry[1] < time.time():
                self._sessions.pop(bearer, None)
                raise AuthError(401, "invalid_session", "unknown or expired session")
            return entry[0]

    # -- authorization flow --------------------------------------------------------

    def authorize(self, params: dict[str, str]) -> dict[str, Any]:
        client_id = params.get("client_id", "")
        client = self._clients.get(client_id)
        if client is None:
            raise AuthError(400, "unknown_client", f"client {client_id!r} is not registered")
        redirect_uri = params.get("redirect_uri", "")
        if redirect_uri not in client.redirect_uris:
            # No redirect to an unregistered URI: render the error directly.
            raise AuthError(400, "redirect_mismatch", "redirect_uri does not match registration")

        state = params.get("state")

        def redirect_error(code: str, detail: str) -> dict[str, Any]:
            query = {"error": code, "error_description": detail}
            if state is not None:
                query["state"] = state
            return {"status": "redirect", "redirect_to": _redirect_with(redirect_uri, query)}

        if params.get("response_type") != "code":
            return redirect_error("unsupported_response_type", "only response_type=code is supported")
        scopes = tuple(s for s in params.get("scope", "").split(" ") if s)
        if not scopes:
            return redirect_error("invalid_scope", "at least one scope is required")
        for scope in scopes:
            if scope not in DATA_SCOPES and scope != REGISTER_SCOPE:
                return redirect_error("invalid_scope", f"unknown scope {scope!r}")
        challenge = params.get("code_challenge", "")
        if not challenge or params.get("code_challenge_method") != "S256":
            return redirect_error("invalid_request", "PKCE with S256 is mandatory")

        pending = _PendingRequest(
            request_id=secrets.token_urlsafe(16),
            client_id=client_id,
            redirect_uri=redirect_uri,
            scopes=scopes,
            state=state,
            code_challenge=challenge,
            expires_at=time.time() + self.config.request_ttl_s,
        )
        with self._lock:
            self._pending[pending.request_id] = pending
        return {
            "status": "pending",
            "request_id": pending.request_id,
            "client_id": client_id,
            "client_name": client.client_name,
            "requested_scopes": list(scopes),
            "expires_in": int(self.config.request_ttl_s),
        }

    def pending_prompt(self, session_token: str | None, request_id: str) -> dict[str, Any]:
        """Details of a parked authorization request, for the consent UI."""
        self._session_user(session_token)
        with self._lock:
            pending = self._pending.get(request_id)
        if pending is None or pending.expires_at < time.time():
            raise AuthError(404, "authorization_request_expired", "unknown or expired request_id")
        client = self._clients[pending.client_id]
        return {
            "status": "pending",
            "request_id": pending.request_id,
            "client_id": pending.client_id,
            "client_name": client.client_name,
            "requested_scopes": list(pending.scopes),
            "expires_in": max(0, int(pending.expires_at - time.time())),
        }

    def consent(self, session_token: str | None, body: dict[str, Any]) -> dict[str, Any]:
        user_id = self._session_user(session_token)
        request_id = body.get("request_id", "")
        with self._lock:
            pending = self._pending.pop(request_id, None)
        if pending is None or pending.expires_at < time.time():
            raise AuthError(400, "authorization_request_expired", "unknown or expired request_id")

        def redirect(query: dict[str, str]) -> dict[str, Any]:
            if pending.state is not None:
                query["state"] = pending.state
            return {"status": "redirect", "redirect_to": _redirect_with(pending.redirect_uri, query)}

        approved = body.get("approved_scopes", [])
        denied = body.get("decision") == "deny" or not approved
        if denied:
            return redirect({"error": "access_denied", "error_description": "user denied the request"})
        if not isinstance(approved, list) or not set(approved) <= set(pending.scopes):
            raise AuthError(400, "invalid_scope", "approved scopes must be a subset of the requested scopes")

        client = self._clients[pending.client_id]
        now = utc_now()
        grant = AccessGrant(
            grant_id=secrets.token_hex(16),
            user_id=user_id,
            client_id=pending.client_id,
            client_name=client.client_name,
            scopes=frozenset(approved),
            issued_at=now,
            expires_at=now + timedelta(seconds=self.config.grant_ttl_s),
        )
        code = secrets.token_urlsafe(32)
        with self._lock:
            self._grants[grant.grant_id] = grant
            self._codes[code] = _CodeRecord(
                client_id=pending.client_id,
                redirect_uri=pending.redirect_uri,
                scopes=tuple(sorted(approved)),
                code_challenge=pending.code_challenge,
                grant_id=grant.grant_id,
                user_id=user_id,
                expires_at=time.time() + self.config.code_ttl_s,
            )
        self._persist_grants(user_id)
        self._record_event(user_id, EventKind.GRANT_CREATED, grant.to_dict())
        return redirect({"code": code})

    def exchange_code(self, form: dict[str, str]) -> dict[str, Any]:
        if form.get("grant_type") != "authorization_code":
            raise AuthError(400, "unsupported_grant_type", "only authorization_code is supported")
        code = form.get("code", "")
        with self._lock:
            record = self._codes.get(code)
            if record is None:
                raise AuthError(400, "invalid_grant", "unknown authorization code")
            if record.expires_at < time.time():
                del self._codes[code]
                raise AuthError(400, "invalid_grant", "authorization code expired")
            if record.consumed:
                replay_jti = record.issued_jti
                self._revoke_token_locked(replay_jti)
                raise AuthError(
                    400, "invalid_grant", "authorization code replay; previously issued token revoked"
                )
            record.consumed = True

        client = self._clients.get(form.get("client_id", ""))
        if client is None or client.client_id != record.client_id:
            raise AuthError(400, "invalid_grant", "code was issued to a different client")
        if client.client_secret is not None and not secrets.compare_digest(
            client.client_secret, form.get("client_secret", "")
        ):
            raise AuthError(401, "invalid_client", "client authentication failed")
        if form.get("redirect_uri", "") != record.redirect_uri:
            raise AuthError(400, "invalid_grant", "redirect_uri does not match the code binding")
        verifier = form.get("code_verifier", "")
        if not verifier or s256_challenge(verifier) != record.code_challenge:
            raise AuthError(400, "invalid_grant", "PKCE verification failed")
        grant = self._grants.get(record.grant_id)
        if grant is None or grant.status != GRANT_ACTIVE:
            raise AuthError(400, "invalid_grant", "grant is no longer active")

        token, jti, expires_in = self._issue_token(grant)
        with self._lock:
            record.issued_jti = jti
        return {
            "access_token": token,
            "token_type": "Bearer",
            "expires_in": expires_in,
            "scope": " ".join(sorted(grant.scopes)),
        }

    def _issue_token(self, grant: AccessGrant) -> tuple[str, str, int]:
        jti = secrets.token_hex(16)
        now = int(time.time())
        expires_in = int(self.config.token_ttl_s)
        claims = {
            "iss": self.issuer,
            "sub": grant.user_id,
            "aud": self._pick_audience(grant.scopes),
            "client_id": grant.client_id,
            "scopes": sorted(grant.scopes),
            "iat": now,
            "exp": now + expires_in,
            "jti": jti,
        }
        token = sign_token(claims, self.config.signing_key, self.config.kid)
        with self._lock:
            self._tokens[jti] = _TokenRecord(jti=jti, grant_id=grant.grant_id, user_id=grant.user_id)
        self._record_event(
            grant.user_id,
            EventKind.TOKEN_ISSUED,
            {
                "token_id": jti,
                "grant_id": grant.grant_id,
                "client_id": grant.client_id,
                "scopes": sorted(grant.scopes),
                "audience": claims["aud"],
            },
        )
        return token, jti, expires_in

    def _pick_audience(self, scopes: frozenset[str]) -> str:
        """Tokens for the registration bootstrap are addressed to this server;
        data tokens go to the most recent resource covering their scopes."""
        if REGISTER_SCOPE in scopes:
            return self.issuer
        data_scopes = scopes & set(DATA_SCOPES)
        with self._lock:
            for resource_id in reversed(self._resource_order):
                if data_scopes <= set(self._resources[resource_id].endpoint_map):
                    return resource_id
            if self._resource_order:
                return self._resource_order[-1]
        return self.issuer

    # -- self-service tokens for the owner's dashboard session ---------------------

    def session_token(self, session_token: str | None, scopes: list[str] | None) -> dict[str, Any]:
        user_id = self._session_user(session_token)
        requested = frozenset(scopes) if scopes else frozenset(DATA_SCOPES)
        if not requested <= set(DATA_SCOPES):
            raise AuthError(400, "invalid_scope", "session tokens cover data scopes only")
        now = utc_now()
        grant = AccessGrant(
            grant_id=secrets.token_hex(16),
            user_id=user_id,
            client_id=SELF_CLIENT_ID,
            client_name="owner session",
            scopes=requested,
            issued_at=now,
            expires_at=now + timedelta(seconds=self.config.token_ttl_s),
        )
        with self._lock:
            self._grants[grant.grant_id] = grant
        self._persist_grants(user_id)
        self._record_event(user_id, EventKind.GRANT_CREATED, grant.to_dict())
        token, _, expires_in = self._issue_token(grant)
        return {
            "access_token": token,
            "token_type": "Bearer",
            "expires_in": expires_in,
            "scope": " ".join(sorted(requested)),
        }

    # -- verification and revocation ------------------------------------------------

    def verify(self, token: str, audience: str | None = None) -> dict[str, Any]:
        """Full check: signature, expiry, audience, and grant liveness."""
        public = self.config.signing_key.public_key()
        claims = verify_token(
            token,
            {self.config.kid: public},
            audience=audience if audience is not None else self.issuer,
        )
        with self._lock:
            record = self._tokens.get(claims.get("jti", ""))
            grant = self._grants.get(record.grant_id) if record else None
            if record is None or record.revoked or grant is None or grant.status != GRANT_ACTIVE:
                raise RevokedGrant("token is not backed by an active grant")
            if grant.expires_at < utc_now():
                raise RevokedGrant("grant expired")
        return claims

    def _revoke_token_locked(self, jti: str | None) -> None:
        if jti is None:
            return
        record = self._tokens.get(jti)
        if record is not None and not record.revoked:
            record.revoked = True
            self._revocations.append({"token_id": jti, "revoked_at": format_ts(utc_now())})

    def revoke_grant(self, session_token: str | None, grant_id: str) -> dict[str, Any]:
        user_id = self._session_user(session_token)
        with self._lock:
            grant = self._grants.get(grant_id)
            if grant is None or grant.user_id != user_id:
                raise AuthError(404, "unknown_grant", f"no grant {grant_id!r} for this user")
            if grant.status == GRANT_ACTIVE:
                grant.status = GRANT_REVOKED
                grant.revoked_at = utc_now()
                for record in self._tokens.values():
                    if record.grant_id == grant_id:
                        self._revoke_token_locked(record.jti)
        self._persist_grants(user_id)
        self._record_event(user_id, EventKind.GRANT_REVOKED, {"grant_id": grant_id})
        return grant.to_dict()

    def list_grants(self, session_token: str | None) -> list[dict[str, Any]]:
        user_id = self._session_user(session_token)
        with self._lock:
            grants = [g.to_dict() for g in self._grants.values() if g.user_id == user_id]
        grants.sort(key=lambda g: (g["issued_at"], g["grant_id"]))
        return grants

    def revocation_list(self, since: str | None = None) -> dict[str, Any]:
        with self._lock:
            entries = list(self._revocations)
        if since:
            cutoff = parse_ts(since)
            entries = [e for e in entries if parse_ts(e["revoked_at"]) >= cutoff]
        return {"revoked": entries, "now": format_ts(utc_now())}


# --- HTTP layer -------------------------------------------------------------------

def _bearer(request: Request) -> str | None:
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip()
    return None


async def _json_body(request: Request) -> dict[str, Any]:
    try:
        body = await request.json()
    except Exception:
        raise AuthError(400, "invalid_request", "body must be a JSON object")
    if not isinstance(body, dict):
        raise AuthError(400, "invalid_request", "body must be a JSON object")
    return body


def create_auth_app(service: AuthService) -> FastAPI:
    app = FastAPI(title="puda-access-control", docs_url=None, redoc_url=None)
    if service.config.dashboard_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[service.config.dashboard_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(AuthError)
    async def _auth_error(_request: Request, exc: AuthError):
        body = {"error": exc.code}
        if exc.detail:
            body["error_description"] = exc.detail
        return JSONResponse(status_code=exc.status, content=body)

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "role": "authorization_server"}

    @app.get("/.well-known/openid-configuration")
    async def discovery():
        return service.discovery_document()

    @app.get("/keys")
    async def keys():
        return service.jwks()

    @app.post("/register/client")
    async def register_client(request: Request):
        registration = service.register_client(await _json_body(request))
        return JSONResponse(status_code=201, content=registration.to_dict(include_secret=True))

    @app.post("/register/resource")
    async def register_resource(request: Request):
        registration = service.register_resource(_bearer(request), await _json_body(request))
        return JSONResponse(status_code=201, content=registration.to_dict())

    @app.get("/authorize")
    async def authorize(request: Request):
        return service.authorize(dict(request.query_params))

    @app.post("/session")
    async def session(request: Request):
        body = await _json_body(request)
        return service.open_session(str(body.get("username", "")), str(body.get("password", "")))

    @app.post("/session/token")
    async def session_token(request: Request):
        body = await _json_body(request)
        return service.session_token(_bearer(request), body.get("scopes"))

    @app.get("/consent/{request_id}")
    async def pending(request_id: str, request: Request):
        return service.pending_prompt(_bearer(request), request_id)

    @app.post("/consent")
    async def consent(request: Request):
        return service.consent(_bearer(request), await _json_body(request))

    @app.post("/token")
    async def token(request: Request):
        # OAuth 2.0 token requests are form-encoded; parsed by hand to keep
        # the error shape uniform.
        from urllib.parse import parse_qsl

        raw = (await request.body()).decode("utf-8")
        form = dict(parse_qsl(raw))
        return service.exchange_code(form)

    @app.get("/revocations")
    async def revocations(request: Request):
        return service.revocation_list(request.query_params.get("since"))

    @app.get("/grants")
    async def grants(request: Request):
        return {"grants": service.list_grants(_bearer(request))}

    @app.post("/grants/{grant_id}/revoke")
    async def revoke(grant_id: str, request: Request):
        return service.revoke_grant(_bearer(request), grant_id)

    return app
