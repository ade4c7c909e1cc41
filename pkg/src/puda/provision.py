"""Dataset agent's network face: capture ingestion, explicit rebuilds, a
public capability card, and scope-enforced data provision endpoints.

Tokens are verified statelessly against the authorization server's published
key; revocations arrive through a polled revocation list, so the two services
share no database.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import httpx
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from puda import __version__
from puda.backends import BackendSet
from puda.model import (
    DATA_SCOPES,
    PROFILE_SCOPE,
    PageCapture,
    Profile,
    ValidationError,
    canonical_json_bytes,
    code_threshold,
    format_ts,
)
from puda.pipeline import PageProcessingError, build_dataset, filter_keywords, process_page
from puda.store import EventKind, StorageFull, Store
from puda.taxonomy import CategoryTaxonomy
from puda.tokens import (
    AudienceMismatch,
    BadSignature,
    TokenExpired,
    keys_from_jwks,
    verify_token,
)

DEFAULT_POLL_INTERVAL_S = 30.0


class ProvisionError(Exception):
    def __init__(self, status: int, code: str, detail: str = "", **extra: Any):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.status = status
        self.code = code
        self.detail = detail
        self.extra = extra


@dataclass
class ProvisionConfig:
    data_dir: str
    recorder_secret: str
    auth_issuer: str
    taxonomy: CategoryTaxonomy
    backends: BackendSet = field(default_factory=BackendSet.stub)
    agent_name: str = "puda-dataset-agent"
    dashboard_origin: str | None = None
    poll_interval_s: float = DEFAULT_POLL_INTERVAL_S
    # assigned by the authorization server when this agent registers itself
    audience: str | None = None


class TokenVerifier:
    """Stateless bearer-token checks for the resource server.

    Needs only the issuer's discovery document and published key. Revocation
    state is refreshed from the issuer's revocation list at most once per poll
    interval, which bounds how long a revoked token keeps working.
    """

    def __init__(
        self,
        issuer: str,
        audience: Callable[[], str | None],
        poll_interval_s: float = DEFAULT_POLL_INTERVAL_S,
    ):
        self.issuer = issuer.rstrip("/")
        self._audience = audience
        self.poll_interval_s = poll_interval_s
        self._lock = threading.Lock()
        self._keys = None
        self._revoked: set[str] = set()
        self._last_poll = 0.0

    def _fetch_keys(self):
        with self._lock:
            if self._keys is not None:
                return self._keys
        try:
            discovery = httpx.get(
                f"{self.issuer}/.well-known/openid-configuration", timeout=10.0
            ).json()
            jwks = httpx.get(discovery["jwks_uri"], timeout=10.0).json()
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise ProvisionError(503, "authorization_server_unreachable", str(exc)) from exc
        keys = keys_from_jwks(jwks)
        with self._lock:
            self._keys = keys
        return keys

    def _refresh_revocations(self) -> None:
        with self._lock:
            stale = time.monotonic() - self._last_poll > self.poll_interval_s
        if not stale:
            return
        try:
            body = httpx.get(f"{self.issuer}/revocations", timeout=10.0).json()
            revoked = {entry["token_id"] for entry in body.get("revoked", [])}
        except (httpx.HTTPError, KeyError, ValueError, TypeError):
            return  # keep the last known list rather than dropping availability
        with self._lock:
            self._revoked = revoked
            self._last_poll = time.monotonic()

    def verify(self, token: str) -> dict[str, Any]:
        audience = self._audience()
        if audience is None:
            raise ProvisionError(503, "not_registered", "resource server has no assigned audience")
        keys = self._fetch_keys()
        try:
            claims = verify_token(token, keys, audience=audience)
        except TokenExpired as exc:
            raise ProvisionError(401, "token_expired", str(exc)) from exc
        except AudienceMismatch as exc:
            raise ProvisionError(401, "audience_mismatch", str(exc)) from exc
        except BadSignature as exc:
            raise ProvisionError(401, "bad_signature", str(exc)) from exc
        self._refresh_revocations()
        with self._lock:
            if claims.get("jti") in self._revoked:
                raise ProvisionError(401, "token_revoked", "token was revoked")
        return claims


_SCOPE_DESCRIPTIONS = {
    PROFILE_SCOPE: "Static profile basics: name, age, date of birth, gender, address.",
    "puda:categories:1": "Preference categories from tier 1 of the closed taxonomy.",
    "puda:categories:2": "Preference categories from tier 2 of the closed taxonomy.",
    "puda:categories:3": "Preference categories from tier 3 of the closed taxonomy.",
    "puda:keywords:090": "Merged browsing keywords with score >= 0.90.",
    "puda:keywords:085": "Merged browsing keywords with score >= 0.85.",
    "puda:keywords:080": "Merged browsing keywords with score >= 0.80.",
    "puda:keywords:075": "Merged browsing keywords with score >= 0.75.",
    "puda:history:short": "Reverse-chronological browsing history with short summaries.",
    "puda:history:long": "Reverse-chronological browsing history with long summaries.",
}

_SCOPE_PATHS = {
    PROFILE_SCOPE: "/data/profile",
    "puda:categories:1": "/data/categories/1",
    "puda:categories:2": "/data/categories/2",
    "puda:categories:3": "/data/categories/3",
    "puda:keywords:090": "/data/keywords/090",
    "puda:keywords:085": "/data/keywords/085",
    "puda:keywords:080": "/data/keywords/080",
    "puda:keywords:075": "/data/keywords/075",
    "puda:history:short": "/data/history/short",
    "puda:history:long": "/data/history/long",
}


class ProvisionService:
    def __init__(self, config: ProvisionConfig, store: Store | None = None):
        self.config = config
        self.store = store or Store(config.data_dir)
        self.verifier = TokenVerifier(
            config.auth_issuer, lambda: self.config.audience, config.poll_interval_s
        )
        self._lock = threading.Lock()
        self._rebuilding: set[str] = set()
        self._ingest_index: dict[str, dict[tuple[str, str], int]] = {}

    # -- ingestion -------------------------------------------------------------

    def _check_recorder_secret(self, bearer: str | None) -> None:
        if not bearer or not secrets.compare_digest(bearer, self.config.recorder_secret):
            raise ProvisionError(401, "unauthorized", "missing or wrong recorder credential")

    def _index_for(self, user_id: str) -> dict[tuple[str, str], int]:
        with self._lock:
            index = self._ingest_index.get(user_id)
        if index is None:
            index = {}
            for event in self.store.read_events(user_id):
                if event.kind is EventKind.CAPTURE:
                    payload = event.payload
                    index[(payload["url"], payload["captured_at"])] = event.offset
            with self._lock:
                self._ingest_index[user_id] = index
        return index

    def ingest_page(self, bearer: str | None, body: dict[str, Any]) -> dict[str, Any]:
        self._check_recorder_secret(bearer)
        try:
            capture = PageCapture.from_dict(body).validate()
        except ValidationError as exc:
            raise ProvisionError(
                400, "invalid_capture", str(exc), field=exc.field
            ) from exc
        index = self._index_for(capture.user_id)
        key = (capture.url, format_ts(capture.captured_at))
        existing = index.get(key)
        if existing is not None:
            return {"offset": existing, "duplicate": True}
        try:
            offset = self.store.append(capture.user_id, EventKind.CAPTURE, capture.to_dict())
        except StorageFull as exc:
            raise ProvisionError(507, "storage_full", str(exc)) from exc
        index[key] = offset
        return {"offset": offset, "duplicate": False}

    # -- rebuild ----------------------------------------------------------------

    def rebuild(self, bearer: str | None, user_id: str) -> dict[str, Any]:
        self._check_recorder_secret(bearer)
        with self._lock:
            if user_id in self._rebuilding:
                raise ProvisionError(409, "rebuild_in_progress", f"user {user_id} already rebuilding")
            self._rebuilding.add(user_id)
        try:
            return self._rebuild_inner(user_id)
        finally:
            with self._lock:
                self._rebuilding.discard(user_id)

    def _rebuild_inner(self, user_id: str) -> dict[str, Any]:
        captures = self.store.load_captures(user_id)
        profile = self._profile_for(user_id)
        records = []
        failures: list[dict[str, str]] = []
        for capture in captures:
            try:
                records.append(process_page(capture, self.config.backends))
            except PageProcessingError as exc:
                failures.append(
                    {
                        "url": exc.capture_ref.url,
                        "captured_at": format_ts(exc.capture_ref.captured_at),
                        "error": str(exc.cause),
                    }
                )
        dataset = build_dataset(user_id, profile, records, self.config.taxonomy, self.config.backends)
        version = dataset.content_version()
        self.store.put_dataset(user_id, dataset)
        self.store.append(
            user_id,
            EventKind.DATASET_BUILT,
            {"dataset_version": version, "built_at": format_ts(dataset.built_at)},
        )
        return {
            "pages_processed": len(records),
            "pages_failed": len(failures),
            "failures": failures,
            "dataset_version": version,
        }

    def _profile_for(self, user_id: str) -> Profile:
        data = self.store.get_profile(user_id)
        if data is None:
            raise ProvisionError(
                409,
                "no_profile",
                f"user {user_id} has no stored profile; upload one before rebuilding",
            )
        return Profile.from_dict(data)

    def put_profile(self, bearer: str | None, user_id: str, body: dict[str, Any]) -> dict[str, Any]:
        """Store or replace the static profile the rebuild stage needs."""
        self._check_recorder_secret(bearer)
        try:
            profile = Profile.from_dict(body)
        except ValidationError as exc:
            raise ProvisionError(400, "invalid_profile", str(exc), field=exc.field) from exc
        self.store.put_profile(user_id, profile.to_dict())
        return {"user_id": user_id, "profile": profile.to_dict()}

    # -- provision --------------------------------------------------------------

    def get_data(self, bearer: str | None, scope: str) -> bytes:
        if not bearer:
            raise ProvisionError(401, "unauthorized", "missing bearer token")
        claims = self.verifier.verify(bearer)
        if scope not in claims.get("scopes", []):
            raise ProvisionError(
                403, "insufficient_scope", f"endpoint requires scope {scope}", required_scope=scope
            )
        user_id = claims.get("sub", "")
        dataset = self.store.get_dataset(user_id)
        if dataset is None:
            raise ProvisionError(404, "no_dataset_built", f"no dataset for user {user_id}")

        if scope == PROFILE_SCOPE:
            payload: Any = dataset.profile.to_dict()
        elif scope.startswith("puda:categories:"):
            tier = int(scope.rsplit(":", 1)[1])
            payload = [p.canonical for p in dataset.categories.get(tier, ())]
        elif scope.startswith("puda:keywords:"):
            threshold = code_threshold(scope.rsplit(":", 1)[1])
            payload = [k.to_dict() for k in filter_keywords(dataset.keywords, threshold)]
        else:
            variant = scope.rsplit(":", 1)[1]
            entries = dataset.history_short if variant == "short" else dataset.history_long
            payload = [e.to_dict() for e in entries]
        return canonical_json_bytes(payload)

    def capability_card(self) -> dict[str, Any]:
        return {
            "agent_name": self.config.agent_name,
            "version": __version__,
            "provision_endpoints": {
                scope: {"path": _SCOPE_PATHS[scope], "description": _SCOPE_DESCRIPTIONS[scope]}
                for scope in DATA_SCOPES
            },
            "authorization_server": self.config.auth_issuer.rstrip("/"),
        }


def _bearer(request: Request) -> str | None:
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip()
    return None


def create_provision_app(service: ProvisionService) -> FastAPI:
    app = FastAPI(title="puda-dataset-agent", docs_url=None, redoc_url=None)
    if service.config.dashboard_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[service.config.dashboard_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(ProvisionError)
    async def _provision_error(_request: Request, exc: ProvisionError):
        body = {"error": exc.code}
        if exc.detail:
            body["detail"] = exc.detail
        body.update(exc.extra)
        return JSONResponse(status_code=exc.status, content=body)

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "role": "dataset_agent"}

    @app.get("/.well-known/puda-agent")
    async def card():
        return service.capability_card()

    @app.post("/ingest/page")
    async def ingest(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ProvisionError(400, "invalid_capture", "body must be a JSON object")
        if not isinstance(body, dict):
            raise ProvisionError(400, "invalid_capture", "body must be a JSON object")
        return service.ingest_page(_bearer(request), body)

    @app.put("/users/{user_id}/profile")
    async def put_profile(user_id: str, request: Request):
        body = await request.json()
        return service.put_profile(_bearer(request), user_id, body)

    @app.post("/rebuild/{user_id}")
    async def rebuild(user_id: str, request: Request):
        return service.rebuild(_bearer(request), user_id)

    def _data_response(request: Request, scope: str) -> Response:
        payload = service.get_data(_bearer(request), scope)
        return Response(content=payload, media_type="application/json")

    @app.get("/data/profile")
    async def data_profile(request: Request):
        return _data_response(request, PROFILE_SCOPE)

    @app.get("/data/categories/{tier}")
    async def data_categories(tier: str, request: Request):
        if tier not in ("1", "2", "3"):
            raise ProvisionError(404, "unknown_endpoint", f"no categories tier {tier!r}")
        return _data_response(request, f"puda:categories:{tier}")

    @app.get("/data/keywords/{code}")
    async def data_keywords(code: str, request: Request):
        if code not in ("090", "085", "080", "075"):
            raise ProvisionError(404, "unknown_endpoint", f"no keywords threshold {code!r}")
        return _data_response(request, f"puda:keywords:{code}")

    @app.get("/data/history/{variant}")
    async def data_history(variant: str, request: Request):
        if variant not in ("short", "long"):
            raise ProvisionError(404, "unknown_endpoint", f"no history variant {variant!r}")
        return _data_response(request, f"puda:history:{variant}")

    return app
