"""Experiment harness: spawns the two services, walks the full
discovery-to-fetch agent flow, assembles all eleven context conditions, and
measures payload bytes, a token proxy, and round-trip latency.

The token proxy is ceil(utf8_bytes / 4) — a model-agnostic stand-in, not any
specific tokenizer. Latency covers bundle assembly plus one local provision
round trip, not remote model inference.
"""

from __future__ import annotations

import csv
import json
import secrets
import socket
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import httpx
import uvicorn

from puda.authserver import AuthConfig, AuthService, create_auth_app, s256_challenge
from puda.backends import BackendSet
from puda.model import (
    DATA_SCOPES,
    REGISTER_SCOPE,
    ALL_CONDITIONS,
    GranularityCondition,
    PageCapture,
    Profile,
    ValidationError,
    condition_scope,
    format_ts,
    scope_data_path,
    utc_now,
)
from puda.pipeline import build_context
from puda.provision import ProvisionConfig, ProvisionService, create_provision_app
from puda.store import Store
from puda.taxonomy import CategoryTaxonomy
from puda.tokens import b64url_encode

TOKEN_PROXY_NAME = "ceil_utf8_bytes_over_4"


class HarnessError(Exception):
    pass


class ServerSpawnFailure(HarnessError):
    pass


class MissingDataset(HarnessError):
    pass


class FlowError(HarnessError):
    """A step of the agent flow failed; `step` names where."""

    def __init__(self, step: str, detail: str):
        super().__init__(f"{step}: {detail}")
        self.step = step
        self.detail = detail


def token_proxy(text: str) -> int:
    """ceil(utf8_byte_length / 4); documented approximation of tokenizer counts."""
    return (len(text.encode("utf-8")) + 3) // 4


# --- service spawning ------------------------------------------------------------

@dataclass
class ServiceHandle:
    base_url: str
    server: uvicorn.Server
    thread: threading.Thread

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=10)


def _bind_local_socket() -> socket.socket:
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind(("127.0.0.1", 0))
    return sock


def spawn_app(app, sock: socket.socket | None = None) -> ServiceHandle:
    """Serve an ASGI app on a loopback port in a daemon thread."""
    sock = sock or _bind_local_socket()
    host, port = sock.getsockname()
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, kwargs={"sockets": [sock]}, daemon=True)
    thread.start()
    deadline = time.monotonic() + 15
    while not server.started:
        if not thread.is_alive():
            raise ServerSpawnFailure("server thread exited before startup")
        if time.monotonic() > deadline:
            raise ServerSpawnFailure("server did not start within 15s")
        time.sleep(0.01)
    return ServiceHandle(base_url=f"http://{host}:{port}", server=server, thread=thread)


@dataclass
class PudaStack:
    """Both services plus the shared store, wired and registered."""

    auth: ServiceHandle
    data: ServiceHandle
    auth_service: AuthService
    provision_service: ProvisionService
    store: Store
    credentials: tuple[str, str]
    recorder_secret: str
    resource_id: str

    @property
    def issuer(self) -> str:
        return self.auth.base_url

    @property
    def data_url(self) -> str:
        return self.data.base_url

    def stop(self) -> None:
        self.data.stop()
        self.auth.stop()

    def __enter__(self) -> PudaStack:
        return self

    def __exit__(self, *exc_info) -> None:
        self.stop()


def spawn_stack(
    data_dir: str | Path,
    taxonomy: CategoryTaxonomy,
    backends: BackendSet | None = None,
    credentials: tuple[str, str] = ("demo-user", "demo-pass"),
    recorder_secret: str | None = None,
    poll_interval_s: float = 1.0,
    token_ttl_s: float = 3600.0,
    code_ttl_s: float = 120.0,
) -> PudaStack:
    """Spawn authorization and dataset services on loopback ports and run the
    registration bootstrap so issued tokens address the dataset agent."""
    recorder_secret = recorder_secret or secrets.token_urlsafe(16)
    store = Store(data_dir)

    auth_sock = _bind_local_socket()
    issuer = "http://{}:{}".format(*auth_sock.getsockname())
    auth_service = AuthService(
        AuthConfig(
            issuer=issuer,
            users={credentials[0]: credentials[1]},
            token_ttl_s=token_ttl_s,
            code_ttl_s=code_ttl_s,
        ),
        store=store,
    )
    auth_handle = spawn_app(create_auth_app(auth_service), auth_sock)

    data_sock = _bind_local_socket()
    data_url = "http://{}:{}".format(*data_sock.getsockname())
    provision_service = ProvisionService(
        ProvisionConfig(
            data_dir=str(data_dir),
            recorder_secret=recorder_secret,
            auth_issuer=issuer,
            taxonomy=taxonomy,
            backends=backends or BackendSet.stub(),
            poll_interval_s=poll_interval_s,
        ),
        store=store,
    )
    data_handle = spawn_app(create_provision_app(provision_service), data_sock)

    try:
        resource_id = register_dataset_agent(issuer, data_url, credentials)
    except Exception:
        data_handle.stop()
        auth_handle.stop()
        raise
    provision_service.config.audience = resource_id
    return PudaStack(
        auth=auth_handle,
        data=data_handle,
        auth_service=auth_service,
        provision_service=provision_service,
        store=store,
        credentials=credentials,
        recorder_secret=recorder_secret,
        resource_id=resource_id,
    )


# --- agent flows -------------------------------------------------------------------

def _record(
    transcript: list[dict[str, Any]], step: str, method: str, url: str, response: httpx.Response
) -> None:
    transcript.append(
        {"step": step, "method": method, "url": url, "status": response.status_code}
    )


def _flow_request(
    client: httpx.Client,
    transcript: list[dict[str, Any]],
    step: str,
    method: str,
    url: str,
    ok_status: int = 200,
    **kwargs: Any,
) -> httpx.Response:
    try:
        response = client.request(method, url, **kwargs)
    except httpx.HTTPError as exc:
        transcript.append({"step": step, "method": method, "url": url, "status": None})
        raise FlowError(step, f"transport failure: {exc}") from exc
    _record(transcript, step, method, url, response)
    if response.status_code != ok_status:
        raise FlowError(step, f"HTTP {response.status_code}: {response.text[:300]}")
    return response


def _run_code_flow(
    client: httpx.Client,
    transcript: list[dict[str, Any]],
    issuer: str,
    scopes: Sequence[str],
    credentials: tuple[str, str],
    client_name: str,
    redirect_uri: str,
) -> dict[str, Any]:
    """Discovery, registration, consent, and PKCE exchange; returns the token
    endpoint response body."""
    discovery = _flow_request(
        client, transcript, "discovery", "GET", f"{issuer.rstrip('/')}/.well-known/openid-configuration"
    ).json()

    registration = _flow_request(
        client,
        transcript,
        "client_registration",
        "POST",
        discovery["registration_endpoint"],
        ok_status=201,
        json={"client_name": client_name, "redirect_uris": [redirect_uri]},
    ).json()
    client_id = registration["client_id"]

    verifier = b64url_encode(secrets.token_bytes(32))
    state = secrets.token_urlsafe(8)
    authorize = _flow_request(
        client,
        transcript,
        "authorize",
        "GET",
        discovery["authorization_endpoint"],
        params={
            "response_type": "code",
            "client_id": client_id,
            "redirect_uri": redirect_uri,
            "scope": " ".join(scopes),
            "state": state,
            "code_challenge": s256_challenge(verifier),
            "code_challenge_method": "S256",
        },
    ).json()
    if authorize.get("status") != "pending":
        raise FlowError("authorize", f"expected a pending consent prompt, got {authorize}")

    session = _flow_request(
        client,
        transcript,
        "session",
        "POST",
        discovery["session_endpoint"],
        json={"username": credentials[0], "password": credentials[1]},
    ).json()

    consent = _flow_request(
        client,
        transcript,
        "consent",
        "POST",
        discovery["consent_endpoint"],
        headers={"Authorization": f"Bearer {session['session_token']}"},
        json={"request_id": authorize["request_id"], "approved_scopes": list(scopes)},
    ).json()
    redirect_to = consent.get("redirect_to", "")
    from urllib.parse import parse_qs, urlsplit

    query = parse_qs(urlsplit(redirect_to).query)
    if "error" in query:
        raise FlowError("consent", f"authorization error: {query['error']}")
    if query.get("state", [None])[0] != state:
        raise FlowError("consent", "state was not echoed verbatim")
    code = query.get("code", [None])[0]
    if not code:
        raise FlowError("consent", f"redirect carried no code: {redirect_to}")

    token_body = _flow_request(
        client,
        transcript,
        "token_exchange",
        "POST",
        discovery["token_endpoint"],
        content="&".join(
            f"{k}={v}"
            for k, v in {
                "grant_type": "authorization_code",
                "code": code,
                "client_id": client_id,
                "code_verifier": verifier,
                "redirect_uri": redirect_uri,
            }.items()
        ),
        headers={"Content-Type": "application/x-www-form-urlencoded"},
    ).json()
    return token_body


def register_dataset_agent(
    issuer: str, data_url: str, credentials: tuple[str, str]
) -> str:
    """Bootstrap trust: the dataset agent runs the code flow for the dedicated
    registration scope, then registers its provision endpoints. Returns its
    assigned resource id, which becomes the audience of data tokens."""
    transcript: list[dict[str, Any]] = []
    with httpx.Client(timeout=10.0) as client:
        token_body = _run_code_flow(
            client,
            transcript,
            issuer,
            [REGISTER_SCOPE],
            credentials,
            client_name="puda-dataset-agent",
            redirect_uri=f"{data_url}/bootstrap/callback",
        )
        endpoint_map = {scope: f"{data_url}{scope_data_path(scope)}" for scope in DATA_SCOPES}
        registration = _flow_request(
            client,
            transcript,
            "resource_registration",
            "POST",
            f"{issuer.rstrip('/')}/register/resource",
            ok_status=201,
            headers={"Authorization": f"Bearer {token_body['access_token']}"},
            json={"endpoint_map": endpoint_map},
        ).json()
    return registration["resource_id"]


@dataclass
class AgentFlowResult:
    token: str
    granted_scopes: tuple[str, ...]
    payloads: dict[str, bytes]
    transcript: list[dict[str, Any]]


def mock_agent_flow(
    issuer_url: str,
    requested_scopes: Sequence[str],
    credentials: tuple[str, str],
    data_url: str,
    client_name: str = "demo-agent",
) -> AgentFlowResult:
    """Full external-agent path: discovery, registration, consent (scripted),
    PKCE exchange, capability card, then one data fetch per granted scope."""
    transcript: list[dict[str, Any]] = []
    with httpx.Client(timeout=10.0) as client:
        token_body = _run_code_flow(
            client,
            transcript,
            issuer_url,
            list(requested_scopes),
            credentials,
            client_name=client_name,
            redirect_uri="http://127.0.0.1:1/agent/callback",
        )
        token = token_body["access_token"]
        granted = tuple(token_body.get("scope", "").split())

        card = _flow_request(
            client, transcript, "capability_card", "GET", f"{data_url}/.well-known/puda-agent"
        ).json()
        endpoints = card.get("provision_endpoints", {})

        payloads: dict[str, bytes] = {}
        for scope in granted:
            if scope not in DATA_SCOPES:
                continue
            path = endpoints.get(scope, {}).get("path") or scope_data_path(scope)
            response = _flow_request(
                client,
                transcript,
                f"fetch:{scope}",
                "GET",
                f"{data_url}{path}",
                headers={"Authorization": f"Bearer {token}"},
            )
            payloads[scope] = response.content
    return AgentFlowResult(
        token=token, granted_scopes=granted, payloads=payloads, transcript=transcript
    )


# --- cost measurement ----------------------------------------------------------------

@dataclass(frozen=True)
class CostRow:
    run_id: str
    condition: str
    query_id: str
    serialized_bytes: int
    token_proxy_in: int
    latency_ms: float
    dataset_version: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "condition": self.condition,
            "query_id": self.query_id,
            "serialized_bytes": self.serialized_bytes,
            "token_proxy_in": self.token_proxy_in,
            "latency_ms": self.latency_ms,
            "dataset_version": self.dataset_version,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> CostRow:
        return cls(
            run_id=str(data["run_id"]),
            condition=str(data["condition"]),
            query_id=str(data["query_id"]),
            serialized_bytes=int(data["serialized_bytes"]),
            token_proxy_in=int(data["token_proxy_in"]),
            latency_ms=float(data["latency_ms"]),
            dataset_version=str(data["dataset_version"]),
        )


@dataclass
class CostReport:
    rows: list[CostRow]
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CostReport):
            return NotImplemented
        return self.rows == other.rows


CSV_HEADER = [
    "run_id",
    "condition",
    "query_id",
    "serialized_bytes",
    "token_proxy_in",
    "latency_ms",
    "dataset_version",
]


def emit_report(report: CostReport, format: str, out_path: str | Path) -> Path:
    """Write a report as CSV or JSON (array of row objects). Refuses to write
    an empty report."""
    if not report.rows:
        raise ValueError("refusing to write an empty report")
    out_path = Path(out_path)
    if format == "csv":
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in report.rows:
                data = row.to_dict()
                writer.writerow([data[column] for column in CSV_HEADER])
    elif format == "json":
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump([row.to_dict() for row in report.rows], fh, ensure_ascii=False, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown report format {format!r}")
    return out_path


def parse_report(path: str | Path, format: str | None = None) -> CostReport:
    path = Path(path)
    format = format or ("csv" if path.suffix == ".csv" else "json")
    if format == "csv":
        with open(path, encoding="utf-8") as fh:
            rows = [CostRow.from_dict(item) for item in csv.DictReader(fh)]
    else:
        rows = [CostRow.from_dict(item) for item in json.loads(path.read_text(encoding="utf-8"))]
    return CostReport(rows=rows)


def load_corpus(path: str | Path) -> list[PageCapture]:
    """JSON Lines corpus, one capture per line."""
    captures: list[PageCapture] = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            captures.append(PageCapture.from_dict(json.loads(line)).validate())
        except (ValueError, ValidationError) as exc:
            raise HarnessError(f"{path}:{line_no}: bad capture: {exc}") from exc
    if not captures:
        raise HarnessError(f"{path}: corpus is empty")
    return captures


def load_profile(path: str | Path) -> Profile:
    return Profile.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_queries(path: str | Path) -> list[dict[str, str]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    queries: list[dict[str, str]] = []
    for index, item in enumerate(data, start=1):
        if isinstance(item, str):
            queries.append({"query_id": f"q{index}", "text": item})
        else:
            queries.append({"query_id": item["query_id"], "text": item["text"]})
    return queries


def _normalize_queries(
    queries: Sequence[str] | Sequence[Mapping[str, str]]
) -> list[tuple[str, str]]:
    normalized: list[tuple[str, str]] = []
    for index, item in enumerate(queries, start=1):
        if isinstance(item, str):
            normalized.append((f"q{index}", item))
        else:
            normalized.append((item["query_id"], item["text"]))
    return normalized


def run_conditions(
    corpus_path: str | Path,
    profile_path: str | Path,
    queries: Sequence[str] | Sequence[Mapping[str, str]],
    conditions: Iterable[GranularityCondition] | None = None,
    backends: BackendSet | None = None,
    data_dir: str | Path | None = None,
    poll_interval_s: float = 1.0,
    parallel: bool = False,
) -> CostReport:
    """Build the dataset from a corpus, then measure every (condition, query)
    cell: payload bytes, input-token proxy of query+context, and the latency
    of assembling the bundle plus one authenticated provision round trip.

    Sequential by default so latency numbers are stable. With `parallel`,
    conditions run concurrently and latency_ms is reported as 0.0: use it for
    byte/token-only runs."""
    conditions = tuple(conditions) if conditions is not None else ALL_CONDITIONS
    normalized_queries = _normalize_queries(queries)
    captures = load_corpus(corpus_path)
    profile = load_profile(profile_path)
    user_ids = {c.user_id for c in captures}
    if len(user_ids) != 1:
        raise HarnessError(f"corpus must cover exactly one user, found {sorted(user_ids)}")
    user_id = user_ids.pop()

    from puda.config import packaged_taxonomy

    with tempfile.TemporaryDirectory(prefix="puda-harness-") as scratch:
        stack = spawn_stack(
            data_dir or scratch,
            taxonomy=packaged_taxonomy(),
            backends=backends,
            credentials=(user_id, secrets.token_urlsafe(12)),
            poll_interval_s=poll_interval_s,
        )
        with stack:
            run_id = uuid.uuid4().hex[:12]
            headers = {"Authorization": f"Bearer {stack.recorder_secret}"}
            with httpx.Client(timeout=30.0) as client:
                client.put(
                    f"{stack.data_url}/users/{user_id}/profile",
                    json=profile.to_dict(),
                    headers=headers,
                ).raise_for_status()
                for capture in captures:
                    response = client.post(
                        f"{stack.data_url}/ingest/page", json=capture.to_dict(), headers=headers
                    )
                    if response.status_code != 200:
                        raise HarnessError(f"ingest failed: {response.text[:300]}")
                rebuild = client.post(f"{stack.data_url}/rebuild/{user_id}", headers=headers)
                if rebuild.status_code != 200:
                    raise HarnessError(f"rebuild failed: {rebuild.text[:300]}")
                dataset_version = rebuild.json()["dataset_version"]

            dataset = stack.store.get_dataset(user_id)
            if dataset is None:
                raise MissingDataset(f"no dataset was persisted for {user_id}")

            def measure_condition(condition: GranularityCondition) -> list[CostRow]:
                scopes = sorted(condition_scope(condition))
                token = None
                if scopes:
                    flow = mock_agent_flow(
                        stack.issuer,
                        scopes,
                        stack.credentials,
                        stack.data_url,
                        client_name=f"measure-{condition.label}",
                    )
                    token = flow.token
                fetch_url, fetch_headers = _measurement_target(stack, condition, token)
                measured: list[CostRow] = []
                with httpx.Client(timeout=30.0) as fetch_client:
                    for query_id, text in normalized_queries:
                        started = time.perf_counter()
                        bundle = build_context(dataset, condition)
                        fetched = fetch_client.get(fetch_url, headers=fetch_headers)
                        latency_ms = (time.perf_counter() - started) * 1000.0
                        if fetched.status_code != 200:
                            raise HarnessError(
                                f"measurement fetch failed for {condition.label}: {fetched.text[:300]}"
                            )
                        combined = text + "\n" + bundle.payload_bytes().decode("utf-8")
                        measured.append(
                            CostRow(
                                run_id=run_id,
                                condition=condition.label,
                                query_id=query_id,
                                serialized_bytes=bundle.serialized_bytes,
                                token_proxy_in=token_proxy(combined),
                                latency_ms=0.0 if parallel else latency_ms,
                                dataset_version=dataset_version,
                            )
                        )
                return measured

            rows: list[CostRow] = []
            if parallel:
                from concurrent.futures import ThreadPoolExecutor

                with ThreadPoolExecutor(max_workers=min(8, len(conditions) or 1)) as pool:
                    for chunk in pool.map(measure_condition, conditions):
                        rows.extend(chunk)
            else:
                for condition in conditions:
                    rows.extend(measure_condition(condition))
        meta = {
            "run_id": run_id,
            "created_at": format_ts(utc_now()),
            "backend": "stub" if backends is None else "custom",
            "token_proxy": TOKEN_PROXY_NAME,
            "latency_note": (
                "parallel run: latency not measured"
                if parallel
                else "bundle assembly plus one local provision round trip"
            ),
            "conditions": [c.label for c in conditions],
            "queries": [query_id for query_id, _ in normalized_queries],
        }
        return CostReport(rows=rows, meta=meta)


def _measurement_target(
    stack: PudaStack, condition: GranularityCondition, token: str | None
) -> tuple[str, dict[str, str]]:
    """The provision request timed for a condition: its own granularity
    endpoint (profile for profile-only), or the public card when no data is
    in scope."""
    scopes = condition_scope(condition)
    if not scopes:
        return f"{stack.data_url}/.well-known/puda-agent", {}
    own = sorted(scopes - {"puda:profile"}) or ["puda:profile"]
    path = scope_data_path(own[0])
    return f"{stack.data_url}{path}", {"Authorization": f"Bearer {token}"}
