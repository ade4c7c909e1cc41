"""Operator command line: ingestion, rebuilds, serving, scripted consent, the
cost harness, and a demo agent run.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import json
import sys
import threading
from pathlib import Path

import click

from puda import __version__
from puda.backends import BackendSet
from puda.config import from_env, load_settings_taxonomy
from puda.model import (
    DATA_SCOPES,
    format_ts,
    is_valid_scope,
)
from puda.store import EventKind, Store

click.UsageError.exit_code = 1


@click.group()
@click.version_option(__version__)
def cli():
    """User-sovereign personal-data agent toolbox."""


@cli.command()
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--user", "user_id", required=True, help="User the captures belong to.")
@click.option("--profile", "profile_path", type=click.Path(exists=True, dir_okay=False),
              help="Profile JSON to store alongside the captures.")
def ingest(corpus: str, user_id: str, profile_path: str | None):
    """Append a JSONL corpus of page captures to the user's store."""
    from puda.harness import load_corpus, load_profile

    settings = from_env()
    store = Store(settings.data_dir)
    captures = load_corpus(corpus)
    appended = duplicates = 0
    seen = {
        (e.payload["url"], e.payload["captured_at"])
        for e in store.read_events(user_id)
        if e.kind is EventKind.CAPTURE
    }
    for capture in captures:
        key = (capture.url, format_ts(capture.captured_at))
        if key in seen:
            duplicates += 1
            continue
        payload = capture.to_dict()
        payload["user_id"] = user_id
        store.append(user_id, EventKind.CAPTURE, payload)
        seen.add(key)
        appended += 1
    if profile_path:
        store.put_profile(user_id, load_profile(profile_path).to_dict())
    click.echo(json.dumps({"user_id": user_id, "appended": appended, "duplicates": duplicates}))


@cli.command()
@click.option("--user", "user_id", required=True)
def rebuild(user_id: str):
    """Rebuild the user's dataset from all stored captures."""
    from puda.model import Profile
    from puda.pipeline import PageProcessingError, build_dataset, process_page

    settings = from_env()
    store = Store(settings.data_dir)
    profile_data = store.get_profile(user_id)
    if profile_data is None:
        raise click.ClickException(f"user {user_id!r} has no stored profile; run ingest --profile first")
    backends = BackendSet.from_config(settings.backend_urls)
    taxonomy = load_settings_taxonomy(settings)
    records = []
    failures = []
    for capture in store.load_captures(user_id):
        try:
            records.append(process_page(capture, backends))
        except PageProcessingError as exc:
            failures.append({"url": exc.capture_ref.url, "error": str(exc.cause)})
    dataset = build_dataset(user_id, Profile.from_dict(profile_data), records, taxonomy, backends)
    store.put_dataset(user_id, dataset)
    store.append(
        user_id,
        EventKind.DATASET_BUILT,
        {"dataset_version": dataset.content_version(), "built_at": format_ts(dataset.built_at)},
    )
    click.echo(
        json.dumps(
            {
                "pages_processed": len(records),
                "pages_failed": len(failures),
                "failures": failures,
                "dataset_version": dataset.content_version(),
            }
        )
    )


def _split_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


@cli.command()
@click.option("--auth", "role", flag_value="auth", help="Serve only the authorization server.")
@click.option("--data", "role", flag_value="data", help="Serve only the dataset agent.")
@click.option("--all", "role", flag_value="all", default=True, help="Serve both (default).")
def serve(role: str):
    """Run the HTTP services on the configured listen addresses."""
    import uvicorn

    from puda.authserver import AuthConfig, AuthService, create_auth_app
    from puda.provision import ProvisionConfig, ProvisionService, create_provision_app
    from puda.tokens import generate_signing_key, load_or_create_key

    settings = from_env()
    store = Store(settings.data_dir)
    taxonomy = load_settings_taxonomy(settings)

    servers = []
    if role in ("auth", "all"):
        key = (
            load_or_create_key(settings.signing_key_file)
            if settings.signing_key_file
            else generate_signing_key()
        )
        auth_service = AuthService(
            AuthConfig(
                issuer=settings.issuer,
                users={settings.local_user: settings.local_password},
                signing_key=key,
                dashboard_origin=settings.dashboard_origin,
            ),
            store=store,
        )
        host, port = _split_addr(settings.issuer.split("//", 1)[-1])
        servers.append(uvicorn.Config(create_auth_app(auth_service), host=host, port=port))
        click.echo(f"authorization server on {settings.issuer}", err=True)

    if role in ("data", "all"):
        provision_service = ProvisionService(
            ProvisionConfig(
                data_dir=settings.data_dir,
                recorder_secret=settings.recorder_secret,
                auth_issuer=settings.auth_issuer,
                taxonomy=taxonomy,
                backends=BackendSet.from_config(settings.backend_urls),
                dashboard_origin=settings.dashboard_origin,
            ),
            store=store,
        )
        host, port = _split_addr(settings.listen_addr)
        servers.append(uvicorn.Config(create_provision_app(provision_service), host=host, port=port))
        click.echo(f"dataset agent on http://{settings.listen_addr}", err=True)

        if role == "all":
            data_url = f"http://{settings.listen_addr}"

            def bootstrap():
                import time

                from puda.harness import register_dataset_agent

                time.sleep(0.5)  # let both listeners come up
                try:
                    resource_id = register_dataset_agent(
                        settings.auth_issuer,
                        data_url,
                        (settings.local_user, settings.local_password),
                    )
                    provision_service.config.audience = resource_id
                    click.echo(f"dataset agent registered as {resource_id}", err=True)
                except Exception as exc:  # startup keeps serving; fetches fail until registered
                    click.echo(f"bootstrap registration failed: {exc}", err=True)

            threading.Thread(target=bootstrap, daemon=True).start()

    threads = [
        threading.Thread(target=uvicorn.Server(config).run, daemon=True) for config in servers
    ]
    for thread in threads:
        thread.start()
    try:
        for thread in threads:
            thread.join()
    except KeyboardInterrupt:
        pass


def _parse_scopes(raw: str) -> list[str]:
    scopes = [s.strip() for s in raw.split(",") if s.strip()]
    for scope in scopes:
        if not is_valid_scope(scope):
            raise click.UsageError(f"unknown scope {scope!r}; valid: {', '.join(DATA_SCOPES)}")
    return scopes


@cli.command("grant")
@click.option("--demo", is_flag=True, required=True, help="Scripted consent for local testing.")
@click.option("--scopes", default="puda:profile", show_default=True,
              help="Comma-separated scopes to approve.")
def grant_cmd(demo: bool, scopes: str):
    """Run a scripted consent flow and print the issued token."""
    from puda.harness import mock_agent_flow

    settings = from_env()
    result = mock_agent_flow(
        settings.auth_issuer,
        _parse_scopes(scopes),
        (settings.local_user, settings.local_password),
        data_url=f"http://{settings.listen_addr}",
        client_name="puda-grant-demo",
    )
    click.echo(
        json.dumps(
            {
                "access_token": result.token,
                "granted_scopes": list(result.granted_scopes),
                "transcript": result.transcript,
            },
            indent=2,
        )
    )


@cli.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--profile", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--queries", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
              help="Defaults to the --out extension.")
@click.option("--conditions", default=None,
              help="Comma-separated condition labels; default is all eleven.")
@click.option("--parallel", is_flag=True,
              help="Run conditions concurrently; byte/token columns only, latency reported as 0.")
def measure(corpus: str, profile: str, queries: str, out: str, fmt: str | None,
            conditions: str | None, parallel: bool):
    """Assemble every context condition and write the cost report."""
    from puda.harness import emit_report, load_queries, run_conditions
    from puda.model import GranularityCondition

    picked = None
    if conditions:
        picked = [GranularityCondition.from_label(label.strip()) for label in conditions.split(",")]
    report = run_conditions(corpus, profile, load_queries(queries), conditions=picked, parallel=parallel)
    fmt = fmt or ("csv" if out.endswith(".csv") else "json")
    emit_report(report, fmt, out)
    click.echo(json.dumps({"rows": len(report.rows), "out": str(Path(out)), "meta": report.meta}))


@cli.command("agent-demo")
@click.option("--scopes", required=True, help="Comma-separated scopes to request.")
def agent_demo(scopes: str):
    """Exercise the full external-agent path and print the transcript."""
    from puda.harness import mock_agent_flow

    settings = from_env()
    result = mock_agent_flow(
        settings.auth_issuer,
        _parse_scopes(scopes),
        (settings.local_user, settings.local_password),
        data_url=f"http://{settings.listen_addr}",
    )
    click.echo(
        json.dumps(
            {
                "granted_scopes": list(result.granted_scopes),
                "payload_bytes": {scope: len(body) for scope, body in result.payloads.items()},
                "transcript": result.transcript,
            },
            indent=2,
        )
    )


def main() -> int:
    try:
        cli.main(standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
