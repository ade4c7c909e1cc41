from __future__ import annotations

import json

import httpx
import pytest

from puda.harness import mock_agent_flow, spawn_stack
from puda.model import canonical_json_bytes
from puda.pipeline import filter_keywords

POLL_S = 0.3


@pytest.fixture(scope="module")
def stack(tmp_path_factory, taxonomy, captures, profile):
    stack = spawn_stack(
        tmp_path_factory.mktemp("stack-data"),
        taxonomy=taxonomy,
        poll_interval_s=POLL_S,
        credentials=("persona-001", "secret-pass"),
    )
    headers = {"Authorization": f"Bearer {stack.recorder_secret}"}
    with httpx.Client(timeout=30.0) as client:
        client.put(
            f"{stack.data_url}/users/persona-001/profile", json=profile.to_dict(), headers=headers
        ).raise_for_status()
        for capture in captures:
            client.post(
                f"{stack.data_url}/ingest/page", json=capture.to_dict(), headers=headers
            ).raise_for_status()
        client.post(f"{stack.data_url}/rebuild/persona-001", headers=headers).raise_for_status()
    yield stack
    stack.stop()


@pytest.fixture(scope="module")
def recorder_headers(stack):
    return {"Authorization": f"Bearer {stack.recorder_secret}"}


def flow(stack, scopes):
    return mock_agent_flow(stack.issuer, scopes, stack.credentials, stack.data_url)


class TestIngest:
    def test_valid_capture_returns_offset(self, stack, recorder_headers, captures):
        body = captures[0].to_dict()
        body["url"] = "https://example.net/fresh-page"
        response = httpx.post(
            f"{stack.data_url}/ingest/page", json=body, headers=recorder_headers
        )
        assert response.status_code == 200
        assert "offset" in response.json()

    def test_duplicate_returns_original_offset(self, stack, recorder_headers, captures):
        body = captures[0].to_dict()
        body["url"] = "https://example.net/dup-page"
        first = httpx.post(f"{stack.data_url}/ingest/page", json=body, headers=recorder_headers)
        second = httpx.post(f"{stack.data_url}/ingest/page", json=body, headers=recorder_headers)
        assert second.json() == {"offset": first.json()["offset"], "duplicate": True}

    def test_missing_field_names_it(self, stack, recorder_headers, captures):
        body = captures[0].to_dict()
        del body["html_body"]
        response = httpx.post(f"{stack.data_url}/ingest/page", json=body, headers=recorder_headers)
        assert response.status_code == 400
        assert response.json()["error"] == "invalid_capture"
        assert response.json()["field"] == "html_body"

    def test_wrong_recorder_secret(self, stack, captures):
        response = httpx.post(
            f"{stack.data_url}/ingest/page",
            json=captures[0].to_dict(),
            headers={"Authorization": "Bearer wrong"},
        )
        assert response.status_code == 401

    def test_full_storage_is_507(self, stack, recorder_headers, captures, monkeypatch):
        from puda.store import StorageFull

        def refuse(*_args, **_kwargs):
            raise StorageFull("no space left on device")

        monkeypatch.setattr(stack.provision_service.store, "append", refuse)
        body = captures[0].to_dict()
        body["url"] = "https://example.net/storage-full-probe"
        response = httpx.post(f"{stack.data_url}/ingest/page", json=body, headers=recorder_headers)
        assert response.status_code == 507
        assert response.json()["error"] == "storage_full"


class TestRebuild:
    def test_requires_recorder_secret(self, stack):
        assert httpx.post(f"{stack.data_url}/rebuild/persona-001").status_code == 401

    def test_second_concurrent_rebuild_conflicts(self, stack, recorder_headers):
        service = stack.provision_service
        with service._lock:
            service._rebuilding.add("persona-001")
        try:
            response = httpx.post(
                f"{stack.data_url}/rebuild/persona-001", headers=recorder_headers
            )
            assert response.status_code == 409
            assert response.json()["error"] == "rebuild_in_progress"
        finally:
            with service._lock:
                service._rebuilding.discard("persona-001")

    def test_rebuild_without_profile_conflicts(self, stack, recorder_headers):
        response = httpx.post(f"{stack.data_url}/rebuild/ghost-user", headers=recorder_headers)
        assert response.status_code == 409
        assert response.json()["error"] == "no_profile"

    def test_zero_captures_builds_empty_dataset(self, stack, recorder_headers, profile):
        httpx.put(
            f"{stack.data_url}/users/empty-user/profile",
            json=profile.to_dict(),
            headers=recorder_headers,
        ).raise_for_status()
        response = httpx.post(f"{stack.data_url}/rebuild/empty-user", headers=recorder_headers)
        assert response.status_code == 200
        report = response.json()
        assert report["pages_processed"] == 0 and report["pages_failed"] == 0
        dataset = stack.store.get_dataset("empty-user")
        assert dataset.history_long == () and dataset.keywords == ()
        assert dataset.profile == profile


class TestGetData:
    def test_categories_tier3_with_matching_scope(self, stack):
        result = flow(stack, ["puda:profile", "puda:categories:3"])
        payload = json.loads(result.payloads["puda:categories:3"])
        dataset = stack.store.get_dataset("persona-001")
        assert payload == [p.canonical for p in dataset.categories[3]]

    def test_scope_mismatch_is_403(self, stack):
        result = flow(stack, ["puda:profile", "puda:categories:3"])
        response = httpx.get(
            f"{stack.data_url}/data/history/long",
            headers={"Authorization": f"Bearer {result.token}"},
        )
        assert response.status_code == 403
        body = response.json()
        assert body["error"] == "insufficient_scope"
        assert body["required_scope"] == "puda:history:long"

    def test_keyword_scopes_are_exact_not_hierarchical(self, stack):
        result = flow(stack, ["puda:profile", "puda:keywords:085"])
        response = httpx.get(
            f"{stack.data_url}/data/keywords/090",
            headers={"Authorization": f"Bearer {result.token}"},
        )
        assert response.status_code == 403

    def test_keywords_payload_applies_threshold(self, stack):
        result = flow(stack, ["puda:profile", "puda:keywords:085"])
        dataset = stack.store.get_dataset("persona-001")
        expected = canonical_json_bytes(
            [k.to_dict() for k in filter_keywords(dataset.keywords, 0.85)]
        )
        assert result.payloads["puda:keywords:085"] == expected
        assert all(k["score"] >= 0.85 for k in json.loads(result.payloads["puda:keywords:085"]))

    def test_missing_token_is_401(self, stack):
        assert httpx.get(f"{stack.data_url}/data/profile").status_code == 401

    def test_garbage_token_is_401(self, stack):
        response = httpx.get(
            f"{stack.data_url}/data/profile", headers={"Authorization": "Bearer junk.junk.junk"}
        )
        assert response.status_code == 401

    def test_unknown_variants_are_404(self, stack):
        result = flow(stack, ["puda:profile"])
        headers = {"Authorization": f"Bearer {result.token}"}
        for path in ("/data/categories/4", "/data/keywords/095", "/data/history/medium"):
            assert httpx.get(f"{stack.data_url}{path}", headers=headers).status_code == 404

    def test_responses_byte_identical_across_gets(self, stack):
        result = flow(stack, ["puda:profile", "puda:history:long"])
        headers = {"Authorization": f"Bearer {result.token}"}
        first = httpx.get(f"{stack.data_url}/data/history/long", headers=headers)
        second = httpx.get(f"{stack.data_url}/data/history/long", headers=headers)
        assert first.content == second.content

    def test_no_dataset_built_is_404(self, tmp_path, taxonomy, profile):
        from puda.harness import FlowError

        bare = spawn_stack(
            tmp_path / "bare", taxonomy=taxonomy, poll_interval_s=POLL_S,
            credentials=("persona-001", "pw"),
        )
        try:
            with pytest.raises(FlowError) as exc:
                mock_agent_flow(bare.issuer, ["puda:profile"], bare.credentials, bare.data_url)
            assert exc.value.step == "fetch:puda:profile"
            assert "404" in exc.value.detail
        finally:
            bare.stop()


class TestCapabilityCard:
    def test_lists_ten_endpoints(self, stack):
        card = httpx.get(f"{stack.data_url}/.well-known/puda-agent").json()
        assert len(card["provision_endpoints"]) == 10

    def test_authorization_server_matches_issuer(self, stack):
        card = httpx.get(f"{stack.data_url}/.well-known/puda-agent").json()
        assert card["authorization_server"] == stack.issuer

    def test_public_regardless_of_token(self, stack):
        anonymous = httpx.get(f"{stack.data_url}/.well-known/puda-agent")
        with_token = httpx.get(
            f"{stack.data_url}/.well-known/puda-agent",
            headers={"Authorization": "Bearer anything"},
        )
        assert anonymous.content == with_token.content

    def test_advertised_scopes_in_as_discovery(self, stack):
        card = httpx.get(f"{stack.data_url}/.well-known/puda-agent").json()
        discovery = httpx.get(f"{stack.issuer}/.well-known/openid-configuration").json()
        assert set(card["provision_endpoints"]) <= set(discovery["scopes_supported"])


class TestRevocationPropagation:
    def test_fetch_fails_within_one_poll_interval(self, stack):
        import time

        result = flow(stack, ["puda:profile"])
        headers = {"Authorization": f"Bearer {result.token}"}
        assert httpx.get(f"{stack.data_url}/data/profile", headers=headers).status_code == 200

        with httpx.Client() as client:
            session = client.post(
                f"{stack.issuer}/session",
                json={"username": stack.credentials[0], "password": stack.credentials[1]},
            ).json()["session_token"]
            grants = client.get(
                f"{stack.issuer}/grants", headers={"Authorization": f"Bearer {session}"}
            ).json()["grants"]
            target = [g for g in grants if g["status"] == "active"][-1]
            client.post(
                f"{stack.issuer}/grants/{target['grant_id']}/revoke",
                headers={"Authorization": f"Bearer {session}"},
            ).raise_for_status()

        time.sleep(POLL_S + 0.2)
        response = httpx.get(f"{stack.data_url}/data/profile", headers=headers)
        assert response.status_code == 401
        assert response.json()["error"] == "token_revoked"
