from __future__ import annotations

import time

import pytest

from puda.tokens import (
    AudienceMismatch,
    BadSignature,
    TokenExpired,
    generate_signing_key,
    jwk_from_public,
    keys_from_jwks,
    load_or_create_key,
    public_key_from_jwk,
    sign_token,
    verify_token,
)


@pytest.fixture(scope="module")
def key():
    return generate_signing_key()


def _claims(**overrides):
    now = int(time.time())
    claims = {
        "iss": "https://as.example",
        "sub": "user-1",
        "aud": "resource-1",
        "client_id": "client-1",
        "scopes": ["puda:profile"],
        "iat": now,
        "exp": now + 60,
        "jti": "abc123",
    }
    claims.update(overrides)
    return claims


class TestSignVerify:
    def test_round_trip(self, key):
        token = sign_token(_claims(), key, kid="k1")
        claims = verify_token(token, {"k1": key.public_key()}, audience="resource-1")
        assert claims["sub"] == "user-1"
        assert claims["scopes"] == ["puda:profile"]

    def test_flipped_byte_fails(self, key):
        token = sign_token(_claims(), key, kid="k1")
        tampered = token[:-3] + ("A" if token[-3] != "A" else "B") + token[-2:]
        with pytest.raises(BadSignature):
            verify_token(tampered, {"k1": key.public_key()}, audience="resource-1")

    def test_modified_claims_fail(self, key):
        token = sign_token(_claims(), key, kid="k1")
        header, claims, signature = token.split(".")
        from puda.tokens import b64url_decode, b64url_encode

        forged = b64url_decode(claims).replace(b"user-1", b"user-2")
        with pytest.raises(BadSignature):
            verify_token(
                f"{header}.{b64url_encode(forged)}.{signature}",
                {"k1": key.public_key()},
                audience="resource-1",
            )

    def test_expired(self, key):
        token = sign_token(_claims(exp=int(time.time()) - 1), key, kid="k1")
        with pytest.raises(TokenExpired):
            verify_token(token, {"k1": key.public_key()}, audience="resource-1")

    def test_wrong_audience(self, key):
        token = sign_token(_claims(), key, kid="k1")
        with pytest.raises(AudienceMismatch):
            verify_token(token, {"k1": key.public_key()}, audience="other-resource")

    def test_unknown_kid(self, key):
        token = sign_token(_claims(), key, kid="k1")
        with pytest.raises(BadSignature):
            verify_token(token, {"k2": key.public_key()}, audience="resource-1")

    def test_garbage_token(self, key):
        with pytest.raises(BadSignature):
            verify_token("not-a-token", {"k1": key.public_key()}, audience="resource-1")


class TestJwk:
    def test_round_trip(self, key):
        jwk = jwk_from_public(key.public_key(), kid="k1")
        assert jwk["kty"] == "OKP" and jwk["crv"] == "Ed25519"
        restored = public_key_from_jwk(jwk)
        token = sign_token(_claims(), key, kid="k1")
        assert verify_token(token, {"k1": restored}, audience="resource-1")

    def test_keys_from_jwks(self, key):
        jwks = {"keys": [jwk_from_public(key.public_key(), kid="k1")]}
        assert "k1" in keys_from_jwks(jwks)


class TestKeyFile:
    def test_created_then_reloaded(self, tmp_path):
        path = tmp_path / "keys" / "signing.pem"
        first = load_or_create_key(path)
        second = load_or_create_key(path)
        token = sign_token(_claims(), first, kid="k1")
        assert verify_token(token, {"k1": second.public_key()}, audience="resource-1")
