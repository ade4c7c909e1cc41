"""Compact signed bearer tokens (JWS-style, Ed25519) plus JWK publishing.

Tokens are verifiable by any party holding only the published public key, so
the resource server never needs a shared database with the authorization
server.
"""

from __future__ import annotations

import base64
import json
import time
from pathlib import Path

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    NoEncryption,
    PrivateFormat,
    PublicFormat,
)

from puda.model import canonical_json


class TokenError(Exception):
    pass


class BadSignature(TokenError):
    pass


class TokenExpired(TokenError):
    pass


class AudienceMismatch(TokenError):
    pass


def b64url_encode(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).decode("ascii").rstrip("=")


def b64url_decode(text: str) -> bytes:
    padding = "=" * (-len(text) % 4)
    return base64.urlsafe_b64decode(text + padding)


def sign_token(claims: dict, key: Ed25519PrivateKey, kid: str) -> str:
    header = {"alg": "EdDSA", "typ": "JWT", "kid": kid}
    signing_input = (
        b64url_encode(canonical_json(header).encode("utf-8"))
        + "."
        + b64url_encode(canonical_json(claims).encode("utf-8"))
    )
    signature = key.sign(signing_input.encode("ascii"))
    return signing_input + "." + b64url_encode(signature)


def decode_claims_unverified(token: str) -> tuple[dict, dict]:
    """Header and claims without signature verification; format errors raise
    BadSignature since an unparseable token can never verify."""
    parts = token.split(".")
    if len(parts) != 3:
        raise BadSignature("token must have three dot-separated parts")
    try:
        header = json.loads(b64url_decode(parts[0]))
        claims = json.loads(b64url_decode(parts[1]))
    except (ValueError, TypeError) as exc:
        raise BadSignature(f"undecodable token part: {exc}") from exc
    if not isinstance(header, dict) or not isinstance(claims, dict):
        raise BadSignature("token parts must be JSON objects")
    return header, claims


def verify_token(
    token: str,
    keys: dict[str, Ed25519PublicKey],
    audience: str,
    now: float | None = None,
) -> dict:
    """Check signature, expiry, and audience; returns the claims.

    Grant liveness is a service-level concern layered on top by the caller.
    """
    header, claims = decode_claims_unverified(token)
    key = keys.get(header.get("kid", ""))
    if key is None:
        raise BadSignature(f"unknown signing key {header.get('kid')!r}")
    signing_input, _, signature_b64 = token.rpartition(".")
    try:
        key.verify(b64url_decode(signature_b64), signing_input.encode("ascii"))
    except (InvalidSignature, ValueError) as exc:
        raise BadSignature("signature verification failed") from exc
    now = time.time() if now is None else now
    if not isinstance(claims.get("exp"), (int, float)) or now >= claims["exp"]:
        raise TokenExpired(f"token expired at {claims.get('exp')!r}")
    if claims.get("aud") != audience:
        raise AudienceMismatch(f"token audience {claims.get('aud')!r} != {audience!r}")
    return claims


# --- key management ------------------------------------------------------------

def generate_signing_key() -> Ed25519PrivateKey:
    return Ed25519PrivateKey.generate()


def load_or_create_key(path: str | Path) -> Ed25519PrivateKey:
    """Load a PEM signing key, creating one on first use."""
    path = Path(path)
    if path.exists():
        from cryptography.hazmat.primitives.serialization import load_pem_private_key

        key = load_pem_private_key(path.read_bytes(), password=None)
        if not isinstance(key, Ed25519PrivateKey):
            raise TokenError(f"{path} is not an Ed25519 private key")
        return key
    key = generate_signing_key()
    path.parent.mkdir(parents=True, exist_ok=True)
    pem = key.private_bytes(Encoding.PEM, PrivateFormat.PKCS8, NoEncryption())
    path.write_bytes(pem)
    path.chmod(0o600)
    return key


def jwk_from_public(key: Ed25519PublicKey, kid: str) -> dict:
    raw = key.public_bytes(Encoding.Raw, PublicFormat.Raw)
    return {"kty": "OKP", "crv": "Ed25519", "x": b64url_encode(raw), "kid": kid,
            "use": "sig", "alg": "EdDSA"}


def public_key_from_jwk(jwk: dict) -> Ed25519PublicKey:
    if jwk.get("kty") != "OKP" or jwk.get("crv") != "Ed25519" or "x" not in jwk:
        raise TokenError(f"unsupported JWK: {jwk!r}")
    return Ed25519PublicKey.from_public_bytes(b64url_decode(jwk["x"]))


def keys_from_jwks(jwks: dict) -> dict[str, Ed25519PublicKey]:
    keys: dict[str, Ed25519PublicKey] = {}
    for jwk in jwks.get("keys", []):
        if "kid" in jwk:
            keys[jwk["kid"]] = public_key_from_jwk(jwk)
    return keys
