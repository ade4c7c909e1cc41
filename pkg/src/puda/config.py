"""Environment-driven configuration and packaged default artifacts."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from puda.taxonomy import CategoryTaxonomy, load_taxonomy


@dataclass(frozen=True)
class Settings:
    data_dir: str
    issuer: str
    listen_addr: str
    signing_key_file: str | None
    recorder_secret: str
    auth_issuer: str
    dashboard_origin: str | None
    local_user: str
    local_password: str
    taxonomy_file: str | None
    backend_urls: dict[str, str]


def from_env(environ: dict[str, str] | None = None) -> Settings:
    env = os.environ if environ is None else environ
    issuer = env.get("PUDA_ISSUER", "http://127.0.0.1:7700")
    backend_urls = {}
    for task, var in (
        ("backend.summarize.url", "PUDA_BACKEND_SUMMARIZE_URL"),
        ("backend.keywords.url", "PUDA_BACKEND_KEYWORDS_URL"),
        ("backend.categorize.url", "PUDA_BACKEND_CATEGORIZE_URL"),
    ):
        if env.get(var):
            backend_urls[task] = env[var]
    return Settings(
        data_dir=env.get("PUDA_DATA_DIR", "./puda-data"),
        issuer=issuer,
        listen_addr=env.get("PUDA_LISTEN_ADDR", "127.0.0.1:7710"),
        signing_key_file=env.get("PUDA_SIGNING_KEY_FILE"),
        recorder_secret=env.get("PUDA_RECORDER_SECRET", "dev-recorder-secret"),
        auth_issuer=env.get("PUDA_AUTH_ISSUER", issuer),
        dashboard_origin=env.get("PUDA_DASHBOARD_ORIGIN"),
        local_user=env.get("PUDA_LOCAL_USER", "demo-user"),
        local_password=env.get("PUDA_LOCAL_PASSWORD", "demo-pass"),
        taxonomy_file=env.get("PUDA_TAXONOMY_FILE"),
        backend_urls=backend_urls,
    )


@lru_cache(maxsize=None)
def packaged_taxonomy() -> CategoryTaxonomy:
    """The taxonomy shipped with the package: 26 / 256 / 810 paths per tier."""
    text = resources.files("puda.data").joinpath("taxonomy.txt").read_text(encoding="utf-8")
    return load_taxonomy(text)


def load_settings_taxonomy(settings: Settings) -> CategoryTaxonomy:
    if settings.taxonomy_file:
        from puda.taxonomy import load_taxonomy_file

        return load_taxonomy_file(settings.taxonomy_file)
    return packaged_taxonomy()
