#!/usr/bin/env python3
"""Regenerate the golden fixtures pinned by the acceptance suite:

  fixtures/golden_dataset.json  stub-pipeline dataset for the fixture corpus
  fixtures/golden_report.json   deterministic cost columns per (condition, query)

Rerun after any intentional change to the corpus, lexicons, taxonomy, or stub
behavior, and review the diff. Run from the repo root:

    python scripts/gen_golden.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from puda.backends import BackendSet  # noqa: E402
from puda.config import packaged_taxonomy  # noqa: E402
from puda.harness import load_corpus, load_profile, load_queries, token_proxy  # noqa: E402
from puda.model import ALL_CONDITIONS  # noqa: E402
from puda.pipeline import build_context, build_dataset, process_page  # noqa: E402


def main() -> None:
    fixtures = ROOT / "fixtures"
    captures = load_corpus(fixtures / "corpus.jsonl")
    profile = load_profile(fixtures / "profile.json")
    queries = load_queries(fixtures / "queries.json")
    backends = BackendSet.stub()

    records = [process_page(c, backends) for c in captures]
    dataset = build_dataset(
        captures[0].user_id, profile, records, packaged_taxonomy(), backends
    )
    (fixtures / "golden_dataset.json").write_text(
        json.dumps(dataset.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    rows = []
    for condition in ALL_CONDITIONS:
        bundle = build_context(dataset, condition)
        payload_text = bundle.payload_bytes().decode("utf-8")
        for query in queries:
            rows.append(
                {
                    "condition": condition.label,
                    "query_id": query["query_id"],
                    "serialized_bytes": bundle.serialized_bytes,
                    "token_proxy_in": token_proxy(query["text"] + "\n" + payload_text),
                }
            )
    (fixtures / "golden_report.json").write_text(
        json.dumps(rows, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    print(f"dataset version {dataset.content_version()}; {len(rows)} golden report rows")


if __name__ == "__main__":
    main()
