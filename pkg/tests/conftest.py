from __future__ import annotations

import pytest

from puda.backends import BackendSet
from puda.config import packaged_taxonomy
from puda.harness import load_corpus, load_profile, load_queries
from puda.pipeline import build_dataset, process_page

FIXTURES = __import__("pathlib").Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def taxonomy():
    return packaged_taxonomy()


@pytest.fixture(scope="session")
def corpus_path():
    return FIXTURES / "corpus.jsonl"


@pytest.fixture(scope="session")
def profile_path():
    return FIXTURES / "profile.json"


@pytest.fixture(scope="session")
def queries_path():
    return FIXTURES / "queries.json"


@pytest.fixture(scope="session")
def captures(corpus_path):
    return load_corpus(corpus_path)


@pytest.fixture(scope="session")
def profile(profile_path):
    return load_profile(profile_path)


@pytest.fixture(scope="session")
def queries(queries_path):
    return load_queries(queries_path)


@pytest.fixture(scope="session")
def stub_records(captures):
    backends = BackendSet.stub()
    return [process_page(c, backends) for c in captures]


@pytest.fixture(scope="session")
def stub_dataset(captures, profile, stub_records, taxonomy):
    return build_dataset(
        captures[0].user_id, profile, stub_records, taxonomy, BackendSet.stub()
    )
