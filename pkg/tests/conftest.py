from pathlib import Path

import pytest

from ptamerge.model import load_model

CORPUS = Path(__file__).resolve().parents[1] / "src" / "ptamerge" / "corpus"
FIXTURES = Path(__file__).resolve().parent / "fixtures"


def corpus_path(name: str) -> Path:
    return CORPUS / f"{name}.json"


@pytest.fixture(scope="session")
def loop():
    return load_model(corpus_path("spurious_loop"))


@pytest.fixture(scope="session")
def branches():
    return load_model(corpus_path("diverging_branches"))
