import json
from importlib import resources
from pathlib import Path

import pytest

from chpuc.io import load_reference_system

DATA = Path(__file__).parent / "data"
DATA_PKG = Path(str(resources.files("chpuc.data")))


@pytest.fixture(scope="session")
def reference_system():
    return load_reference_system()


@pytest.fixture(scope="session")
def oracle_corpus():
    return json.loads((DATA / "oracle_corpus.json").read_text())
