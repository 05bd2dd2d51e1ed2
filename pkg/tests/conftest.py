"""Session fixtures for the test suite; generators live in support.py."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from support import FIXTURES, load_doc, load_rows  # noqa: E402


@pytest.fixture(scope="session")
def toy_doc():
    return load_doc("toy_forest.json")


@pytest.fixture(scope="session")
def toy_forest():
    from lire import load_forest

    return load_forest(FIXTURES / "toy_forest.json")


@pytest.fixture(scope="session")
def toy_data():
    return load_rows("toy_data.csv")


@pytest.fixture(scope="session")
def stump_forest():
    from lire import load_forest

    return load_forest(FIXTURES / "stump.json")


@pytest.fixture(scope="session")
def stump_data():
    return load_rows("stump.csv")


@pytest.fixture(scope="session")
def oblique_forest():
    from lire import load_forest

    return load_forest(FIXTURES / "oblique_toy.json")


@pytest.fixture(scope="session")
def oblique_data():
    return load_rows("oblique_data.csv")


@pytest.fixture(scope="session")
def regress_forest():
    from lire import load_forest

    return load_forest(FIXTURES / "regress_toy.json")


@pytest.fixture(scope="session")
def regress_data():
    return load_rows("regress_data.csv")


@pytest.fixture(scope="session")
def gap_forest():
    from lire import load_forest

    return load_forest(FIXTURES / "gap_forest.json")


@pytest.fixture(scope="session")
def gap_data():
    return load_rows("gap_data.csv")
