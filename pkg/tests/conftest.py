import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gptnc.gpt import canonical_simplicial, catalog  # noqa: E402


@pytest.fixture(scope="session")
def rebit():
    return catalog("rebit")


@pytest.fixture(scope="session")
def gbit():
    return catalog("gbit")


@pytest.fixture(scope="session")
def simplex3():
    return canonical_simplicial(3)
