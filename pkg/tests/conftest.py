import sys
from pathlib import Path

import pytest

from fourview import parse_file

FIXTURES = Path(__file__).parent / "fixtures"
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def pabx():
    return parse_file(FIXTURES / "pabx.arch")


@pytest.fixture(scope="session")
def atc():
    return parse_file(FIXTURES / "atc.arch")


@pytest.fixture(scope="session")
def flight():
    return parse_file(FIXTURES / "flight.arch")
