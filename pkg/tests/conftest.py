import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

FIXTURES = HERE / "fixtures"
SUITE = sorted((FIXTURES / "suite").glob("*.json"))
LOGISTICS = sorted((FIXTURES / "logistics").glob("*.json"))
PRIVACY = FIXTURES / "privacy"
PDDL = FIXTURES / "pddl"


def suite_path(name: str) -> Path:
    return FIXTURES / "suite" / f"{name}.json"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
