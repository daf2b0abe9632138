import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
REPO_DIR = TESTS_DIR.parent

sys.path.insert(0, str(TESTS_DIR))  # makes `oracles` importable


@pytest.fixture(scope="session")
def scenarios_dir() -> Path:
    return REPO_DIR / "scenarios"
