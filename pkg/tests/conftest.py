import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from yablo.corpus import Registry


@pytest.fixture(scope="session")
def registry() -> Registry:
    return Registry()
