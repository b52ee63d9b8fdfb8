import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sodfeeder import Scenario, build_corridor  # noqa: E402


@pytest.fixture(scope="session")
def net():
    return build_corridor()


@pytest.fixture()
def scenario():
    return Scenario()
