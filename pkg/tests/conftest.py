import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from phoneval.phoneset import collapse_table
from phoneval.toydata import toy_rules, toy_table


@pytest.fixture(scope="session")
def table():
    return collapse_table(toy_table())


@pytest.fixture(scope="session")
def rules():
    return toy_rules()
