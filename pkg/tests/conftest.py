import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bxdatalog.putback import derive_get, load_strategy  # noqa: E402


@functools.lru_cache(maxsize=None)
def bundled_pair(name: str):
    return derive_get(load_strategy(f"bundled:{name}"))


@pytest.fixture
def union_bx():
    return bundled_pair("union")


@pytest.fixture
def provider_bx():
    return bundled_pair("rideshare_provider")


@pytest.fixture
def mediator_bx():
    return bundled_pair("rideshare_mediator")
