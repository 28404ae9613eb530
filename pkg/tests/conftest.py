import os
import random
import sys

import pytest
import yaml

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from utils import DEFAULT_CONFIG, _merge  # noqa: E402


@pytest.fixture(autouse=True)
def _no_cache_override(monkeypatch):
    monkeypatch.delenv("SHEAF_CACHE", raising=False)


@pytest.fixture
def cache_path(tmp_path):
    return str(tmp_path / "cache" / "invariants.jsonl")


@pytest.fixture
def config(cache_path):
    """Defaults with quiet logging, a small sample count and a temporary cache path"""
    return _merge(DEFAULT_CONFIG, {
        "logging": {"console": False, "file": ""},
        "sampling": {"samples": 3},
        "cache": {"enabled": False, "path": cache_path},
    })


@pytest.fixture
def config_file(tmp_path, config):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(config))
    return str(path)


@pytest.fixture
def rng():
    return random.Random(1234)
