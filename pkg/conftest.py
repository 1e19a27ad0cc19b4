import os

import pytest

from config import settings

collect_ignore = ["examples"]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: длинные вероятностные прогоны (1000+ испытаний)")


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Каждый тест пишет кэш во временный каталог"""
    monkeypatch.setattr(settings, "CACHE_DB", str(tmp_path / "gci_cache.db"))
    yield


@pytest.fixture
def fixture_path():
    def resolve(name: str) -> str:
        return os.path.join(settings.FIXTURES_DIR, name)
    return resolve
