import pytest

from src.config import get_config
from src.models import catalog
from src.storage.service import StorageService


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    """Every test sees the default configuration unless it sets SPECTRASCOPE_* itself."""
    for name in ("CAP", "WORKERS", "CHUNK_SIZE", "TAU_POINTS", "LOG_LEVEL"):
        monkeypatch.delenv(f"SPECTRASCOPE_{name}", raising=False)
    get_config.cache_clear()
    yield
    get_config.cache_clear()


@pytest.fixture
def storage():
    return StorageService()


@pytest.fixture
def two_level():
    """{0.3 fair coin, 0.7 Bernoulli(0.1)}."""
    return catalog.two_level_mixture()


@pytest.fixture
def coin_or_zeros():
    return catalog.coin_or_zeros()
