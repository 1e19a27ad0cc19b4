import os
from enum import Enum
from dotenv import load_dotenv

load_dotenv()


class CoefficientDomain(str, Enum):
    """Области коэффициентов матриц"""
    SYMBOLIC = "symbolic"
    RATIONAL = "rational"
    FIELD = "field"
    FLOAT = "float"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, "")
    if not raw.strip():
        return default
    try:
        return int(raw.strip())
    except (ValueError, TypeError):
        _BAD_ENV.append(name)
        return default


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name, "")
    if not raw.strip():
        return default
    try:
        return float(raw.strip())
    except (ValueError, TypeError):
        _BAD_ENV.append(name)
        return default


# Переменные окружения, которые не удалось разобрать (логируются в main)
_BAD_ENV = []


class Settings:
    """Настройки приложения"""

    # Бюджеты
    BUDGET = _env_int("GCI_BUDGET", 10000)
    GROEBNER_MAX_BASIS = _env_int("GCI_GROEBNER_MAX_BASIS", 64)
    GROEBNER_MAX_PAIRS = _env_int("GCI_GROEBNER_MAX_PAIRS", 5000)
    PROOF_DEPTH = _env_int("GCI_PROOF_DEPTH", 128)

    # Сэмплер
    SEED = _env_int("GCI_SEED", 20240101)
    EPS_EQ = _env_float("GCI_EPS_EQ", 1e-10)
    EPS_DEP = _env_float("GCI_EPS_DEP", 1e-4)
    MAX_ITER = _env_int("GCI_MAX_ITER", 200)
    WORKERS = _env_int("GCI_WORKERS", 4)
    PD_JITTER = 1e-3  # δ в G·Gᵀ + δI

    # Кэш
    CACHE_DB = os.getenv("GCI_CACHE_DB", "gci_cache.db")

    # Логи
    LOG_LEVEL = os.getenv("GCI_LOG_LEVEL", "WARNING").upper()
    LOG_FILE = os.getenv("GCI_LOG_FILE", "")

    # Пути
    FIXTURES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")

    @property
    def bad_env(self):
        return list(_BAD_ENV)


settings = Settings()
