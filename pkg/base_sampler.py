import asyncio
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config import settings
from errors import UsageError
from logger import logger


@dataclass(frozen=True)
class SamplerConfig:
    """Параметры сэмплера"""
    seed: int = 20240101
    eps_eq: float = 1e-10
    eps_dep: float = 1e-4
    max_iter: int = 200
    budget: int = 10000
    workers: int = 4
    samples: int = 10
    delta: float = 1e-3

    def __post_init__(self):
        if not 0 < self.eps_eq < self.eps_dep:
            raise UsageError(f"Нужно 0 < eps_eq < eps_dep, получено {self.eps_eq}, {self.eps_dep}")
        if self.budget < 1 or self.max_iter < 1 or self.samples < 1 or self.workers < 1:
            raise UsageError("Бюджеты и число потоков должны быть положительными")

    @classmethod
    def from_settings(cls, **overrides) -> "SamplerConfig":
        values = dict(seed=settings.SEED, eps_eq=settings.EPS_EQ, eps_dep=settings.EPS_DEP,
                      max_iter=settings.MAX_ITER, budget=settings.BUDGET, workers=settings.WORKERS,
                      delta=settings.PD_JITTER)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class TrialResult:
    """Результат одной попытки"""
    trial: int
    success: bool
    sample: Optional[np.ndarray] = None
    residuals: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None


class BaseSampler:
    """Базовый класс: независимые попытки с собственными генераторами"""

    def __init__(self, config: SamplerConfig):
        self.name = self.__class__.__name__
        self.config = config
        self.semaphore = asyncio.Semaphore(config.workers)

    def rng(self, trial: int) -> np.random.Generator:
        """Генератор попытки зависит только от (seed, номер попытки)"""
        return np.random.default_rng([self.config.seed, trial])

    def trial(self, index: int) -> TrialResult:
        """Одна попытка (абстрактный метод)"""
        raise NotImplementedError

    async def run_trial(self, index: int) -> TrialResult:
        async with self.semaphore:
            loop = asyncio.get_running_loop()
            try:
                return await loop.run_in_executor(None, self.trial, index)
            except (np.linalg.LinAlgError, FloatingPointError, ValueError) as e:
                logger.debug(f"{self.name}: попытка {index} не удалась: {e}")
                return TrialResult(index, False, error=type(e).__name__)

    async def run(self, wanted: Optional[int] = None) -> List[TrialResult]:
        """Пачки попыток до `wanted` успехов или исчерпания бюджета; порядок по номеру попытки"""
        wanted = wanted or self.config.samples
        batch = self.config.workers * 8
        results: List[TrialResult] = []
        accepted = 0
        start = 0
        while start < self.config.budget and accepted < wanted:
            stop = min(start + batch, self.config.budget)
            chunk = await asyncio.gather(*(self.run_trial(t) for t in range(start, stop)))
            chunk = sorted(chunk, key=lambda r: r.trial)
            results.extend(chunk)
            accepted += sum(1 for r in chunk if r.success)
            start = stop
        logger.info(f"{self.name}: {accepted} успешных из {len(results)} попыток")
        return results

    def failure_counts(self, results: List[TrialResult]) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for r in results:
            if not r.success:
                key = r.error or "rejected"
                counts[key] = counts.get(key, 0) + 1
        return dict(sorted(counts.items()))
