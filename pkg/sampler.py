import asyncio
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from random import Random
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import least_squares

from base_sampler import BaseSampler, SamplerConfig, TrialResult
from ci_core import CIModelSpec, CIStatement, InferenceFormula
from config import CoefficientDomain
from errors import DataFormatError
from logger import logger
from minors import GroundSet, parse_bracket_variable
from polynomial import MultiPolynomial


class FloatCovariance:
    """Симметрическая матрица float64 над множеством меток"""

    domain = CoefficientDomain.FLOAT

    def __init__(self, ground_set: GroundSet, matrix):
        matrix = np.asarray(matrix, dtype=float)
        n = ground_set.n
        if matrix.shape != (n, n):
            raise DataFormatError(f"Ожидалась матрица {n}x{n}, получено {matrix.shape}")
        self.ground_set = ground_set
        self.matrix = (matrix + matrix.T) / 2

    def entry(self, a: str, b: str) -> float:
        idx = self.ground_set.index
        return float(self.matrix[idx[a], idx[b]])

    def is_pd(self) -> bool:
        try:
            np.linalg.cholesky(self.matrix)
        except np.linalg.LinAlgError:
            return False
        return True

    def block(self, rows: Sequence[str], cols: Sequence[str]) -> np.ndarray:
        idx = self.ground_set.index
        return self.matrix[np.ix_([idx[r] for r in rows], [idx[c] for c in cols])]

    def tolist(self) -> List[List[float]]:
        return self.matrix.tolist()


def _ground(n_or_gs: Union[int, GroundSet]) -> GroundSet:
    if isinstance(n_or_gs, GroundSet):
        return n_or_gs
    if n_or_gs < 1:
        raise DataFormatError("Размер матрицы должен быть ≥ 1")
    return GroundSet([str(k) for k in range(1, n_or_gs + 1)])


def sample_pd(n: Union[int, GroundSet], config: SamplerConfig,
              rng: Optional[np.random.Generator] = None) -> FloatCovariance:
    """G·Gᵀ + δI со стандартной нормальной G"""
    gs = _ground(n)
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    G = rng.standard_normal((gs.n, gs.n))
    return FloatCovariance(gs, G @ G.T + config.delta * np.eye(gs.n))


def to_correlation(sigma: FloatCovariance) -> FloatCovariance:
    d = np.sqrt(np.diag(sigma.matrix))
    return FloatCovariance(sigma.ground_set, sigma.matrix / np.outer(d, d))


def _minor(matrix: np.ndarray, rows: List[int], cols: List[int]) -> float:
    if not rows:
        return 1.0
    return float(np.linalg.det(matrix[np.ix_(rows, cols)]))


def normalized_apm(sigma: FloatCovariance, s: CIStatement) -> float:
    """[ij|K] корреляционной матрицы: минор, делённый на √ произведения диагоналей строк и столбцов"""
    idx = sigma.ground_set.index
    d = np.sqrt(np.diag(sigma.matrix))
    corr = sigma.matrix / np.outer(d, d)
    K = [idx[k] for k in s.K]
    return _minor(corr, [idx[s.i]] + K, [idx[s.j]] + K)


# --- выборка на CI-многообразии ---------------------------------------------------------

@dataclass
class SampleReport:
    """Принятые точки, таблица невязок и диагностика бюджета"""
    spec: CIModelSpec
    samples: List[FloatCovariance] = field(default_factory=list)
    residuals: List[Dict[str, float]] = field(default_factory=list)
    trials: List[int] = field(default_factory=list)
    attempts: int = 0
    failures: Dict[str, int] = field(default_factory=dict)

    @property
    def exhausted(self) -> bool:
        return not self.samples

    def best(self) -> Optional[FloatCovariance]:
        """Точка с наименьшей максимальной невязкой независимостей"""
        if not self.samples:
            return None
        independences = {str(s) for s in self.spec.independences}

        def score(k: int) -> float:
            return max((abs(v) for name, v in self.residuals[k].items() if name in independences), default=0.0)

        return self.samples[min(range(len(self.samples)), key=score)]


class ModelSampler(BaseSampler):
    """Гаусс–Ньютон по фактору Холецкого: Σ = L·Lᵀ, диагональ L = exp(θ)"""

    def __init__(self, spec: CIModelSpec, config: SamplerConfig):
        super().__init__(config)
        self.spec = spec
        n = spec.ground_set.n
        self.rows, self.cols = np.tril_indices(n)
        self.diag = self.rows == self.cols

    def _factor(self, theta: np.ndarray) -> np.ndarray:
        n = self.spec.ground_set.n
        L = np.zeros((n, n))
        values = np.where(self.diag, np.exp(np.clip(theta, -30, 30)), theta)
        L[self.rows, self.cols] = values
        return L

    def _sigma(self, theta: np.ndarray) -> FloatCovariance:
        L = self._factor(theta)
        return FloatCovariance(self.spec.ground_set, L @ L.T)

    def _residuals(self, theta: np.ndarray) -> np.ndarray:
        sigma = self._sigma(theta)
        return np.array([normalized_apm(sigma, s) for s in self.spec.independences])

    def trial(self, index: int) -> TrialResult:
        rng = self.rng(index)
        start = sample_pd(self.spec.ground_set, self.config, rng)
        L = np.linalg.cholesky(start.matrix)
        theta = np.where(self.diag, np.log(L[self.rows, self.cols].clip(min=1e-300)), L[self.rows, self.cols])
        if self.spec.independences:
            fit = least_squares(self._residuals, theta, method="trf", max_nfev=self.config.max_iter,
                                ftol=1e-15, xtol=1e-15, gtol=1e-15)
            theta = fit.x
        sigma = self._sigma(theta)
        return self.check(index, sigma)

    def check(self, index: int, sigma: FloatCovariance) -> TrialResult:
        """Независимая перепроверка контракта невязок"""
        if not sigma.is_pd():
            return TrialResult(index, False, error="not-pd")
        residuals = {str(s): normalized_apm(sigma, s) for s in self.spec.independences + self.spec.dependences}
        if any(abs(residuals[str(s)]) > self.config.eps_eq for s in self.spec.independences):
            return TrialResult(index, False, residuals=residuals, error="not-converged")
        if any(abs(residuals[str(s)]) < self.config.eps_dep for s in self.spec.dependences):
            return TrialResult(index, False, residuals=residuals, error="dependence-vanished")
        return TrialResult(index, True, sigma.matrix, residuals)


async def sample_model_async(spec: CIModelSpec, config: SamplerConfig) -> SampleReport:
    sampler = ModelSampler(spec, config)
    results = await sampler.run(config.samples)
    report = SampleReport(spec, attempts=len(results), failures=sampler.failure_counts(results))
    for r in results:
        if r.success and len(report.samples) < config.samples:
            report.samples.append(FloatCovariance(spec.ground_set, r.sample))
            report.residuals.append(r.residuals)
            report.trials.append(r.trial)
    if report.exhausted:
        logger.warning(f"⚠️ Бюджет {config.budget} исчерпан без принятых точек")
    return report


def sample_model(spec: CIModelSpec, config: SamplerConfig) -> SampleReport:
    return asyncio.run(sample_model_async(spec, config))


async def search_counterexample_async(formula: InferenceFormula, config: SamplerConfig) -> SampleReport:
    """Численный поиск точки M(φ); находка даёт только численное свидетельство"""
    if set(formula.antecedents) & set(formula.consequents):
        logger.info(f"Формула {formula} тривиально верна, M(φ) пусто")
        return SampleReport(CIModelSpec(formula.ground_set, formula.antecedents))
    return await sample_model_async(CIModelSpec.from_formula(formula), replace(config, samples=1))


def search_counterexample(formula: InferenceFormula, config: SamplerConfig) -> Optional[FloatCovariance]:
    report = asyncio.run(search_counterexample_async(formula, config))
    return report.best()


def sample_weak_transitivity_variety(config: SamplerConfig, count: int = 20) -> List[Tuple[float, float]]:
    """Точки {σ_ij = 0, [ij|k] = 0}: пары (ρ_ik, ρ_jk), одна из координат ≈ 0"""
    gs = GroundSet.of("ijk")
    spec = CIModelSpec(gs, (CIStatement.of("i", "j", [], gs), CIStatement.of("i", "j", ["k"], gs)))
    report = sample_model(spec, replace(config, samples=count))
    points = []
    for sigma in report.samples:
        corr = to_correlation(sigma)
        points.append((corr.entry("i", "k"), corr.entry("j", "k")))
    return points


# --- скрининг кандидатов ------------------------------------------------------------------

@dataclass
class ScreeningStats:
    available: bool
    samples: int = 0
    max_residual: float = math.nan
    mean_residual: float = math.nan


def _bracket_values(f: MultiPolynomial, sigma: FloatCovariance) -> Dict[str, Tuple[float, float]]:
    """Значение скобки и её граница Адамара √(Π σ_rr · Π σ_cc)"""
    gs = sigma.ground_set
    idx = gs.index
    diag = np.diag(sigma.matrix)
    values = {}
    for name in f.variables():
        parsed = parse_bracket_variable(name, gs)
        if parsed[0] == "p":
            rows = cols = [idx[k] for k in parsed[1]]
        else:
            _, i, j, K = parsed
            K = [idx[k] for k in K]
            rows, cols = [idx[i]] + K, [idx[j]] + K
        bound = math.sqrt(float(np.prod(diag[rows]) * np.prod(diag[cols])))
        values[name] = (_minor(sigma.matrix, rows, cols), bound)
    return values


def scaled_residual(f: MultiPolynomial, sigma: FloatCovariance) -> float:
    """|f(Σ)| / Σ |c|·Π B(x)^e по границам Адамара B скобок; не зависит от масштаба переменных"""
    values = _bracket_values(f, sigma)
    total, scale = 0.0, 0.0
    for mono, coeff in f.terms.items():
        term, bound = float(coeff), abs(float(coeff))
        for var, exp in mono:
            value, magnitude = values[var]
            term *= value ** exp
            bound *= magnitude ** exp
        total += term
        scale += bound
    return abs(total) / scale if scale > 0 else 0.0


def screen_candidate(f: MultiPolynomial, spec: CIModelSpec, config: SamplerConfig) -> ScreeningStats:
    """Численная проверка, обращается ли скобочный многочлен в 0 на модели"""
    report = sample_model(spec, config)
    if report.exhausted:
        return ScreeningStats(available=False)
    residuals = [scaled_residual(f, sigma) for sigma in report.samples]
    return ScreeningStats(True, len(residuals), max(residuals), sum(residuals) / len(residuals))


# --- теорема Паппа ---------------------------------------------------------------------

# [ghi] и 17 условий невырожденности
PAPPUS_CONCLUSION = ("g", "h", "i")
PAPPUS_NONDEGENERACY = (
    ("a", "d", "i"), ("a", "b", "d"), ("a", "c", "i"), ("a", "d", "e"), ("a", "g", "i"),
    ("a", "d", "h"), ("a", "f", "i"), ("d", "e", "i"), ("a", "d", "f"), ("d", "h", "i"),
    ("a", "c", "d"), ("b", "d", "i"), ("a", "d", "g"), ("a", "b", "i"), ("d", "f", "i"),
    ("a", "e", "i"), ("c", "d", "i"),
)


@dataclass
class PappusConfiguration:
    """Девять точек в однородных координатах"""
    points: Dict[str, Tuple]

    def bracket(self, p: str, q: str, r: str):
        a, b, c = self.points[p], self.points[q], self.points[r]
        return (a[0] * (b[1] * c[2] - b[2] * c[1])
                - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]))

    def normalized_bracket(self, p: str, q: str, r: str) -> float:
        norms = [math.sqrt(sum(float(x) ** 2 for x in self.points[name])) for name in (p, q, r)]
        scale = norms[0] * norms[1] * norms[2]
        return abs(float(self.bracket(p, q, r))) / scale if scale > 0 else 0.0


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def pappus_configuration(a, b, c, d, e, f) -> PappusConfiguration:
    """g = ae ∩ bd, h = af ∩ cd, i = bf ∩ ce (соединение и пересечение через векторные произведения)"""
    g = _cross(_cross(a, e), _cross(b, d))
    h = _cross(_cross(a, f), _cross(c, d))
    i = _cross(_cross(b, f), _cross(c, e))
    return PappusConfiguration(dict(a=a, b=b, c=c, d=d, e=e, f=f, g=g, h=h, i=i))


def is_degenerate(config: PappusConfiguration, tol: float = 0.0) -> bool:
    if tol == 0.0:
        return any(config.bracket(*t) == 0 for t in PAPPUS_NONDEGENERACY)
    return any(config.normalized_bracket(*t) <= tol for t in PAPPUS_NONDEGENERACY)


@dataclass
class PappusStats:
    trials: int
    nondegenerate: int
    discarded: int
    max_normalized: float = 0.0
    violations: int = 0


def pappus_check(trials: int, rng: Optional[np.random.Generator] = None, degenerate_tol: float = 1e-6) -> PappusStats:
    """Численная проверка: [ghi] ≈ 0 на невырожденных конфигурациях"""
    if trials < 1:
        raise DataFormatError("Число испытаний должно быть ≥ 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    stats = PappusStats(trials, 0, 0)
    for _ in range(trials):
        a, b, d, e = (tuple(rng.standard_normal(3)) for _ in range(4))
        lam, mu = rng.standard_normal(2), rng.standard_normal(2)
        c = tuple(lam[0] * x + lam[1] * y for x, y in zip(a, b))
        f = tuple(mu[0] * x + mu[1] * y for x, y in zip(d, e))
        config = pappus_configuration(a, b, c, d, e, f)
        if is_degenerate(config, degenerate_tol):
            stats.discarded += 1
            continue
        stats.nondegenerate += 1
        stats.max_normalized = max(stats.max_normalized, config.normalized_bracket(*PAPPUS_CONCLUSION))
    logger.info(f"Папп: {stats.nondegenerate} конфигураций, max |[ghi]| = {stats.max_normalized:.3e}")
    return stats


def pappus_check_exact(trials: int, seed: int = 0, bound: int = 20) -> PappusStats:
    """То же в точной арифметике Fraction: [ghi] = 0 ровно"""
    if trials < 1:
        raise DataFormatError("Число испытаний должно быть ≥ 1")
    rnd = Random(seed)

    def point():
        return tuple(Fraction(rnd.randint(-bound, bound)) for _ in range(3))

    stats = PappusStats(trials, 0, 0)
    for _ in range(trials):
        a, b, d, e = point(), point(), point(), point()
        lam = [Fraction(rnd.randint(-bound, bound), rnd.randint(1, bound)) for _ in range(4)]
        c = tuple(lam[0] * x + lam[1] * y for x, y in zip(a, b))
        f = tuple(lam[2] * x + lam[3] * y for x, y in zip(d, e))
        config = pappus_configuration(a, b, c, d, e, f)
        if is_degenerate(config):
            stats.discarded += 1
            continue
        stats.nondegenerate += 1
        if config.bracket(*PAPPUS_CONCLUSION) != 0:
            stats.violations += 1
    return stats
