import asyncio
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple

from ci_core import CIModelSpec, CIStatement, InferenceFormula
from errors import CertificateIndexError, DataFormatError
from groebner import GroebnerBudget, ideal_membership
from logger import logger
from minors import GroundSet, almost_principal_minor, principal_minor, symbolic_covariance
from polynomial import MultiPolynomial, to_rat

VALID_PROOF = "valid-proof"
INVALID = "invalid"


@dataclass(frozen=True)
class SemialgebraicSystem:
    """{f = 0, g ≥ 0, h ≠ 0} в переменных σ"""
    f: Tuple[MultiPolynomial, ...] = ()
    g: Tuple[MultiPolynomial, ...] = ()
    h: Tuple[MultiPolynomial, ...] = ()
    f_labels: Tuple[str, ...] = ()
    g_labels: Tuple[str, ...] = ()
    h_labels: Tuple[str, ...] = ()

    def same_constraints(self, other: "SemialgebraicSystem") -> bool:
        return self.f == other.f and self.g == other.g and self.h == other.h

    def index_of(self, part: str, label: str) -> int:
        labels = getattr(self, f"{part}_labels")
        try:
            return labels.index(label)
        except ValueError:
            raise CertificateIndexError(f"В списке {part} нет {label}")


def _principal_label(K: Sequence[str]) -> str:
    return f"[{''.join(K)}]"


def compile_model(spec: CIModelSpec, pd_nonvanishing: bool = False) -> SemialgebraicSystem:
    """Независимости → f, зависимости → h, все главные миноры → g (и в h по флагу)"""
    gs = spec.ground_set
    sigma = symbolic_covariance(gs)
    principal = gs.subsets(min_size=1)
    g = tuple(principal_minor(K, sigma) for K in principal)
    g_labels = tuple(_principal_label(K) for K in principal)
    f = tuple(almost_principal_minor(s.i, s.j, s.K, sigma) for s in spec.independences)
    h = tuple(almost_principal_minor(s.i, s.j, s.K, sigma) for s in spec.dependences)
    h_labels = tuple(str(s) for s in spec.dependences)
    if pd_nonvanishing:
        h, h_labels = h + g, h_labels + g_labels
    return SemialgebraicSystem(
        f=f, g=g, h=h,
        f_labels=tuple(str(s) for s in spec.independences),
        g_labels=g_labels,
        h_labels=h_labels,
    )


@dataclass(frozen=True)
class IdealTerm:
    cofactor: MultiPolynomial
    index: int


@dataclass(frozen=True)
class ConeTerm:
    """weight · square² · Π g_j"""
    weight: Fraction
    square: MultiPolynomial
    g_indices: Tuple[int, ...] = ()


@dataclass
class FinalPolynomialCertificate:
    """f ∈ I ∩ (P + U²): одновременно ноль и положителен на любой точке системы"""
    system: SemialgebraicSystem
    target: MultiPolynomial
    ideal_part: List[IdealTerm] = field(default_factory=list)
    cone_part: List[ConeTerm] = field(default_factory=list)
    monoid_part: List[int] = field(default_factory=list)
    name: str = ""


@dataclass
class CertificateCheck:
    """Результат проверки сертификата"""
    verdict: str
    failed: Optional[str] = None
    detail: Optional[str] = None

    @property
    def valid(self) -> bool:
        return self.verdict == VALID_PROOF


def _check_index(index: int, size: int, part: str) -> None:
    if not isinstance(index, int) or not 0 <= index < size:
        raise CertificateIndexError(f"Индекс {index} вне списка {part} (размер {size})")


def ideal_sum(cert: FinalPolynomialCertificate, system: Optional[SemialgebraicSystem] = None) -> MultiPolynomial:
    system = system or cert.system
    total = MultiPolynomial.zero()
    for term in cert.ideal_part:
        _check_index(term.index, len(system.f), "f")
        total = total + term.cofactor * system.f[term.index]
    return total


def monoid_element(cert: FinalPolynomialCertificate, system: Optional[SemialgebraicSystem] = None) -> MultiPolynomial:
    """u = Π h_k по мультимножеству индексов"""
    system = system or cert.system
    u = MultiPolynomial.one()
    for index in cert.monoid_part:
        _check_index(index, len(system.h), "h")
        u = u * system.h[index]
    return u


def positivity_sum(cert: FinalPolynomialCertificate, system: Optional[SemialgebraicSystem] = None) -> MultiPolynomial:
    system = system or cert.system
    total = MultiPolynomial.zero()
    for term in cert.cone_part:
        if to_rat(term.weight) <= 0:
            raise DataFormatError(f"Вес {term.weight} не положителен")
        product = term.square * term.square
        for index in term.g_indices:
            _check_index(index, len(system.g), "g")
            product = product * system.g[index]
        total = total + product.scale(to_rat(term.weight))
    u = monoid_element(cert, system)
    return total + u * u


def verify_ideal_part(cert: FinalPolynomialCertificate, system: Optional[SemialgebraicSystem] = None) -> bool:
    """f = Σ h_i f_i после полного раскрытия"""
    return (cert.target - ideal_sum(cert, system)).is_zero()


def verify_positivity_part(cert: FinalPolynomialCertificate, system: Optional[SemialgebraicSystem] = None) -> bool:
    """f = Σ w·s²·Π g_j + u²"""
    return (cert.target - positivity_sum(cert, system)).is_zero()


def verify_final_polynomial(cert: FinalPolynomialCertificate,
                            system: Optional[SemialgebraicSystem] = None) -> CertificateCheck:
    if system is not None and not system.same_constraints(cert.system):
        return CertificateCheck(INVALID, "system", "сертификат выписан для другой системы")
    system = system or cert.system
    try:
        if not verify_ideal_part(cert, system):
            return CertificateCheck(INVALID, "ideal", "f ≠ Σ h_i·f_i")
        if not verify_positivity_part(cert, system):
            return CertificateCheck(INVALID, "positivity", "f ≠ Σ w·s²·Π g + u²")
    except DataFormatError as e:
        return CertificateCheck(INVALID, "structure", str(e))
    return CertificateCheck(VALID_PROOF)


# --- встроенные сертификаты ---------------------------------------------------------

def _weak_transitivity_spec(gs: GroundSet, i: str, j: str, k: str, L: Sequence[str]) -> CIModelSpec:
    return CIModelSpec(
        gs,
        (CIStatement.of(i, j, L, gs), CIStatement.of(i, j, [k, *L], gs)),
        (CIStatement.of(i, k, L, gs), CIStatement.of(j, k, L, gs)),
    )


def weak_transitivity_certificate(ground_set: GroundSet, i: str, j: str, k: str, L: Sequence[str] = (),
                                  spec: Optional[CIModelSpec] = None) -> FinalPolynomialCertificate:
    """Тождество Матуша: u² = u·[kL]·[ij|L] − u·[L]·[ij|kL], u = [ik|L]·[jk|L]"""
    gs = ground_set
    L = list(L)
    spec = spec or _weak_transitivity_spec(gs, i, j, k, L)
    system = compile_model(spec)
    sigma = symbolic_covariance(gs)
    u = almost_principal_minor(i, k, L, sigma) * almost_principal_minor(j, k, L, sigma)
    return FinalPolynomialCertificate(
        system=system,
        target=u * u,
        ideal_part=[
            IdealTerm(u * principal_minor([k, *L], sigma), system.index_of("f", str(CIStatement.of(i, j, L, gs)))),
            IdealTerm(-u * principal_minor(L, sigma), system.index_of("f", str(CIStatement.of(i, j, [k, *L], gs)))),
        ],
        monoid_part=[system.index_of("h", str(CIStatement.of(i, k, L, gs))),
                     system.index_of("h", str(CIStatement.of(j, k, L, gs)))],
        name=f"weak-transitivity({i},{j},{k},{''.join(gs.canonical(L)) or '∅'})",
    )


def _lm20_spec(gs: GroundSet, i: str, j: str, k: str, l: str) -> CIModelSpec:
    return CIModelSpec(
        gs,
        (CIStatement.of(i, j, [k], gs), CIStatement.of(i, k, [l], gs), CIStatement.of(i, l, [j], gs)),
        (CIStatement.of(i, j, [], gs),),
    )


def lm20_certificate(ground_set: Optional[GroundSet] = None, labels: Optional[Sequence[str]] = None,
                     spec: Optional[CIModelSpec] = None) -> FinalPolynomialCertificate:
    """[ij|k] ∧ [ik|l] ∧ [il|j] ⇒ [ij|]

    Второй множитель Q = [jk]σ_jl²σ_kl² + [j][k]²[l][jl] + [j][k][kl]σ_jl² равен D² − P²,
    D = σ_jj σ_kk σ_ll, P = σ_jk σ_kl σ_jl, а σ_ij(D − P) лежит в идеале посылок.
    Целевой многочлен σ_ij²·[j][l][jl]·Q: слагаемое [j][k]²[l][jl] даёт u² с
    u = σ_ij·[j][k][l][jl], остальные два являются элементами конуса.
    """
    gs = ground_set or GroundSet.of("ijkl")
    i, j, k, l = labels or gs.labels[:4]
    spec = spec or _lm20_spec(gs, i, j, k, l)
    system = compile_model(spec, pd_nonvanishing=True)
    sigma = symbolic_covariance(gs)
    s = sigma.entry

    def pm(*K):
        return principal_minor(K, sigma)

    D = s(j, j) * s(k, k) * s(l, l)
    P = s(j, k) * s(k, l) * s(j, l)
    Q = (pm(j, k) * s(j, l) ** 2 * s(k, l) ** 2
         + pm(j) * pm(k) ** 2 * pm(l) * pm(j, l)
         + pm(j) * pm(k) * pm(k, l) * s(j, l) ** 2)
    W = s(i, j) * pm(j) * pm(l) * pm(j, l) * (D + P)

    def f_index(a, b, K):
        return system.index_of("f", str(CIStatement.of(a, b, K, gs)))

    def g_index(*K):
        return system.index_of("g", _principal_label(gs.canonical(K)))

    def h_index(label):
        return system.index_of("h", label)

    return FinalPolynomialCertificate(
        system=system,
        target=s(i, j) ** 2 * pm(j) * pm(l) * pm(j, l) * Q,
        ideal_part=[
            IdealTerm(W * s(j, j) * s(l, l), f_index(i, j, [k])),
            IdealTerm(W * s(j, j) * s(j, k), f_index(i, k, [l])),
            IdealTerm(W * s(j, k) * s(k, l), f_index(i, l, [j])),
        ],
        cone_part=[
            ConeTerm(Fraction(1), s(i, j) * s(j, l) * s(k, l), (g_index(j), g_index(l), g_index(j, l), g_index(j, k))),
            ConeTerm(Fraction(1), s(i, j) * s(j, l) * pm(j), (g_index(l), g_index(j, l), g_index(k), g_index(k, l))),
        ],
        monoid_part=[
            h_index(str(CIStatement.of(i, j, [], gs))),
            h_index(_principal_label((j,))),
            h_index(_principal_label((k,))),
            h_index(_principal_label((l,))),
            h_index(_principal_label(gs.canonical((j, l)))),
        ],
        name="lm20",
    )


def builtin_certificates() -> Dict[str, FinalPolynomialCertificate]:
    """Слабая транзитивность для всех подстановок над ijkl и правило lm20"""
    base = GroundSet.of("ijkl")
    shipped: Dict[str, FinalPolynomialCertificate] = {}
    for a, b in ((x, y) for x in base for y in base if base.index[x] < base.index[y]):
        for c in base:
            if c in (a, b):
                continue
            rest = [x for x in base if x not in (a, b, c)]
            for L in base.subsets(among=rest):
                gs = GroundSet(base.canonical((a, b, c) + L))
                cert = weak_transitivity_certificate(gs, a, b, c, L)
                shipped[cert.name] = cert
    shipped["lm20"] = lm20_certificate(base)
    return shipped


_BUILTIN: Optional[Dict[str, FinalPolynomialCertificate]] = None


def lookup(name: str) -> Optional[FinalPolynomialCertificate]:
    global _BUILTIN
    if _BUILTIN is None:
        _BUILTIN = builtin_certificates()
    return _BUILTIN.get(name.replace(" ", ""))


def certificate_for_formula(formula: InferenceFormula) -> Optional[FinalPolynomialCertificate]:
    """Сертификат для φ, если φ является экземпляром слабой транзитивности или lm20 с точностью до меток"""
    gs = formula.ground_set
    spec = CIModelSpec.from_formula(formula)
    antecedents = set(formula.antecedents)
    consequents = set(formula.consequents)

    for first in formula.antecedents:
        for second in formula.antecedents:
            if (first.i, first.j) != (second.i, second.j) or len(second.K) != len(first.K) + 1:
                continue
            extra = set(second.K) - set(first.K)
            if len(extra) != 1 or not set(first.K) <= set(second.K):
                continue
            k = extra.pop()
            i, j, L = first.i, first.j, first.K
            if CIStatement.of(i, k, L, gs) in consequents and CIStatement.of(j, k, L, gs) in consequents:
                logger.info(f"Формула {formula}: слабая транзитивность ({i},{j},{k})")
                return weak_transitivity_certificate(gs, i, j, k, L, spec=spec)

    mentioned = gs.canonical({x for s in formula.antecedents for x in s.labels()})
    if len(mentioned) >= 4:
        for i, j, k, l in permutations(mentioned, 4):
            template = _lm20_spec(gs, i, j, k, l)
            if set(template.independences) <= antecedents and set(template.dependences) <= consequents:
                logger.info(f"Формула {formula}: правило lm20 при i,j,k,l = {i},{j},{k},{l}")
                return lm20_certificate(gs, (i, j, k, l), spec=spec)
    return None


# --- поиск идеальной части -----------------------------------------------------------

def search_ideal_part(target: MultiPolynomial, system: SemialgebraicSystem,
                      budget: Optional[GroebnerBudget] = None) -> Optional[List[IdealTerm]]:
    """Кофакторы target по f через Бухбергера; None, если не найдены"""
    if not system.f:
        return None if not target.is_zero() else []
    result = ideal_membership(target, list(system.f), budget=budget)
    if not result.is_member:
        logger.info(f"Идеальная часть не найдена: {result.status}")
        return None
    return [IdealTerm(c, p) for p, c in enumerate(result.certificate.cofactors) if not c.is_zero()]


async def find_ideal_part(target: MultiPolynomial, system: SemialgebraicSystem, cache=None,
                          budget: Optional[GroebnerBudget] = None) -> Optional[List[IdealTerm]]:
    """То же с кэшем; кэшированные кофакторы перепроверяются раскрытием"""
    if cache is not None:
        cached = await cache.get(target, system.f)
        if cached is not None:
            trial_cert = FinalPolynomialCertificate(system, target, cached)
            try:
                if verify_ideal_part(trial_cert):
                    logger.info("✅ Кофакторы взяты из кэша")
                    return cached
            except CertificateIndexError:
                pass
            logger.warning("⚠️ Кэшированные кофакторы не прошли проверку")
    loop = asyncio.get_running_loop()
    terms = await loop.run_in_executor(None, search_ideal_part, target, system, budget)
    if terms is not None and cache is not None:
        await cache.set(target, system.f, terms)
    return terms


async def search_monoid_certificate(spec: CIModelSpec, cache=None,
                                    budget: Optional[GroebnerBudget] = None) -> Optional[FinalPolynomialCertificate]:
    """Сертификат вида u² ∈ I с u = Π h_k: конус пуст, ищется только идеальная часть"""
    system = compile_model(spec)
    if not system.h or not system.f:
        return None
    monoid = list(range(len(system.h)))
    trial_cert = FinalPolynomialCertificate(system, MultiPolynomial.zero(), monoid_part=monoid)
    u = monoid_element(trial_cert)
    target = u * u
    terms = await find_ideal_part(target, system, cache, budget)
    if terms is None:
        return None
    return FinalPolynomialCertificate(system, target, terms, [], monoid, name="monoid-search")
