from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

from sympy.polys.groebnertools import is_groebner as _sympy_is_groebner, spoly
from sympy.polys.rings import PolyElement, PolyRing

from config import settings
from errors import BudgetExceeded, DataFormatError
from logger import logger
from polynomial import MonomialOrder, MultiPolynomial, VariableTable, monomial_of

MEMBER = "member"
NOT_MEMBER = "not-member"
INDETERMINATE = "indeterminate"


@dataclass
class GroebnerBudget:
    """Ограничения на размер базиса и число S-пар"""
    max_basis: int = 64
    max_pairs: int = 5000

    @classmethod
    def from_settings(cls) -> "GroebnerBudget":
        return cls(settings.GROEBNER_MAX_BASIS, settings.GROEBNER_MAX_PAIRS)


@dataclass
class GroebnerBasis:
    """Базис Грёбнера с матрицей кофакторов над исходными образующими"""
    generators: List[MultiPolynomial]
    order: MonomialOrder
    inputs: List[MultiPolynomial]
    cofactors: List[List[MultiPolynomial]]
    pairs_processed: int = 0
    table: Optional[VariableTable] = None

    def leading_monomials(self):
        R = self.order.ring()
        return [monomial_of(self.order.variables, g.to_ring(R).LM) for g in self.generators]

    def verify_cofactors(self) -> bool:
        """g = Σ c_p f_p для каждого элемента базиса"""
        for g, row in zip(self.generators, self.cofactors):
            total = MultiPolynomial.zero()
            for c, f in zip(row, self.inputs):
                total = total + c * f
            if not (g - total).is_zero():
                return False
        return True


def default_order(polys: Sequence[MultiPolynomial], kind: str = "degrevlex") -> MonomialOrder:
    """Порядок с σ-переменными в порядке множества N (по таблице)"""
    table = next((p.table for p in polys if p.table is not None), None)
    priority = table.names if table is not None else ()
    return MonomialOrder.for_polynomials(polys, kind, priority)


def _table_of(polys: Sequence[MultiPolynomial]) -> Optional[VariableTable]:
    return next((p.table for p in polys if p.table is not None), None)


def _monic(p: PolyElement, row: List[PolyElement]) -> Tuple[PolyElement, List[PolyElement]]:
    lc = p.LC
    return p.quo_ground(lc), [c.quo_ground(lc) for c in row]


def _minus_combination(row: List[PolyElement], quotients: Sequence[PolyElement],
                       rows: Sequence[List[PolyElement]], R: PolyRing) -> List[PolyElement]:
    """row[p] - Σ q_t·rows[t][p]"""
    return [row[p] - sum((q * cof[p] for q, cof in zip(quotients, rows) if q), R.zero)
            for p in range(len(row))]


def _divide(f: PolyElement, G: Sequence[PolyElement], R: PolyRing) -> Tuple[List[PolyElement], PolyElement]:
    if not f or not G:
        return [R.zero for _ in G], f
    return f.div(list(G))


def buchberger(gens: Sequence[MultiPolynomial], order: Optional[MonomialOrder] = None,
               budget: Optional[GroebnerBudget] = None, reduced: bool = True) -> GroebnerBasis:
    """Алгоритм Бухбергера с двумя критериями и отслеживанием кофакторов"""
    if not gens:
        raise DataFormatError("Пустой список образующих")
    gens = list(gens)
    order = order or default_order(gens)
    budget = budget or GroebnerBudget.from_settings()
    table = _table_of(gens)
    R = order.ring()
    m = len(gens)

    G: List[PolyElement] = []
    C: List[List[PolyElement]] = []
    for idx, f in enumerate(gens):
        p = f.to_ring(R)
        if not p:
            continue
        unit = [R.one if t == idx else R.zero for t in range(m)]
        p, cof = _monic(p, unit)
        G.append(p)
        C.append(cof)

    leads = [g.LM for g in G]
    pending = set(combinations(range(len(G)), 2))
    processed = 0

    def criterion_chain(a: int, b: int, lcm) -> bool:
        for c in range(len(G)):
            if c in (a, b) or R.monomial_div(lcm, leads[c]) is None:
                continue
            if tuple(sorted((a, c))) not in pending and tuple(sorted((b, c))) not in pending:
                return True
        return False

    while pending:
        a, b = min(pending, key=lambda pr: (R.order(R.monomial_lcm(leads[pr[0]], leads[pr[1]])), pr))
        pending.discard((a, b))
        la, lb = leads[a], leads[b]
        lcm = R.monomial_lcm(la, lb)
        if R.monomial_mul(la, lb) == lcm:
            continue
        if criterion_chain(a, b, lcm):
            continue
        processed += 1
        if processed > budget.max_pairs:
            raise BudgetExceeded(f"Превышен лимит S-пар ({budget.max_pairs})")
        ma, mb = R.monomial_div(lcm, la), R.monomial_div(lcm, lb)
        s = spoly(G[a], G[b], R)
        s_cof = [C[a][p].mul_monom(ma) - C[b][p].mul_monom(mb) for p in range(m)]
        q, r = _divide(s, G, R)
        if not r:
            continue
        r, r_cof = _monic(r, _minus_combination(s_cof, q, C, R))
        G.append(r)
        C.append(r_cof)
        leads.append(r.LM)
        if len(G) > budget.max_basis:
            raise BudgetExceeded(f"Превышен лимит размера базиса ({budget.max_basis})")
        new = len(G) - 1
        pending |= {(t, new) for t in range(new)}

    if reduced:
        G, C = _reduce_basis(R, G, C)

    logger.info(f"Базис Грёбнера: {len(G)} элементов, {processed} S-пар")
    return GroebnerBasis(
        generators=[MultiPolynomial.from_element(g, table) for g in G],
        order=order,
        inputs=gens,
        cofactors=[[MultiPolynomial.from_element(c, table) for c in row] for row in C],
        pairs_processed=processed,
        table=table,
    )


def _reduce_basis(R: PolyRing, G: List[PolyElement], C: List[List[PolyElement]]):
    """Минимизация и интерредукция с пересчётом кофакторов"""
    leads = [g.LM for g in G]
    keep = []
    for t, lt in enumerate(leads):
        dominated = any(
            u != t and R.monomial_div(lt, lu) is not None and (lu != lt or u < t)
            for u, lu in enumerate(leads)
        )
        if not dominated:
            keep.append(t)
    G = [G[t] for t in keep]
    C = [C[t] for t in keep]
    for t in range(len(G)):
        others = [u for u in range(len(G)) if u != t]
        q, r = _divide(G[t], [G[u] for u in others], R)
        C[t] = _minus_combination(C[t], q, [C[u] for u in others], R)
        G[t] = r
    ranked = sorted(range(len(G)), key=lambda t: R.order(G[t].LM))
    return [G[t] for t in ranked], [C[t] for t in ranked]


def normal_form(f: MultiPolynomial, basis: GroebnerBasis) -> Tuple[MultiPolynomial, List[MultiPolynomial]]:
    """f = Σ q_t·g_t + r; ни один член r не делится на старшие мономы базиса"""
    order = MonomialOrder.for_polynomials([f] + basis.generators, basis.order.kind, basis.order.variables)
    R = order.ring()
    G = [g.to_ring(R) for g in basis.generators]
    table = basis.table or f.table
    q, r = _divide(f.to_ring(R), G, R)
    return MultiPolynomial.from_element(r, table), [MultiPolynomial.from_element(qt, table) for qt in q]


def is_groebner(basis: GroebnerBasis) -> bool:
    """Все S-многочлены редуцируются к нулю"""
    R = basis.order.ring()
    G = [g.to_ring(R).monic() for g in basis.generators]
    return _sympy_is_groebner(G, R)


@dataclass
class IdealCertificate:
    """f = Σ h_p·f_p"""
    target: MultiPolynomial
    generators: List[MultiPolynomial]
    cofactors: List[MultiPolynomial]

    def residual(self) -> MultiPolynomial:
        total = MultiPolynomial.zero()
        for h, f in zip(self.cofactors, self.generators):
            total = total + h * f
        return self.target - total

    def verify(self) -> bool:
        return len(self.cofactors) == len(self.generators) and self.residual().is_zero()


@dataclass
class MembershipResult:
    """Результат проверки принадлежности идеалу"""
    status: str
    certificate: Optional[IdealCertificate] = None
    error: Optional[str] = None
    basis: Optional[GroebnerBasis] = field(default=None, repr=False)

    @property
    def is_member(self) -> bool:
        return self.status == MEMBER


def ideal_membership(f: MultiPolynomial, gens: Sequence[MultiPolynomial],
                     order: Optional[MonomialOrder] = None,
                     budget: Optional[GroebnerBudget] = None) -> MembershipResult:
    """Сертификат f ∈ ⟨gens⟩, проверенный раскрытием скобок перед возвратом"""
    gens = list(gens)
    if f.is_zero():
        zeros = [MultiPolynomial.zero(f.table) for _ in gens]
        return MembershipResult(MEMBER, IdealCertificate(f, gens, zeros))
    order = order or default_order([f] + gens)
    try:
        basis = buchberger(gens, order, budget)
    except BudgetExceeded as e:
        logger.warning(f"⚠️ Бухбергер не уложился в бюджет: {e}")
        return MembershipResult(INDETERMINATE, error=str(e))
    remainder, quotients = normal_form(f, basis)
    if not remainder.is_zero():
        return MembershipResult(NOT_MEMBER, basis=basis)
    cofactors = []
    for p in range(len(gens)):
        h = MultiPolynomial.zero(basis.table)
        for q, row in zip(quotients, basis.cofactors):
            if not q.is_zero():
                h = h + q * row[p]
        cofactors.append(h)
    certificate = IdealCertificate(f, gens, cofactors)
    if not certificate.verify():
        logger.error("❌ Кофакторы не прошли проверку раскрытием")
        return MembershipResult(INDETERMINATE, error="cofactor verification failed", basis=basis)
    return MembershipResult(MEMBER, certificate, basis=basis)
