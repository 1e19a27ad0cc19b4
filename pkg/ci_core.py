import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from errors import DataFormatError, FormulaSyntaxError, NotPositiveDefinite, SemanticError, StatementError
from minors import GroundSet, RationalCovariance, almost_principal_minor, principal_minor


@dataclass(frozen=True, order=True)
class CIStatement:
    """Элементарное утверждение ⫫(i,j|K); пара {i,j} неупорядочена"""
    i: str
    j: str
    K: Tuple[str, ...] = ()

    @classmethod
    def of(cls, i: str, j: str, K: Iterable[str], ground_set: GroundSet) -> "CIStatement":
        K = list(K)
        ground_set.check(i, j, *K)
        if i == j:
            raise StatementError(
                f"[{i},{j}|...]: i = j (функциональная зависимость не поддерживается)")
        if len(set(K)) != len(K):
            raise StatementError(f"Повторы в условном множестве {K}")
        if i in K or j in K:
            raise StatementError(f"Условное множество {K} пересекает {{{i},{j}}}")
        if ground_set.index[i] > ground_set.index[j]:
            i, j = j, i
        return cls(i, j, ground_set.canonical(K))

    def labels(self) -> FrozenSet[str]:
        return frozenset((self.i, self.j) + self.K)

    def mentions(self, label: str) -> bool:
        return label in self.labels()

    def __str__(self) -> str:
        return f"[{self.i},{self.j}|{','.join(self.K)}]"


def all_statements(ground_set: GroundSet) -> List[CIStatement]:
    """Все n(n−1)/2 · 2^(n−2) элементарных утверждений"""
    result = []
    labels = ground_set.labels
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            i, j = labels[a], labels[b]
            for K in ground_set.subsets(among=[x for x in labels if x not in (i, j)]):
                result.append(CIStatement(i, j, K))
    return result


def _dedupe(statements: Iterable[CIStatement]) -> Tuple[CIStatement, ...]:
    return tuple(dict.fromkeys(statements))


@dataclass(frozen=True)
class InferenceFormula:
    """Конъюнкция ⇒ дизъюнкция элементарных утверждений"""
    ground_set: GroundSet
    antecedents: Tuple[CIStatement, ...]
    consequents: Tuple[CIStatement, ...]

    def __post_init__(self):
        object.__setattr__(self, "antecedents", _dedupe(self.antecedents))
        object.__setattr__(self, "consequents", _dedupe(self.consequents))
        for s in self.antecedents + self.consequents:
            self.ground_set.check(s.i, s.j, *s.K)

    def __str__(self) -> str:
        lhs = " & ".join(str(s) for s in self.antecedents)
        rhs = " | ".join(str(s) for s in self.consequents)
        return f"{lhs} => {rhs}"


@dataclass(frozen=True)
class CIModelSpec:
    """Независимости (миноры обращаются в 0) и зависимости (не обращаются)"""
    ground_set: GroundSet
    independences: Tuple[CIStatement, ...] = ()
    dependences: Tuple[CIStatement, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "independences", _dedupe(self.independences))
        object.__setattr__(self, "dependences", _dedupe(self.dependences))
        clash = set(self.independences) & set(self.dependences)
        if clash:
            raise DataFormatError(f"Утверждения одновременно в обоих списках: {sorted(map(str, clash))}")

    @classmethod
    def from_formula(cls, formula: InferenceFormula) -> "CIModelSpec":
        """M(φ): множество контрпримеров к φ"""
        return cls(formula.ground_set, formula.antecedents, formula.consequents)


@dataclass(frozen=True)
class CIStructure:
    """Множество выполненных CI-утверждений над N"""
    ground_set: GroundSet
    statements: FrozenSet[CIStatement] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "statements", frozenset(self.statements))
        for s in self.statements:
            self.ground_set.check(s.i, s.j, *s.K)

    def __contains__(self, s: CIStatement) -> bool:
        return s in self.statements

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self):
        return iter(sorted(self.statements, key=lambda s: _statement_key(s, self.ground_set)))

    def with_statements(self, extra: Iterable[CIStatement]) -> "CIStructure":
        return CIStructure(self.ground_set, self.statements | frozenset(extra))


def _statement_key(s: CIStatement, ground_set: GroundSet):
    idx = ground_set.index
    return (len(s.K), idx[s.i], idx[s.j], [idx[k] for k in s.K])


# --- разбор формул ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(=>|&|\||\[|\]|,|[^\s,|\[\]&=]+)")


def _tokenize(text: str) -> List[Tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or not m.group(1):
            raise FormulaSyntaxError(f"Неожиданный символ {text[pos]!r}", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    """Рекурсивный спуск по грамматике formula := conj "=>" disj"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def where(self) -> int:
        return self.tokens[self.pos][1] if self.pos < len(self.tokens) else len(self.text)

    def expect(self, token: str) -> None:
        if self.peek() != token:
            found = self.peek() or "конец строки"
            raise FormulaSyntaxError(f"Ожидалось {token!r}, найдено {found!r}", self.where())
        self.pos += 1

    def label(self) -> str:
        tok = self.peek()
        if tok is None or tok in ("=>", "&", "|", "[", "]", ","):
            raise FormulaSyntaxError(f"Ожидалась метка, найдено {tok or 'конец строки'!r}", self.where())
        self.pos += 1
        return tok

    def statement(self):
        start = self.where()
        self.expect("[")
        i = self.label()
        self.expect(",")
        j = self.label()
        self.expect("|")
        K = []
        if self.peek() != "]":
            K.append(self.label())
            while self.peek() == ",":
                self.pos += 1
                K.append(self.label())
        self.expect("]")
        return (i, j, K, start)

    def formula(self):
        conj = [self.statement()]
        while self.peek() == "&":
            self.pos += 1
            conj.append(self.statement())
        self.expect("=>")
        disj = [self.statement()]
        while self.peek() == "|":
            self.pos += 1
            disj.append(self.statement())
        if self.peek() is not None:
            raise FormulaSyntaxError(f"Лишний токен {self.peek()!r}", self.where())
        return conj, disj


def parse_formula(text: str, ground_set: Optional[GroundSet] = None) -> InferenceFormula:
    """Разбор DSL; без N множество выводится из меток формулы (в порядке сортировки)"""
    conj, disj = _Parser(text).formula()
    if ground_set is None:
        labels = set()
        for i, j, K, _ in conj + disj:
            labels |= {i, j, *K}
        ground_set = GroundSet(sorted(labels))

    def build(raw):
        i, j, K, start = raw
        try:
            return CIStatement.of(i, j, K, ground_set)
        except StatementError as e:
            raise StatementError(f"{e} (позиция {start})")

    return InferenceFormula(ground_set, tuple(build(s) for s in conj), tuple(build(s) for s in disj))


# --- семантика на точных матрицах ---------------------------------------------------

def sign(value) -> int:
    """Точный знак Fraction или элемента числового поля"""
    if isinstance(value, (int, Fraction)):
        return (value > 0) - (value < 0)
    return value.sign()


def is_positive_definite(sigma) -> bool:
    """Критерий: все главные миноры [K:Σ] > 0, K ≠ ∅"""
    for K in sigma.ground_set.subsets(min_size=1):
        if sign(principal_minor(K, sigma)) <= 0:
            return False
    return True


def ci_holds(sigma, s: CIStatement) -> bool:
    """⫫(i,j|K) ⟺ [ij|K:Σ] = 0"""
    return sign(almost_principal_minor(s.i, s.j, s.K, sigma)) == 0


class Classification(str, Enum):
    NOT_APPLICABLE = "not-applicable"
    WITNESSES_CONCLUSION = "witnesses-conclusion"
    COUNTEREXAMPLE = "counterexample"


def _same_ground(sigma, ground_set: GroundSet) -> None:
    if sigma.ground_set != ground_set:
        raise StatementError(
            f"Множества меток не совпадают: {list(sigma.ground_set.labels)} и {list(ground_set.labels)}")


def classify_against_formula(sigma, formula: InferenceFormula) -> Classification:
    _same_ground(sigma, formula.ground_set)
    if not is_positive_definite(sigma):
        raise NotPositiveDefinite("Контрпримеры ищутся только среди положительно определённых матриц")
    if not all(ci_holds(sigma, s) for s in formula.antecedents):
        return Classification.NOT_APPLICABLE
    if any(ci_holds(sigma, s) for s in formula.consequents):
        return Classification.WITNESSES_CONCLUSION
    return Classification.COUNTEREXAMPLE


def structure_of(sigma) -> CIStructure:
    gs = sigma.ground_set
    return CIStructure(gs, frozenset(s for s in all_statements(gs) if ci_holds(sigma, s)))


# --- перестановки и миноры структур ---------------------------------------------------

def _check_permutation(pi: Dict[str, str], ground_set: GroundSet) -> None:
    if set(pi) != set(ground_set.labels) or set(pi.values()) != set(ground_set.labels):
        raise DataFormatError(f"Отображение {pi} не является перестановкой {list(ground_set.labels)}")


def _permute_statement(s: CIStatement, pi: Dict[str, str], ground_set: GroundSet) -> CIStatement:
    return CIStatement.of(pi[s.i], pi[s.j], [pi[k] for k in s.K], ground_set)


def apply_permutation(x: Union[CIStatement, InferenceFormula, CIStructure], pi: Dict[str, str],
                      ground_set: Optional[GroundSet] = None):
    """Переименование меток перестановкой π множества N"""
    if isinstance(x, InferenceFormula):
        gs = x.ground_set
        _check_permutation(pi, gs)
        return InferenceFormula(gs,
                                tuple(_permute_statement(s, pi, gs) for s in x.antecedents),
                                tuple(_permute_statement(s, pi, gs) for s in x.consequents))
    if isinstance(x, CIStructure):
        gs = x.ground_set
        _check_permutation(pi, gs)
        return CIStructure(gs, frozenset(_permute_statement(s, pi, gs) for s in x.statements))
    if isinstance(x, CIStatement):
        if ground_set is None:
            ground_set = GroundSet(sorted(pi))
        _check_permutation(pi, ground_set)
        return _permute_statement(x, pi, ground_set)
    raise DataFormatError(f"Нельзя переставить объект типа {type(x).__name__}")


def structure_delete(G: CIStructure, m: str) -> CIStructure:
    """Маргинализация: удаляем утверждения, упоминающие m"""
    rest = G.ground_set.without(m)
    return CIStructure(rest, frozenset(s for s in G.statements if not s.mentions(m)))


def structure_contract(G: CIStructure, m: str) -> CIStructure:
    """Обусловливание: (ij|K) над N\\{m} ⟺ (ij|Km) ∈ G"""
    gs = G.ground_set
    rest = gs.without(m)
    kept = set()
    for s in all_statements(rest):
        lifted = CIStatement.of(s.i, s.j, s.K + (m,), gs)
        if lifted in G:
            kept.add(s)
    return CIStructure(rest, frozenset(kept))


def marginal(sigma: RationalCovariance, keep: Iterable[str]) -> RationalCovariance:
    """Ковариация маргинала: главная подматрица"""
    return sigma.submatrix(keep)


def conditional(sigma: RationalCovariance, m: str) -> RationalCovariance:
    """Дополнение Шура: точная условная ковариация на N\\{m}"""
    gs = sigma.ground_set
    rest = gs.without(m)
    pivot = sigma.entry(m, m)
    if pivot == 0:
        raise SemanticError(f"σ_{m}{m} = 0, условное распределение не определено")
    entries = {}
    for a in rest:
        for b in rest:
            entries[(a, b)] = sigma.entry(a, b) - sigma.entry(a, m) * sigma.entry(b, m) / pivot
    return RationalCovariance(rest, entries)
