from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from config import CoefficientDomain
from errors import DataFormatError, StatementError
from polynomial import MultiPolynomial, VariableTable, det_bareiss, to_rat

_FORBIDDEN = set("_,|[]&=#() \t\n\"'")


class GroundSet:
    """Упорядоченное конечное множество меток N"""

    def __init__(self, labels: Iterable[Any]):
        labels = tuple(str(label) for label in labels)
        if len(set(labels)) != len(labels):
            raise DataFormatError(f"Метки повторяются: {list(labels)}")
        for label in labels:
            if not label or set(label) & _FORBIDDEN:
                raise DataFormatError(f"Недопустимая метка: {label!r}")
        self.labels = labels
        self.index = {label: pos for pos, label in enumerate(labels)}

    @classmethod
    def of(cls, labels: Union[str, Iterable[Any]]) -> "GroundSet":
        """GroundSet.of("ijkl") или GroundSet.of(["A", "B"])"""
        if isinstance(labels, str):
            return cls(list(labels))
        return cls(labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return label in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, GroundSet) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"GroundSet({list(self.labels)})"

    def check(self, *labels: str) -> None:
        for label in labels:
            if label not in self.index:
                raise StatementError(f"Метка {label!r} не входит в {list(self.labels)}")

    def canonical(self, subset: Iterable[str]) -> Tuple[str, ...]:
        """Подмножество в порядке множества N"""
        subset = set(subset)
        self.check(*subset)
        return tuple(sorted(subset, key=self.index.__getitem__))

    def subsets(self, min_size: int = 0, among: Optional[Iterable[str]] = None) -> List[Tuple[str, ...]]:
        """Все подмножества: по размеру, затем лексикографически"""
        pool = self.canonical(among) if among is not None else self.labels
        result = []
        for size in range(min_size, len(pool) + 1):
            result.extend(combinations(pool, size))
        return result

    def without(self, *labels: str) -> "GroundSet":
        self.check(*labels)
        return GroundSet([label for label in self.labels if label not in labels])

    def sigma_table(self) -> VariableTable:
        return _sigma_table(self)


def sigma_variable(a: str, b: str, ground_set: GroundSet) -> str:
    """Имя переменной σ_ab: s_<a>_<b>, a ≤ b в порядке N"""
    ground_set.check(a, b)
    if ground_set.index[a] > ground_set.index[b]:
        a, b = b, a
    return f"s_{a}_{b}"


@lru_cache(maxsize=None)
def _sigma_table(ground_set: GroundSet) -> VariableTable:
    names = []
    for pos, a in enumerate(ground_set.labels):
        for b in ground_set.labels[pos:]:
            names.append(f"s_{a}_{b}")
    return VariableTable(names)


class SymbolicCovariance:
    """Симметрическая матрица σ-переменных"""

    domain = CoefficientDomain.SYMBOLIC

    def __init__(self, ground_set: GroundSet):
        self.ground_set = ground_set
        self.table = ground_set.sigma_table()
        self._vars: Dict[str, MultiPolynomial] = {}

    def entry(self, a: str, b: str) -> MultiPolynomial:
        name = sigma_variable(a, b, self.ground_set)
        if name not in self._vars:
            self._vars[name] = MultiPolynomial.variable(name, self.table)
        return self._vars[name]


class RationalCovariance:
    """Симметрическая матрица над Q"""

    domain = CoefficientDomain.RATIONAL

    def __init__(self, ground_set: GroundSet, entries: Dict[Tuple[str, str], Fraction]):
        self.ground_set = ground_set
        self._entries = entries

    @classmethod
    def from_rows(cls, ground_set: GroundSet, rows: Sequence[Sequence[Any]]) -> "RationalCovariance":
        n = ground_set.n
        if len(rows) != n or any(len(row) != n for row in rows):
            raise DataFormatError(f"Ожидалась матрица {n}x{n}")
        values = [[to_rat(x) for x in row] for row in rows]
        entries = {}
        for r, a in enumerate(ground_set.labels):
            for c, b in enumerate(ground_set.labels):
                if values[r][c] != values[c][r]:
                    raise DataFormatError(f"Матрица не симметрична в ({a},{b})")
                entries[(a, b)] = values[r][c]
        return cls(ground_set, entries)

    @classmethod
    def identity(cls, ground_set: GroundSet) -> "RationalCovariance":
        n = ground_set.n
        return cls.from_rows(ground_set, [[1 if r == c else 0 for c in range(n)] for r in range(n)])

    def entry(self, a: str, b: str) -> Fraction:
        try:
            return self._entries[(a, b)]
        except KeyError:
            raise StatementError(f"Метки ({a},{b}) вне множества {list(self.ground_set.labels)}")

    def rows(self) -> List[List[Fraction]]:
        labels = self.ground_set.labels
        return [[self.entry(a, b) for b in labels] for a in labels]

    def submatrix(self, keep: Iterable[str]) -> "RationalCovariance":
        sub = GroundSet(self.ground_set.canonical(keep))
        return RationalCovariance(sub, {(a, b): self.entry(a, b) for a in sub for b in sub})

    def permute(self, mapping: Dict[str, str]) -> "RationalCovariance":
        """PᵀΣP: элемент (a,b) переезжает в (π(a), π(b))"""
        return RationalCovariance(self.ground_set,
                                  {(mapping[a], mapping[b]): v for (a, b), v in self._entries.items()})


def symbolic_covariance(ground_set: GroundSet) -> SymbolicCovariance:
    return SymbolicCovariance(ground_set)


# --- миноры -------------------------------------------------------------------

def _is_symbolic(sigma) -> bool:
    return getattr(sigma, "domain", None) == CoefficientDomain.SYMBOLIC


def _one_for(sigma):
    one = getattr(sigma, "one", None)
    return one() if callable(one) else Fraction(1)


def _det(sigma, rows: Sequence[str], cols: Sequence[str]):
    A = [[sigma.entry(r, c) for c in cols] for r in rows]
    one = MultiPolynomial.one(sigma.table) if _is_symbolic(sigma) else _one_for(sigma)
    return det_bareiss(A, one)


def principal_minor(K: Iterable[str], sigma):
    """[K:Σ]: каждый k из K спарен сам с собой"""
    K = sigma.ground_set.canonical(K)
    return _det(sigma, K, K)


def almost_principal_minor(i: str, j: str, K: Iterable[str], sigma):
    """[ij|K:Σ]: строки (i, K), столбцы (j, K)"""
    K = list(K)
    _check_apm(i, j, K, sigma.ground_set)
    K = sigma.ground_set.canonical(K)
    return _det(sigma, (i,) + K, (j,) + K)


def _check_apm(i: str, j: str, K: Iterable[str], ground_set: GroundSet) -> None:
    ground_set.check(i, j, *K)
    if i == j:
        raise StatementError(f"i = j = {i!r}")
    if i in K or j in K:
        raise StatementError(f"Условное множество {sorted(K)} пересекает {{{i},{j}}}")
    if len(set(K)) != len(list(K)):
        raise StatementError("Условное множество содержит повторы")


# --- скобки --------------------------------------------------------------------

def principal_bracket_name(K: Iterable[str], ground_set: GroundSet) -> str:
    return "p_" + "".join(ground_set.canonical(K))


def apm_bracket_name(i: str, j: str, K: Iterable[str], ground_set: GroundSet) -> str:
    K = list(K)
    _check_apm(i, j, K, ground_set)
    return f"a_{i}_{j}_" + "".join(ground_set.canonical(K))


def pr(K: Iterable[str], ground_set: GroundSet) -> MultiPolynomial:
    """Скобка [K]"""
    return MultiPolynomial.variable(principal_bracket_name(K, ground_set))


def apr(i: str, j: str, K: Iterable[str], ground_set: GroundSet) -> MultiPolynomial:
    """Скобка [ij|K]"""
    return MultiPolynomial.variable(apm_bracket_name(i, j, K, ground_set))


def split_labels(text: str, ground_set: GroundSet) -> Tuple[str, ...]:
    """Разбиение конкатенации меток; неоднозначность считается ошибкой"""
    parses = []

    def walk(pos: int, used: Tuple[str, ...]):
        if len(parses) > 1:
            return
        if pos == len(text):
            parses.append(used)
            return
        for label in ground_set.labels:
            if label not in used and text.startswith(label, pos):
                walk(pos + len(label), used + (label,))

    walk(0, ())
    if len(parses) != 1:
        raise DataFormatError(f"Не удаётся однозначно разобрать метки {text!r}")
    return ground_set.canonical(parses[0])


def parse_bracket_variable(name: str, ground_set: GroundSet):
    """('p', K) или ('a', i, j, K)"""
    if name.startswith("p_"):
        return ("p", split_labels(name[2:], ground_set))
    if name.startswith("a_"):
        parts = name[2:].split("_")
        if len(parts) != 3:
            raise DataFormatError(f"Некорректная скобка: {name}")
        i, j, rest = parts
        try:
            ground_set.check(i, j)
            K = split_labels(rest, ground_set)
            _check_apm(i, j, K, ground_set)
        except StatementError as e:
            raise DataFormatError(f"Некорректная скобка {name}: {e}")
        return ("a", i, j, K)
    raise DataFormatError(f"Не скобочная переменная: {name}")


@lru_cache(maxsize=4096)
def _bracket_image(name: str, ground_set: GroundSet) -> MultiPolynomial:
    sigma = SymbolicCovariance(ground_set)
    parsed = parse_bracket_variable(name, ground_set)
    if parsed[0] == "p":
        return principal_minor(parsed[1], sigma)
    _, i, j, K = parsed
    return almost_principal_minor(i, j, K, sigma)


def bracket_eval(f: MultiPolynomial, ground_set: GroundSet) -> MultiPolynomial:
    """Отображение вычисления R_N → Q[Σ]: p_K ↦ [K:Σ], a_i_j_K ↦ [ij|K:Σ], p_ ↦ 1"""
    table = ground_set.sigma_table()
    images = {name: _bracket_image(name, ground_set) for name in f.variables()}
    return f.substitute(images, table)


def matus_residual(i: str, j: str, k: str, L: Iterable[str], ground_set: GroundSet) -> MultiPolynomial:
    """[kL]·[ij|L] − [L]·[ij|kL] − [ik|L]·[jk|L]"""
    L = list(L)
    if len({i, j, k}) != 3:
        raise StatementError(f"Метки {i},{j},{k} должны быть различны")
    if set(L) & {i, j, k}:
        raise StatementError(f"L = {L} пересекает {{{i},{j},{k}}}")
    gs = ground_set
    return (pr([k] + L, gs) * apr(i, j, L, gs)
            - pr(L, gs) * apr(i, j, [k] + L, gs)
            - apr(i, k, L, gs) * apr(j, k, L, gs))


def in_eval_kernel(f: MultiPolynomial, ground_set: GroundSet) -> bool:
    """Лежит ли f в ядре (дегомогенизированного) отображения вычисления"""
    return bracket_eval(f, ground_set).is_zero()
