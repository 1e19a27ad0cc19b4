from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import Matrix, Rational
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import lex, monomial_key
from sympy.polys.polyerrors import GeneratorsError
from sympy.polys.rings import PolyElement, PolyRing

from errors import DataFormatError, MissingAssignment, NonSquareMatrix, VariableTableMismatch

Rat = Fraction
# Моном: отсортированный по имени кортеж пар (переменная, степень > 0)
Monomial = Tuple[Tuple[str, int], ...]
ONE_MONOMIAL: Monomial = ()


class VarKind(str, Enum):
    """Виды переменных"""
    SIGMA = "sigma"
    PRINCIPAL = "principal-bracket"
    APM = "apm-bracket"
    POINT = "point-coordinate"
    AUXILIARY = "auxiliary"


def var_kind(name: str) -> VarKind:
    """Вид переменной по форме имени"""
    if name.startswith("s_"):
        return VarKind.SIGMA
    if name.startswith("p_"):
        return VarKind.PRINCIPAL
    if name.startswith("a_"):
        return VarKind.APM
    if name.startswith("pt_"):
        return VarKind.POINT
    return VarKind.AUXILIARY


def to_rat(value: Any) -> Fraction:
    """Приведение к точному рациональному числу"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DataFormatError(f"Не число: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise DataFormatError(f"Не рациональное число: {value!r}")
    raise DataFormatError(f"Ожидалось рациональное число, получено {type(value).__name__}")


def format_rat(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _to_qq(value: Fraction):
    return QQ(value.numerator, value.denominator)


def _from_qq(value) -> Fraction:
    return Fraction(int(QQ.numer(value)), int(QQ.denom(value)))


def make_monomial(exponents: Mapping[str, int]) -> Monomial:
    for var, exp in exponents.items():
        if not isinstance(exp, int) or isinstance(exp, bool) or exp < 0:
            raise DataFormatError(f"Недопустимая степень {exp!r} у {var}")
    return tuple(sorted((v, e) for v, e in exponents.items() if e > 0))


def monomial_of(names: Sequence[str], expv: Sequence[int]) -> Monomial:
    """Вектор показателей кольца sympy → моном по именам"""
    return tuple(sorted((names[i], e) for i, e in enumerate(expv) if e))


# --- кольца sympy -------------------------------------------------------------

@lru_cache(maxsize=None)
def _ring(names: Tuple[str, ...]) -> PolyRing:
    return PolyRing(names, QQ, lex)


@lru_cache(maxsize=None)
def ring_names(R: PolyRing) -> Tuple[str, ...]:
    return tuple(s.name for s in R.symbols)


class VariableTable:
    """Упорядоченная таблица переменных"""

    def __init__(self, names: Iterable[str]):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise DataFormatError("Имена переменных в таблице повторяются")
        self.index = {name: pos for pos, name in enumerate(self.names)}

    def kind(self, name: str) -> VarKind:
        return var_kind(name)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, VariableTable) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"VariableTable({list(self.names)})"


def _home_ring(table: Optional[VariableTable], names: Iterable[str]) -> PolyRing:
    """Кольцо многочлена: сначала переменные таблицы, затем прочие по имени"""
    base = table.names if table is not None else ()
    extra = tuple(sorted(set(names) - set(base)))
    return _ring(base + extra)


class MonomialOrder:
    """Мономиальный порядок: degrevlex, grlex или lex по списку приоритетов"""

    KINDS = ("degrevlex", "grlex", "lex")
    _SYMPY = {"degrevlex": "grevlex", "grlex": "grlex", "lex": "lex"}

    def __init__(self, kind: str = "degrevlex", variables: Sequence[str] = ()):
        if kind not in self.KINDS:
            raise DataFormatError(f"Неизвестный порядок: {kind}")
        self.kind = kind
        self.variables = tuple(variables)
        self.sympy_order = monomial_key(self._SYMPY[kind])
        self._index = {v: i for i, v in enumerate(self.variables)}

    def vector(self, m: Monomial) -> Tuple[int, ...]:
        vec = [0] * len(self.variables)
        for var, exp in m:
            try:
                vec[self._index[var]] = exp
            except KeyError:
                raise VariableTableMismatch(f"Переменная {var} не входит в порядок")
        return tuple(vec)

    def key(self, m: Monomial):
        """Ключ сравнения: больший ключ у старшего монома"""
        return self.sympy_order(self.vector(m))

    def ring(self) -> PolyRing:
        """Кольцо Q[variables] с этим порядком"""
        return _ordered_ring(self.variables, self.kind)

    @classmethod
    def for_polynomials(cls, polys: Iterable["MultiPolynomial"], kind: str = "degrevlex",
                        priority: Sequence[str] = ()) -> "MonomialOrder":
        """Порядок, покрывающий все переменные; остальные идут по имени после приоритетных"""
        seen = set(priority)
        extra = set()
        for p in polys:
            extra |= p.variables() - seen
        return cls(kind, list(priority) + sorted(extra))


@lru_cache(maxsize=None)
def _ordered_ring(names: Tuple[str, ...], kind: str) -> PolyRing:
    return PolyRing(names, QQ, monomial_key(MonomialOrder._SYMPY[kind]))


def _merge_tables(a: Optional[VariableTable], b: Optional[VariableTable]) -> Optional[VariableTable]:
    if a is None:
        return b
    if b is None or a is b or a == b:
        return a
    raise VariableTableMismatch("Операнды над разными таблицами переменных")


class MultiPolynomial:
    """Многочлен над Q: элемент PolyRing из sympy плюс таблица переменных"""

    __slots__ = ("poly", "table")

    def __init__(self, terms: Optional[Mapping[Monomial, Any]] = None,
                 table: Optional[VariableTable] = None):
        clean: Dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            c = to_rat(coeff)
            if c != 0:
                clean[mono] = c
        names = {var for mono in clean for var, _ in mono}
        if table is not None:
            missing = names - set(table.names)
            if missing:
                raise VariableTableMismatch(f"Переменная {min(missing)} отсутствует в таблице")
        R = _home_ring(table, names)
        index = {name: pos for pos, name in enumerate(ring_names(R))}
        rep = {}
        for mono, c in clean.items():
            expv = [0] * R.ngens
            for var, exp in mono:
                expv[index[var]] += exp
            rep[tuple(expv)] = _to_qq(c)
        self.poly: PolyElement = R.from_dict(rep)
        self.table = table

    @classmethod
    def _wrap(cls, poly: PolyElement, table: Optional[VariableTable]) -> "MultiPolynomial":
        p = cls.__new__(cls)
        p.poly = poly
        p.table = table
        return p

    @classmethod
    def from_element(cls, poly: PolyElement, table: Optional[VariableTable] = None) -> "MultiPolynomial":
        """Элемент любого кольца Q[...] из sympy → MultiPolynomial"""
        names = ring_names(poly.ring)
        used = {names[i] for expv in poly.itermonoms() for i, e in enumerate(expv) if e}
        if table is not None and not used <= set(table.names):
            raise VariableTableMismatch("Переменные многочлена отсутствуют в таблице")
        return cls._wrap(poly.set_ring(_home_ring(table, used)), table)

    @classmethod
    def from_expr(cls, expr, table: Optional[VariableTable] = None) -> "MultiPolynomial":
        """Выражение sympy (многочлен с рациональными коэффициентами) → MultiPolynomial"""
        R = _home_ring(table, (s.name for s in expr.free_symbols))
        return cls.from_element(R.from_expr(expr), table)

    @classmethod
    def constant(cls, value: Any, table: Optional[VariableTable] = None) -> "MultiPolynomial":
        return cls({ONE_MONOMIAL: value}, table)

    @classmethod
    def zero(cls, table: Optional[VariableTable] = None) -> "MultiPolynomial":
        return cls._wrap(_home_ring(table, ()).zero, table)

    @classmethod
    def one(cls, table: Optional[VariableTable] = None) -> "MultiPolynomial":
        return cls._wrap(_home_ring(table, ()).one, table)

    @classmethod
    def variable(cls, name: str, table: Optional[VariableTable] = None) -> "MultiPolynomial":
        return cls({((name, 1),): 1}, table)

    @classmethod
    def monomial(cls, exponents: Mapping[str, int], coeff: Any = 1,
                 table: Optional[VariableTable] = None) -> "MultiPolynomial":
        return cls({make_monomial(exponents): coeff}, table)

    def _coerce(self, other) -> Optional["MultiPolynomial"]:
        if isinstance(other, MultiPolynomial):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return MultiPolynomial.constant(other)
        return None

    def _unify(self, other: "MultiPolynomial") -> Tuple[PolyElement, PolyElement, Optional[VariableTable]]:
        table = _merge_tables(self.table, other.table)
        Ra, Rb = self.poly.ring, other.poly.ring
        if Ra is Rb:
            return self.poly, other.poly, table
        R = _home_ring(table, ring_names(Ra) + ring_names(Rb))
        return self.poly.set_ring(R), other.poly.set_ring(R), table

    def to_ring(self, R: PolyRing) -> PolyElement:
        """Перенос в кольцо R (например, кольцо мономиального порядка)"""
        try:
            return self.poly.set_ring(R)
        except GeneratorsError:
            raise VariableTableMismatch("Переменные многочлена не входят в кольцо")

    def to_expr(self):
        return self.poly.as_expr()

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        names = ring_names(self.poly.ring)
        return {monomial_of(names, expv): _from_qq(c) for expv, c in self.poly.iterterms()}

    # --- кольцевые операции -------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b, table = self._unify(other)
        return MultiPolynomial._wrap(a + b, table)

    __radd__ = __add__

    def __neg__(self):
        return MultiPolynomial._wrap(-self.poly, self.table)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b, table = self._unify(other)
        return MultiPolynomial._wrap(a - b, table)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        if not isinstance(other, MultiPolynomial):
            return NotImplemented
        a, b, table = self._unify(other)
        return MultiPolynomial._wrap(a * b, table)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or isinstance(exponent, bool) or exponent < 0:
            raise DataFormatError("Степень должна быть неотрицательным целым")
        return MultiPolynomial._wrap(self.poly ** exponent, self.table)

    def scale(self, factor: Any) -> "MultiPolynomial":
        return MultiPolynomial._wrap(self.poly.mul_ground(_to_qq(to_rat(factor))), self.table)

    def with_table(self, table: Optional[VariableTable]) -> "MultiPolynomial":
        return MultiPolynomial(self.terms, table)

    # --- сравнение ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.poly

    def is_constant(self) -> bool:
        return self.poly.is_ground

    def constant_value(self) -> Fraction:
        return _from_qq(self.poly.get(self.poly.ring.zero_monom, QQ.zero))

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.poly.ring is other.poly.ring:
            return self.poly == other.poly
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.poly)

    # --- свойства -------------------------------------------------------------

    def variables(self) -> set:
        names = ring_names(self.poly.ring)
        return {names[i] for expv in self.poly.itermonoms() for i, e in enumerate(expv) if e}

    def degree(self) -> int:
        return max((sum(expv) for expv in self.poly.itermonoms()), default=0)

    def __len__(self) -> int:
        return len(self.poly)

    def evaluate(self, assignment: Mapping[str, Any]):
        """Значение многочлена; кольцевой гомоморфизм по присваиванию"""
        missing = self.variables() - set(assignment)
        if missing:
            raise MissingAssignment(f"Нет значений для переменных: {', '.join(sorted(missing))}")
        total = 0
        for mono, coeff in self.terms.items():
            value = coeff
            for var, exp in mono:
                value = value * assignment[var] ** exp
            total = total + value
        return total

    def substitute(self, images: Mapping[str, "MultiPolynomial"],
                   table: Optional[VariableTable] = None) -> "MultiPolynomial":
        """Подстановка многочленов вместо переменных (гомоморфизм колец)"""
        result = MultiPolynomial.zero(table)
        powers: Dict[Tuple[str, int], MultiPolynomial] = {}
        for mono, coeff in self.terms.items():
            term = MultiPolynomial.constant(coeff, table)
            for var, exp in mono:
                if var not in images:
                    raise MissingAssignment(f"Нет образа для переменной {var}")
                key = (var, exp)
                if key not in powers:
                    powers[key] = images[var] ** exp
                term = term * powers[key]
            result = result + term
        return result

    # --- печать ---------------------------------------------------------------

    def default_order(self, kind: str = "grlex") -> MonomialOrder:
        priority = self.table.names if self.table is not None else ()
        return MonomialOrder.for_polynomials([self], kind, priority)

    def sorted_terms(self, order: Optional[MonomialOrder] = None) -> List[Tuple[Monomial, Fraction]]:
        order = order or self.default_order()
        names = order.variables
        return [(monomial_of(names, expv), _from_qq(c)) for expv, c in self.to_ring(order.ring()).terms()]

    def to_string(self, order: Optional[MonomialOrder] = None) -> str:
        if not self.poly:
            return "0"
        parts = []
        for pos, (mono, coeff) in enumerate(self.sorted_terms(order)):
            sign = "-" if coeff < 0 else "+"
            mag = -coeff if coeff < 0 else coeff
            factors = [var if exp == 1 else f"{var}^{exp}" for var, exp in mono]
            if not factors:
                body = format_rat(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([format_rat(mag)] + factors)
            if pos == 0:
                parts.append(body if sign == "+" else f"-{body}")
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"MultiPolynomial({self.to_string()})"


def ring_ops(p: MultiPolynomial, q: MultiPolynomial) -> Dict[str, Union[MultiPolynomial, bool]]:
    """Все кольцевые операции сразу (удобно для проверки законов кольца)"""
    return {
        "add": p + q,
        "sub": p - q,
        "mul": p * q,
        "neg": -p,
        "equal": p == q,
    }


# --- определители ------------------------------------------------------------

def _accessor(M) -> Callable[[Any, Any], Any]:
    if callable(M):
        return M
    return lambda r, c: M[r][c]


def _square(A: List[List[Any]]) -> int:
    n = len(A)
    if any(len(row) != n for row in A):
        raise NonSquareMatrix("Матрица не квадратная")
    return n


def _is_rational(x: Any) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _polynomial_rows(A: List[List[Any]]):
    """Общая таблица, общее кольцо и строки как элементы этого кольца"""
    table = None
    for row in A:
        for x in row:
            if isinstance(x, MultiPolynomial):
                table = _merge_tables(table, x.table)
    polys = [[x if isinstance(x, MultiPolynomial) else MultiPolynomial.constant(x, table) for x in row] for row in A]
    names = set()
    for row in polys:
        for p in row:
            names |= p.variables()
    R = _home_ring(table, names)
    return table, R, [[p.to_ring(R) for p in row] for row in polys]


def _det_fraction_free(A: List[List[Any]], one: Any):
    """Bareiss для элементов поля без представления в sympy (FieldElement над Q(α))"""
    n = len(A)
    A = [list(row) for row in A]
    negate = False
    prev = one
    for k in range(n - 1):
        if A[k][k] == 0:
            pivot = next((p for p in range(k + 1, n) if A[p][k] != 0), None)
            if pivot is None:
                return A[k][k] * 0
            A[k], A[pivot] = A[pivot], A[k]
            negate = not negate
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) / prev
        prev = A[k][k]
    result = A[n - 1][n - 1]
    return -result if negate else result


def det_bareiss(A: List[List[Any]], one: Any = None):
    """Определитель без дробей (Bareiss): DomainMatrix над Q или над кольцом многочленов"""
    n = _square(A)
    if n == 0:
        return one if one is not None else Fraction(1)
    entries = [x for row in A for x in row]
    if any(isinstance(x, MultiPolynomial) for x in entries):
        table, R, rows = _polynomial_rows(A)
        value = DomainMatrix(rows, (n, n), R.to_domain()).det()
        return MultiPolynomial.from_element(value, table)
    if all(_is_rational(x) for x in entries):
        rows = [[_to_qq(to_rat(x)) for x in row] for row in A]
        return _from_qq(DomainMatrix(rows, (n, n), QQ).det())
    return _det_fraction_free(A, one if one is not None else Fraction(1))


def det_laplace(A: List[List[Any]], one: Any = None):
    """Разложение по строке (Matrix.det из sympy, method='laplace')"""
    n = _square(A)
    if n == 0:
        return one if one is not None else Fraction(1)
    entries = [x for row in A for x in row]
    if any(isinstance(x, MultiPolynomial) for x in entries):
        table, R, rows = _polynomial_rows(A)
        value = Matrix(n, n, [p.as_expr() for row in rows for p in row]).det(method="laplace")
        return MultiPolynomial.from_expr(value, table)
    if not all(_is_rational(x) for x in entries):
        raise DataFormatError("Разложение по строке: ожидались рациональные или многочлены")
    values = [Rational(to_rat(x).numerator, to_rat(x).denominator) for x in entries]
    value = Matrix(n, n, values).det(method="laplace")
    return Fraction(int(value.p), int(value.q))


def determinant(M, rows: Sequence[Any], cols: Sequence[Any], method: str = "auto") -> MultiPolynomial:
    """Определитель подматрицы; на позиции k строка rows[k] спарена со столбцом cols[k]"""
    if len(rows) != len(cols):
        raise NonSquareMatrix(f"Строк {len(rows)}, столбцов {len(cols)}")
    get = _accessor(M)
    A = [[get(r, c) for c in cols] for r in rows]
    if method == "auto":
        method = "bareiss"
    if method not in ("bareiss", "laplace"):
        raise DataFormatError(f"Неизвестный метод: {method}")
    table = next((x.table for row in A for x in row if isinstance(x, MultiPolynomial)), None)
    polys = [[x if isinstance(x, MultiPolynomial) else MultiPolynomial.constant(x, table) for x in row] for row in A]
    compute = det_bareiss if method == "bareiss" else det_laplace
    return compute(polys, MultiPolynomial.one(table))
