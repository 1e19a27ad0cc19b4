from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import sympy as sp

from ci_core import CIStatement, InferenceFormula
from config import CoefficientDomain
from errors import DataFormatError, FieldMismatch, ZeroDivisionInField
from logger import logger
from minors import GroundSet, RationalCovariance, almost_principal_minor, principal_minor
from polynomial import format_rat, to_rat

_X = sp.Symbol("x")


def _to_sympy(c: Fraction) -> sp.Rational:
    return sp.Rational(c.numerator, c.denominator)


def _from_sympy(r) -> Fraction:
    r = sp.Rational(r)
    return Fraction(int(r.p), int(r.q))


def _poly(coeffs: Sequence[Fraction]) -> sp.Poly:
    """Коэффициенты c0, c1, … → sympy.Poly над QQ"""
    return sp.Poly([_to_sympy(c) for c in reversed(coeffs)] or [0], _X, domain=sp.QQ)


def _coeffs(poly: sp.Poly, length: int) -> Tuple[Fraction, ...]:
    values = [_from_sympy(c) for c in reversed(poly.all_coeffs())]
    values = values + [Fraction(0)] * (length - len(values))
    return tuple(values[:length])


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _eval(poly: sp.Poly, point: Fraction) -> Fraction:
    return _from_sympy(poly.eval(_to_sympy(point)))


def _variations(chain: Sequence[sp.Poly], point: Fraction) -> int:
    signs = [s for s in (_sign(_eval(p, point)) for p in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


class AlgebraicReal:
    """Вещественный корень целочисленного многочлена с изолирующим интервалом"""

    def __init__(self, minpoly: Sequence[Any], interval: Tuple[Any, Any]):
        coeffs = [to_rat(c) for c in minpoly]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) < 2:
            raise DataFormatError("Минимальный многочлен должен иметь степень ≥ 1")
        if any(c.denominator != 1 for c in coeffs):
            raise DataFormatError("Коэффициенты минимального многочлена должны быть целыми")
        self.coeffs = tuple(coeffs)
        self.poly = _poly(self.coeffs)
        lo, hi = (to_rat(v) for v in interval)
        if lo > hi:
            raise DataFormatError(f"Пустой интервал ({lo}, {hi})")
        if not self.poly.is_sqf:
            raise DataFormatError("Минимальный многочлен не свободен от квадратов")
        self.lo, self.hi = lo, hi
        self._sturm = None
        if lo == hi:
            if _eval(self.poly, lo) != 0:
                raise DataFormatError(f"{lo} не является корнем минимального многочлена")
        elif _eval(self.poly, lo) == 0 or _eval(self.poly, hi) == 0 or self.count_roots(lo, hi) != 1:
            raise DataFormatError(f"Интервал ({lo}, {hi}) не изолирует ровно один корень")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def sturm(self) -> List[sp.Poly]:
        if self._sturm is None:
            self._sturm = sp.sturm(self.poly)
        return self._sturm

    def count_roots(self, lo: Fraction, hi: Fraction) -> int:
        """Число корней в (lo, hi] по теореме Штурма"""
        return _variations(self.sturm, lo) - _variations(self.sturm, hi)

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def refine(self) -> "AlgebraicReal":
        """Новый объект с интервалом вдвое уже"""
        if self.is_exact:
            return self
        mid = (self.lo + self.hi) / 2
        if _eval(self.poly, mid) == 0:
            return self._narrowed(mid, mid)
        if self.count_roots(self.lo, mid) == 1:
            return self._narrowed(self.lo, mid)
        return self._narrowed(mid, self.hi)

    def _narrowed(self, lo: Fraction, hi: Fraction) -> "AlgebraicReal":
        other = AlgebraicReal.__new__(AlgebraicReal)
        other.coeffs, other.poly, other._sturm = self.coeffs, self.poly, self._sturm
        other.lo, other.hi = lo, hi
        return other

    def to_interval(self) -> Tuple[Fraction, Fraction]:
        return (self.lo, self.hi)

    def same_as(self, other: "AlgebraicReal") -> bool:
        """Тот же корень того же многочлена"""
        if self is other:
            return True
        if self.coeffs != other.coeffs:
            return False
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return False
        if lo == hi:
            return _eval(self.poly, lo) == 0
        return _eval(self.poly, hi) == 0 or self.count_roots(lo, hi) >= 1

    def __repr__(self) -> str:
        return f"AlgebraicReal(minpoly={[format_rat(c) for c in self.coeffs]}, interval=({self.lo}, {self.hi}))"


# Q как поле степени 1: α = 0 как корень x, интервал (−1, 1)
RATIONALS = AlgebraicReal([0, 1], (-1, 1))


def _interval_eval(coeffs: Sequence[Fraction], lo: Fraction, hi: Fraction) -> Tuple[Fraction, Fraction]:
    """Схема Горнера в интервальной арифметике"""
    rlo = rhi = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        products = (rlo * lo, rlo * hi, rhi * lo, rhi * hi)
        rlo, rhi = min(products) + c, max(products) + c
    return rlo, rhi


class FieldElement:
    """Элемент Q(α) как остаток по модулю минимального многочлена"""

    __slots__ = ("coeffs", "alpha")

    def __init__(self, coeffs: Sequence[Any], alpha: AlgebraicReal):
        values = [to_rat(c) for c in coeffs]
        if len(values) > alpha.degree:
            reduced = _poly(values).rem(alpha.poly)
            values = list(_coeffs(reduced, alpha.degree))
        values = values + [Fraction(0)] * (alpha.degree - len(values))
        self.coeffs = tuple(values)
        self.alpha = alpha

    @classmethod
    def from_rational(cls, value: Any, alpha: AlgebraicReal = RATIONALS) -> "FieldElement":
        return cls([to_rat(value)], alpha)

    def _coerce(self, other) -> Optional["FieldElement"]:
        if isinstance(other, FieldElement):
            if not self.alpha.same_as(other.alpha):
                raise FieldMismatch("Элементы из разных полей Q(α)")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return FieldElement.from_rational(other, self.alpha)
        return None

    def _sympy(self) -> sp.Poly:
        return _poly(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FieldElement([a + b for a, b in zip(self.coeffs, other.coeffs)], self.alpha)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement([-a for a in self.coeffs], self.alpha)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return FieldElement([a * other for a in self.coeffs], self.alpha)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.alpha.degree == 1:
            return FieldElement([self.coeffs[0] * other.coeffs[0]], self.alpha)
        product = (self._sympy() * other._sympy()).rem(self.alpha.poly)
        return FieldElement(_coeffs(product, self.alpha.degree), self.alpha)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        """Обратный элемент (расширенный алгоритм Евклида по модулю m)"""
        if self.is_zero():
            raise ZeroDivisionInField("Обращение нуля в Q(α)")
        if self.alpha.degree == 1:
            return FieldElement([1 / self.coeffs[0]], self.alpha)
        try:
            inv = sp.invert(self._sympy(), self.alpha.poly)
        except sp.polys.polyerrors.NotInvertible:
            raise ZeroDivisionInField("Элемент необратим: минимальный многочлен приводим")
        return FieldElement(_coeffs(sp.Poly(inv, _X, domain=sp.QQ), self.alpha.degree), self.alpha)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = FieldElement.from_rational(1, self.alpha)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other) -> bool:
        try:
            other = self._coerce(other)
        except FieldMismatch:
            return False
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def sign(self) -> int:
        return sign_of(self)

    def evaluate_interval(self) -> Tuple[Fraction, Fraction]:
        return _interval_eval(self.coeffs, self.alpha.lo, self.alpha.hi)

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                parts.append(format_rat(c))
            else:
                power = "a" if k == 1 else f"a^{k}"
                parts.append(power if c == 1 else f"{format_rat(c)}*{power}")
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"

    def __repr__(self) -> str:
        return f"FieldElement({self})"


def field_ops(a: FieldElement, b: FieldElement) -> Dict[str, FieldElement]:
    """Сложение, вычитание, умножение, обращение (b ≠ 0)"""
    return {"add": a + b, "sub": a - b, "mul": a * b, "inverse": b.inverse()}


def sign_of(a: FieldElement, max_steps: int = 10000) -> int:
    """Точный знак a(α)"""
    if a.is_zero():
        return 0
    if not any(a.coeffs[1:]):
        return _sign(a.coeffs[0])
    alpha = a.alpha
    if alpha.is_exact:
        return _sign(_eval(a._sympy(), alpha.lo))
    g = sp.gcd(a._sympy(), alpha.poly)
    if g.degree() >= 1:
        # m приводим: a(α) = 0 ровно тогда, когда α является корнем общего делителя
        chain = sp.sturm(g)
        if _variations(chain, alpha.lo) - _variations(chain, alpha.hi) >= 1:
            return 0
    current = alpha
    for _ in range(max_steps):
        lo, hi = _interval_eval(a.coeffs, current.lo, current.hi)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        current = current.refine()
        if current.is_exact:
            return _sign(_eval(a._sympy(), current.lo))
    raise ArithmeticError("Не удалось определить знак за отведённое число шагов")


class FieldCovariance:
    """Симметрическая матрица над Q(α)"""

    domain = CoefficientDomain.FIELD

    def __init__(self, ground_set: GroundSet, alpha: AlgebraicReal, entries: Dict[Tuple[str, str], FieldElement]):
        self.ground_set = ground_set
        self.alpha = alpha
        self._entries = entries
        for value in entries.values():
            if not value.alpha.same_as(alpha):
                raise FieldMismatch("Элементы матрицы используют разные α")

    @classmethod
    def from_rows(cls, ground_set: GroundSet, alpha: AlgebraicReal,
                  rows: Sequence[Sequence[Sequence[Any]]]) -> "FieldCovariance":
        n = ground_set.n
        if len(rows) != n or any(len(row) != n for row in rows):
            raise DataFormatError(f"Ожидалась матрица {n}x{n}")
        values = [[FieldElement(coeffs, alpha) for coeffs in row] for row in rows]
        entries = {}
        for r, a in enumerate(ground_set.labels):
            for c, b in enumerate(ground_set.labels):
                if values[r][c] != values[c][r]:
                    raise DataFormatError(f"Матрица не симметрична в ({a},{b})")
                entries[(a, b)] = values[r][c]
        return cls(ground_set, alpha, entries)

    def entry(self, a: str, b: str) -> FieldElement:
        try:
            return self._entries[(a, b)]
        except KeyError:
            raise DataFormatError(f"Метки ({a},{b}) вне множества {list(self.ground_set.labels)}")

    def one(self) -> FieldElement:
        return FieldElement.from_rational(1, self.alpha)


def as_field_covariance(sigma) -> FieldCovariance:
    """Рациональная матрица: частный случай deg(m) = 1"""
    if isinstance(sigma, FieldCovariance):
        return sigma
    if isinstance(sigma, RationalCovariance):
        gs = sigma.ground_set
        entries = {(a, b): FieldElement.from_rational(sigma.entry(a, b)) for a in gs for b in gs}
        return FieldCovariance(gs, RATIONALS, entries)
    raise DataFormatError(f"Ожидалась точная матрица, получено {type(sigma).__name__}")


# --- проверка контрпримеров ------------------------------------------------------------

@dataclass
class MinorValue:
    label: str
    value: str
    sign: int


@dataclass
class CounterexampleReport:
    """Отчёт точной проверки контрпримера"""
    formula: str
    positive_definite: bool
    principally_regular: bool
    principal_minors: List[MinorValue] = field(default_factory=list)
    antecedents: List[MinorValue] = field(default_factory=list)
    consequents: List[MinorValue] = field(default_factory=list)
    reasons: List[str] = field(default_factory=list)

    @property
    def antecedents_vanish(self) -> bool:
        return all(m.sign == 0 for m in self.antecedents)

    @property
    def consequents_nonzero(self) -> bool:
        return all(m.sign != 0 for m in self.consequents)

    @property
    def confirmed(self) -> bool:
        """Гауссовский контрпример: PD, посылки = 0, следствия ≠ 0"""
        return self.positive_definite and self.antecedents_vanish and self.consequents_nonzero

    @property
    def confirmed_principally_regular(self) -> bool:
        """Контрпример при ослаблении PD до главной регулярности"""
        return self.principally_regular and self.antecedents_vanish and self.consequents_nonzero


def _principal_values(sigma: FieldCovariance) -> List[MinorValue]:
    values = []
    for K in sigma.ground_set.subsets(min_size=1):
        v = principal_minor(K, sigma)
        values.append(MinorValue(f"[{''.join(K)}]", str(v), sign_of(v)))
    return values


def is_principally_regular(sigma) -> bool:
    """Все главные миноры (K ≠ ∅) ненулевые"""
    sigma = as_field_covariance(sigma)
    return all(m.sign != 0 for m in _principal_values(sigma))


def _statement_value(sigma: FieldCovariance, s: CIStatement) -> MinorValue:
    v = almost_principal_minor(s.i, s.j, s.K, sigma)
    return MinorValue(str(s), str(v), sign_of(v))


def verify_counterexample(sigma, formula: InferenceFormula) -> CounterexampleReport:
    """Точная проверка контрпримера над Q(α)"""
    sigma = as_field_covariance(sigma)
    if sigma.ground_set != formula.ground_set:
        raise DataFormatError(
            f"Множества меток не совпадают: {list(sigma.ground_set.labels)} и {list(formula.ground_set.labels)}")
    minors = _principal_values(sigma)
    report = CounterexampleReport(
        formula=str(formula),
        positive_definite=all(m.sign > 0 for m in minors),
        principally_regular=all(m.sign != 0 for m in minors),
        principal_minors=minors,
        antecedents=[_statement_value(sigma, s) for s in formula.antecedents],
        consequents=[_statement_value(sigma, s) for s in formula.consequents],
    )
    if not report.positive_definite:
        bad = next(m for m in minors if m.sign <= 0)
        report.reasons.append(f"not positive definite: {bad.label} = {bad.value}")
    for m in report.antecedents:
        if m.sign != 0:
            report.reasons.append(f"antecedent {m.label} does not vanish: {m.value}")
    for m in report.consequents:
        if m.sign == 0:
            report.reasons.append(f"consequent {m.label} holds")
    logger.info(f"Проверка контрпримера для {formula}: {'✅' if report.confirmed else '❌'}")
    return report
