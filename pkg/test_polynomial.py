from fractions import Fraction
from random import Random

import pytest
from sympy import Symbol
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement

from errors import DataFormatError, MissingAssignment, NonSquareMatrix, VariableTableMismatch
from polynomial import (MonomialOrder, MultiPolynomial, VarKind, VariableTable, det_bareiss, det_laplace,
                        determinant, ring_ops, to_rat, var_kind)


def x(name):
    return MultiPolynomial.variable(name)


def random_poly(rnd: Random, names, terms=4, degree=3):
    result = MultiPolynomial.zero()
    for _ in range(terms):
        coeff = Fraction(rnd.randint(-5, 5), rnd.randint(1, 4))
        mono = {}
        for _ in range(rnd.randint(0, degree)):
            var = rnd.choice(names)
            mono[var] = mono.get(var, 0) + 1
        result = result + MultiPolynomial.monomial(mono, coeff)
    return result


def test_cancellation_gives_structural_zero():
    p = x("s_i_j") * x("s_k_k") - x("s_i_k") * x("s_j_k")
    assert (p - p).is_zero()
    assert len(p - p) == 0


def test_rational_coefficients_are_exact():
    half = MultiPolynomial.constant(Fraction(1, 2))
    third = MultiPolynomial.constant(Fraction(1, 3))
    assert (half + third).constant_value() == Fraction(5, 6)
    assert (half * third) == Fraction(1, 6)


def test_to_rat_rejects_floats_and_garbage():
    assert to_rat("3/4") == Fraction(3, 4)
    assert to_rat(-2) == Fraction(-2)
    with pytest.raises(DataFormatError):
        to_rat(0.5)
    with pytest.raises(DataFormatError):
        to_rat("abc")


@pytest.mark.parametrize("seed", range(20))
def test_ring_laws(seed):
    rnd = Random(seed)
    names = ["s_i_i", "s_i_j", "s_j_j", "t"]
    p, q, r = (random_poly(rnd, names) for _ in range(3))
    assert (p + q) == (q + p)
    assert (p * q) == (q * p)
    assert ((p * q) * r) == (p * (q * r))
    assert (p * (q + r)) == (p * q + p * r)
    assert (p - p).is_zero()
    ops = ring_ops(p, q)
    assert ops["add"] + ops["neg"] == q
    assert ops["equal"] is (p == q)


@pytest.mark.parametrize("seed", range(10))
def test_evaluation_is_a_homomorphism(seed):
    rnd = Random(seed)
    names = ["a", "b", "c"]
    p, q = random_poly(rnd, names), random_poly(rnd, names)
    point = {n: Fraction(rnd.randint(-6, 6), rnd.randint(1, 5)) for n in names}
    assert (p * q).evaluate(point) == p.evaluate(point) * q.evaluate(point)
    assert (p + q).evaluate(point) == p.evaluate(point) + q.evaluate(point)


def test_evaluate_missing_variable():
    with pytest.raises(MissingAssignment):
        (x("a") * x("b")).evaluate({"a": 1})


def test_variable_kinds():
    assert var_kind("s_i_j") == VarKind.SIGMA
    assert var_kind("p_ij") == VarKind.PRINCIPAL
    assert var_kind("a_i_j_k") == VarKind.APM
    assert var_kind("pt_a_1") == VarKind.POINT
    assert var_kind("h1") == VarKind.AUXILIARY


def test_mixing_tables_is_an_error():
    t1 = VariableTable(["s_i_i"])
    t2 = VariableTable(["s_j_j"])
    with pytest.raises(VariableTableMismatch):
        MultiPolynomial.variable("s_i_i", t1) + MultiPolynomial.variable("s_j_j", t2)
    with pytest.raises(VariableTableMismatch):
        MultiPolynomial.variable("zzz", t1)


def test_canonical_printing():
    table = VariableTable(["s_i_i", "s_i_j", "s_i_k", "s_j_j", "s_j_k", "s_k_k"])
    s = {n: MultiPolynomial.variable(n, table) for n in table.names}
    p = s["s_i_j"] * s["s_k_k"] - s["s_i_k"] * s["s_j_k"]
    assert str(p) == "s_i_j*s_k_k - s_i_k*s_j_k"
    assert str(MultiPolynomial.zero()) == "0"
    assert str(x("a") ** 2 * Fraction(-1, 2)) == "-1/2*a^2"


def test_orders():
    order = MonomialOrder("degrevlex", ["a", "b", "c"])
    ab = (("a", 1), ("b", 1))
    c2 = (("c", 2),)
    a = (("a", 1),)
    assert order.key(ab) > order.key(c2)
    assert order.key(c2) > order.key(a)
    with pytest.raises(DataFormatError):
        MonomialOrder("weird")


def test_determinants_agree():
    A = [[Fraction(2), Fraction(1), Fraction(0)],
         [Fraction(1), Fraction(3), Fraction(1)],
         [Fraction(0), Fraction(1), Fraction(4)]]
    assert det_bareiss(A) == det_laplace(A) == Fraction(18)
    assert det_bareiss([]) == 1
    # нулевой ведущий элемент требует перестановки строк
    B = [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]
    assert det_bareiss(B) == -1


def test_symbolic_determinant_and_non_square():
    M = {"r1": {"c1": x("a"), "c2": x("b")}, "r2": {"c1": x("c"), "c2": x("d")}}
    d = determinant(M, ["r1", "r2"], ["c1", "c2"])
    assert d == x("a") * x("d") - x("b") * x("c")
    with pytest.raises(NonSquareMatrix):
        determinant(M, ["r1"], ["c1", "c2"])


def test_backed_by_sympy_ring():
    table = VariableTable(["s_i_i", "s_i_j", "s_j_j"])
    p = MultiPolynomial.variable("s_i_i", table) * MultiPolynomial.variable("s_j_j", table) - 1
    assert isinstance(p.poly, PolyElement)
    assert p.poly.ring.domain == QQ
    assert [s.name for s in p.poly.ring.symbols] == list(table.names)
    assert p.to_expr() == Symbol("s_i_i") * Symbol("s_j_j") - 1
    assert MultiPolynomial.from_expr(p.to_expr(), table) == p


def test_symbolic_bareiss_matches_laplace():
    names = "abcdefghi"
    A = [[x(names[3 * r + c]) for c in range(3)] for r in range(3)]
    d = det_bareiss(A)
    assert d == det_laplace(A)
    assert len(d) == 6
    M = {r: {c: A[r][c] for c in range(3)} for r in range(3)}
    assert determinant(M, [0, 1, 2], [0, 1, 2], method="laplace") == d
    assert determinant(M, [1, 0, 2], [0, 1, 2]) == -d
