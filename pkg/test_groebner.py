from fractions import Fraction
from random import Random

import pytest

from groebner import (INDETERMINATE, MEMBER, NOT_MEMBER, GroebnerBudget, buchberger, ideal_membership, is_groebner,
                      normal_form)
from minors import GroundSet, SymbolicCovariance, almost_principal_minor, principal_minor
from polynomial import MonomialOrder, MultiPolynomial


def x(name):
    return MultiPolynomial.variable(name)


def sigma_vars(labels):
    gs = GroundSet.of(labels)
    S = SymbolicCovariance(gs)
    return gs, S


def test_weak_transitivity_ideal_membership():
    gs, S = sigma_vars("ijk")
    gens = [almost_principal_minor("i", "j", [], S), almost_principal_minor("i", "j", ["k"], S)]
    target = S.entry("i", "k") * S.entry("j", "k")
    result = ideal_membership(target, gens)
    assert result.status == MEMBER
    assert result.certificate.verify()
    assert result.certificate.residual().is_zero()

    assert ideal_membership(S.entry("i", "k"), gens).status == NOT_MEMBER


def test_four_variable_rule_ideal_membership():
    gs, S = sigma_vars("ijkl")
    s = S.entry
    A1 = almost_principal_minor("i", "j", ["k"], S)
    A2 = almost_principal_minor("i", "k", ["l"], S)
    A3 = almost_principal_minor("i", "l", ["j"], S)
    D = s("j", "j") * s("k", "k") * s("l", "l")
    P = s("j", "k") * s("k", "l") * s("j", "l")
    target = s("i", "j") * (D - P)
    # явная комбинация
    assert target == s("j", "j") * s("l", "l") * A1 + s("j", "j") * s("j", "k") * A2 + s("j", "k") * s("k", "l") * A3
    result = ideal_membership(target, [A1, A2, A3])
    assert result.is_member
    assert result.certificate.verify()
    assert ideal_membership(s("i", "j"), [A1, A2, A3]).status == NOT_MEMBER


def test_basis_is_groebner_and_cofactors_check():
    gs, S = sigma_vars("ijkl")
    gens = [almost_principal_minor("i", "j", ["k"], S), almost_principal_minor("i", "k", ["l"], S)]
    basis = buchberger(gens)
    assert is_groebner(basis)
    assert basis.verify_cofactors()
    for g in basis.generators:
        remainder, _ = normal_form(g, basis)
        assert remainder.is_zero()


def test_textbook_example_lex():
    order = MonomialOrder("lex", ["x", "y"])
    gens = [x("x") ** 2 - x("y"), x("x") * x("y") - 1]
    basis = buchberger(gens, order)
    assert is_groebner(basis)
    # y³ − 1 = y·(y² − x) + (xy − 1)
    result = ideal_membership(x("y") ** 3 - 1, gens, order)
    assert result.is_member


def test_zero_target_is_trivially_member():
    result = ideal_membership(MultiPolynomial.zero(), [x("a")])
    assert result.status == MEMBER
    assert result.certificate.cofactors[0].is_zero()


def test_budget_gives_indeterminate():
    gens = [x("x") ** 2 - x("y"), x("x") * x("y") - 1]
    result = ideal_membership(x("y") ** 3 - 1, gens, budget=GroebnerBudget(max_basis=64, max_pairs=0))
    assert result.status == INDETERMINATE
    assert result.certificate is None


def test_final_polynomial_factor_lies_in_ideal():
    gs, S = sigma_vars("ijkl")
    s = S.entry

    def pm(*K):
        return principal_minor(K, S)

    gens = [almost_principal_minor("i", "j", ["k"], S), almost_principal_minor("i", "k", ["l"], S),
            almost_principal_minor("i", "l", ["j"], S)]
    D = s("j", "j") * s("k", "k") * s("l", "l")
    P = s("j", "k") * s("k", "l") * s("j", "l")
    Q = (pm("j", "k") * s("j", "l") ** 2 * s("k", "l") ** 2
         + pm("j") * pm("k") ** 2 * pm("l") * pm("j", "l")
         + pm("j") * pm("k") * pm("k", "l") * s("j", "l") ** 2)
    assert Q == D ** 2 - P ** 2
    result = ideal_membership(s("i", "j") * Q, gens)
    assert result.status == MEMBER
    assert result.certificate.verify()
    assert ideal_membership(Q, gens).status == NOT_MEMBER


def random_poly(rnd: Random, names, terms=5, degree=3):
    result = MultiPolynomial.zero()
    for _ in range(terms):
        mono = {}
        for _ in range(rnd.randint(0, degree)):
            var = rnd.choice(names)
            mono[var] = mono.get(var, 0) + 1
        result = result + MultiPolynomial.monomial(mono, Fraction(rnd.randint(-4, 4), rnd.randint(1, 3)))
    return result


@pytest.mark.parametrize("seed", range(10))
def test_normal_form_ignores_generator_order(seed):
    rnd = Random(seed)
    gs, S = sigma_vars("ijk")
    gens = [almost_principal_minor("i", "j", [], S), almost_principal_minor("i", "j", ["k"], S),
            almost_principal_minor("i", "k", ["j"], S)]
    shuffled = list(gens)
    rnd.shuffle(shuffled)
    a, b = buchberger(gens), buchberger(shuffled)
    names = sorted(set().union(*(g.variables() for g in gens)))
    for _ in range(3):
        f = random_poly(rnd, names)
        assert normal_form(f, a)[0] == normal_form(f, b)[0]


@pytest.mark.parametrize("seed", range(10))
def test_normal_form_is_linear(seed):
    rnd = Random(seed)
    order = MonomialOrder("grlex", ["x", "y", "z"])
    basis = buchberger([x("x") ** 2 - x("y") * x("z"), x("x") * x("y") - 1, x("y") ** 2 - x("z")], order)
    f, g = random_poly(rnd, ["x", "y", "z"]), random_poly(rnd, ["x", "y", "z"])
    c = Fraction(rnd.randint(-5, 5), rnd.randint(1, 5))
    lhs, _ = normal_form(f * c + g, basis)
    nf, ng = normal_form(f, basis)[0], normal_form(g, basis)[0]
    assert lhs == nf * c + ng
