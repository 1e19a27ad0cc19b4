from fractions import Fraction
from random import Random

import pytest

from axioms import BUILTIN_RULES
from ci_core import (CIModelSpec, CIStatement, CIStructure, Classification, all_statements, apply_permutation,
                     ci_holds, classify_against_formula, conditional, is_positive_definite, marginal, parse_formula,
                     structure_contract, structure_delete, structure_of)
from errors import DataFormatError, FormulaSyntaxError, NotPositiveDefinite, StatementError
from minors import GroundSet, RationalCovariance

IJK = GroundSet.of("ijk")
IJKL = GroundSet.of("ijkl")

WEAK_TRANSITIVITY = "[i,j|] & [i,j|k] => [i,k|] | [j,k|]"
LM20 = "[i,j|k] & [i,k|l] & [i,l|j] => [i,j|]"


def witness_1():
    return RationalCovariance.from_rows(IJK, [[1, 0, "1/2"], [0, 1, "1/2"], ["1/2", "1/2", 1]])


def witness_2():
    return RationalCovariance.from_rows(IJK, [[1, "1/4", "1/2"], ["1/4", 1, "1/2"], ["1/2", "1/2", 1]])


def regular_not_pd_matrix():
    return RationalCovariance.from_rows(IJKL, [
        [1, 4, -2, -8], [4, 1, -2, -2], [-2, -2, 1, "1/4"], [-8, -2, "1/4", 1]])


def sparse_pd(rnd: Random, gs: GroundSet) -> RationalCovariance:
    """Σ = AAᵀ + I с разреженной A: много точных нулей, значит много CI-утверждений"""
    n = gs.n
    A = [[rnd.choice([0, 0, 0, 1, -1, 2]) for _ in range(n)] for _ in range(n)]
    rows = [[sum(A[r][t] * A[c][t] for t in range(n)) + (1 if r == c else 0) for c in range(n)]
            for r in range(n)]
    return RationalCovariance.from_rows(gs, rows)


# --- разбор -----------------------------------------------------------------------

def test_parse_weak_transitivity():
    phi = parse_formula(WEAK_TRANSITIVITY)
    assert phi.ground_set == IJK
    assert phi.antecedents == (CIStatement("i", "j", ()), CIStatement("i", "j", ("k",)))
    assert phi.consequents == (CIStatement("i", "k", ()), CIStatement("j", "k", ()))
    assert str(phi) == WEAK_TRANSITIVITY


def test_parse_normalizes_pairs_and_conditioning_sets():
    phi = parse_formula("[j,i|l,k] => [k,i|]", IJKL)
    assert phi.antecedents == (CIStatement("i", "j", ("k", "l")),)
    assert phi.consequents == (CIStatement("i", "k", ()),)


def test_parse_semigraphoid_with_multichar_labels():
    phi = parse_formula("[A,C|B] & [A,B|] => [A,C|]")
    assert phi.ground_set.labels == ("A", "B", "C")
    assert len(phi.antecedents) == 2


@pytest.mark.parametrize("text,error", [
    ("[i,i|k] => [i,i|]", StatementError),
    ("[i,j|i] => [i,k|]", StatementError),
    ("[i,j|k] [i,k|]", FormulaSyntaxError),
    ("[i,j|k] => ", FormulaSyntaxError),
    ("[i,j|k => [i,k|]", FormulaSyntaxError),
    ("[i,j|k] => [i,k|] extra", FormulaSyntaxError),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_formula(text)


def test_parse_error_reports_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("[i,j|k] & => [i,k|]")
    assert info.value.position == 10


def test_model_spec_rejects_clash():
    s = CIStatement.of("i", "j", [], IJK)
    with pytest.raises(DataFormatError):
        CIModelSpec(IJK, (s,), (s,))


def test_model_spec_from_formula():
    spec = CIModelSpec.from_formula(parse_formula(WEAK_TRANSITIVITY))
    assert len(spec.independences) == 2
    assert len(spec.dependences) == 2


# --- положительная определённость и CI ----------------------------------------------

def test_positive_definiteness():
    assert is_positive_definite(RationalCovariance.identity(IJKL))
    assert not is_positive_definite(regular_not_pd_matrix())
    assert is_positive_definite(witness_2())
    assert is_positive_definite(witness_1())


def test_ci_holds_examples():
    identity = RationalCovariance.identity(IJKL)
    assert all(ci_holds(identity, s) for s in all_statements(IJKL))

    P = regular_not_pd_matrix()
    for text in ("[i,j|k]", "[i,k|l]", "[i,l|j]"):
        s = parse_formula(f"{text} => [i,j|]", IJKL).antecedents[0]
        assert ci_holds(P, s)
    assert not ci_holds(P, CIStatement.of("i", "j", [], IJKL))

    W = witness_1()
    assert ci_holds(W, CIStatement.of("i", "j", [], IJK))
    assert not ci_holds(W, CIStatement.of("i", "j", ["k"], IJK))


def test_classification():
    wt = parse_formula(WEAK_TRANSITIVITY)
    assert classify_against_formula(RationalCovariance.identity(IJK), wt) == Classification.WITNESSES_CONCLUSION
    assert classify_against_formula(witness_1(), wt) == Classification.NOT_APPLICABLE

    implication1 = parse_formula("[i,j|] => [i,j|k]")
    assert classify_against_formula(witness_1(), implication1) == Classification.COUNTEREXAMPLE
    implication2 = parse_formula("[i,j|k] => [i,j|]")
    assert classify_against_formula(witness_2(), implication2) == Classification.COUNTEREXAMPLE

    with pytest.raises(NotPositiveDefinite):
        classify_against_formula(regular_not_pd_matrix(), parse_formula(LM20))


def test_classification_requires_same_ground_set():
    with pytest.raises(StatementError):
        classify_against_formula(RationalCovariance.identity(IJKL), parse_formula(WEAK_TRANSITIVITY))


def test_structure_of_identity_and_generic():
    assert len(structure_of(RationalCovariance.identity(IJKL))) == 24
    generic = RationalCovariance.from_rows(IJK, [[3, 1, 1], [1, 3, 1], [1, 1, 3]])
    assert len(structure_of(generic)) == 0


# --- перестановки и миноры структур ------------------------------------------------------

def test_permutations():
    s = CIStatement.of("i", "k", ["j"], IJK)
    swap = {"i": "j", "j": "i", "k": "k"}
    assert apply_permutation(s, swap, IJK) == CIStatement.of("j", "k", ["i"], IJK)
    wt = parse_formula(WEAK_TRANSITIVITY)
    assert apply_permutation(wt, {x: x for x in "ijk"}) == wt
    with pytest.raises(DataFormatError):
        apply_permutation(wt, {"i": "j", "j": "j", "k": "k"})


def test_full_independence_survives_minors():
    full = CIStructure(IJKL, frozenset(all_statements(IJKL)))
    rest = GroundSet.of("ijk")
    assert structure_delete(full, "l").statements == frozenset(all_statements(rest))
    assert structure_contract(full, "l").statements == frozenset(all_statements(rest))


@pytest.mark.parametrize("seed", range(15))
def test_structure_minors_match_matrix_operations(seed):
    rnd = Random(seed)
    sigma = sparse_pd(rnd, IJKL)
    G = structure_of(sigma)
    rest = ["i", "j", "k"]
    assert structure_of(marginal(sigma, rest)) == structure_delete(G, "l")
    assert structure_of(conditional(sigma, "l")) == structure_contract(G, "l")


def test_conditional_is_schur_complement():
    sigma = witness_1()
    cond = conditional(sigma, "k")
    assert cond.entry("i", "j") == Fraction(-1, 4)
    assert cond.entry("i", "i") == Fraction(3, 4)


# --- корректность встроенных правил на случайных матрицах -------------------------------------

def _soundness(trials: int, seed: int):
    rnd = Random(seed)
    for trial in range(trials):
        gs = IJK if trial % 2 else IJKL
        sigma = sparse_pd(rnd, gs)
        assert is_positive_definite(sigma)
        for rule in BUILTIN_RULES:
            for inst in rule.instances(gs):
                phi = parse_formula(f"{' & '.join(map(str, inst.antecedents))} => "
                                    f"{' | '.join(map(str, inst.consequents))}", gs)
                assert classify_against_formula(sigma, phi) != Classification.COUNTEREXAMPLE, (inst, sigma.rows())


def test_builtin_rules_are_sound():
    _soundness(40, seed=7)


@pytest.mark.slow
def test_builtin_rules_are_sound_long():
    _soundness(1000, seed=2024)


@pytest.mark.parametrize("seed", range(15))
def test_structure_commutes_with_relabeling(seed):
    rnd = Random(seed)
    gs = IJKL if seed % 2 else IJK
    sigma = sparse_pd(rnd, gs)
    images = list(gs.labels)
    rnd.shuffle(images)
    pi = dict(zip(gs.labels, images))
    assert structure_of(sigma.permute(pi)) == apply_permutation(structure_of(sigma), pi)
