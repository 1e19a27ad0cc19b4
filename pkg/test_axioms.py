import json
from random import Random

import pytest

from axioms import (BUILTIN_RULES, SEMIGRAPHOID_HALF, WEAK_TRANSITIVITY_GENERAL, InferenceRule, closure,
                    parse_rules, prove_by_rules, resolve_rules, satisfies)
from ci_core import CIStatement, CIStructure, InferenceFormula, all_statements, parse_formula, structure_of
from errors import DataFormatError, DisjunctiveRuleError
from formats import structure_from_json
from minors import GroundSet, RationalCovariance

IJK = GroundSet.of("ijk")
IJKL = GroundSet.of("ijkl")


def test_builtin_rules():
    assert SEMIGRAPHOID_HALF in BUILTIN_RULES
    assert WEAK_TRANSITIVITY_GENERAL in BUILTIN_RULES
    assert BUILTIN_RULES.get(SEMIGRAPHOID_HALF).is_conjunctive
    assert not BUILTIN_RULES.get(WEAK_TRANSITIVITY_GENERAL).is_conjunctive


def test_instances_extend_conditioning_set():
    rule = BUILTIN_RULES.get(SEMIGRAPHOID_HALF)
    assert len(rule.instances(IJK)) == 6
    instances = rule.instances(IJKL)
    assert len(instances) == 48
    assert any(inst.antecedents[1] == CIStatement.of("i", "j", ["l"], IJKL) for inst in instances)


def test_closure_of_fixture(fixture_path):
    with open(fixture_path("semigraphoid.structure.json"), encoding="utf-8") as fh:
        G = structure_from_json(json.load(fh))
    closed = closure(G, resolve_rules([SEMIGRAPHOID_HALF]))
    assert len(closed) == 3
    assert CIStatement.of("i", "k", [], IJK) in closed
    assert satisfies(closed, BUILTIN_RULES.get(SEMIGRAPHOID_HALF)) == (True, None)


def test_closure_is_idempotent():
    G = CIStructure(IJKL, frozenset([CIStatement.of("i", "k", ["j"], IJKL), CIStatement.of("i", "j", [], IJKL),
                                     CIStatement.of("i", "l", ["k"], IJKL)]))
    rules = resolve_rules([SEMIGRAPHOID_HALF])
    once = closure(G, rules)
    assert closure(once, rules) == once
    assert CIStatement.of("i", "l", [], IJKL) in once


def test_closure_rejects_disjunctive_rules():
    G = CIStructure(IJK, frozenset())
    with pytest.raises(DisjunctiveRuleError):
        closure(G, BUILTIN_RULES)


def test_satisfies_reports_violating_instance():
    G = CIStructure(IJK, frozenset([CIStatement.of("i", "k", ["j"], IJK), CIStatement.of("i", "j", [], IJK)]))
    ok, inst = satisfies(G, BUILTIN_RULES.get(SEMIGRAPHOID_HALF))
    assert not ok
    assert inst.consequents == (CIStatement.of("i", "k", [], IJK),)
    full = CIStructure(IJK, frozenset(all_statements(IJK)))
    assert all(satisfies(full, rule)[0] for rule in BUILTIN_RULES)


def test_parse_rules_file(fixture_path):
    with open(fixture_path("extra.rules"), encoding="utf-8") as fh:
        rules = parse_rules(fh.read())
    assert "intersection-half" in rules
    unnamed = parse_rules("# комментарий\n[A,C|B] & [A,B|] => [A,C|]\n")
    assert unnamed.get("rule-2") is not None
    with pytest.raises(DataFormatError):
        parse_rules("r: [A,B|] => [A,C|]\nr: [A,B|] => [A,C|]")
    with pytest.raises(DataFormatError, match="Строка 1"):
        parse_rules("[A,A|] => [A,B|]")
    with pytest.raises(DataFormatError):
        resolve_rules(["no-such-rule"])
    with pytest.raises(DataFormatError):
        InferenceRule("empty", InferenceFormula(GroundSet.of("ABC"), (), ()))


def test_proves_weak_transitivity():
    result = prove_by_rules(parse_formula("[i,j|] & [i,j|k] => [i,k|] | [j,k|]"))
    assert result.proved
    assert result.trace


def test_proves_weak_transitivity_with_context():
    result = prove_by_rules(parse_formula("[i,j|l] & [i,j|k,l] => [i,k|l] | [j,k|l]"))
    assert result.proved


def test_proves_chained_semigraphoid():
    result = prove_by_rules(parse_formula("[i,k|j] & [i,j|] & [i,l|k] => [i,l|]"),
                            resolve_rules([SEMIGRAPHOID_HALF]))
    assert result.proved


def test_trivial_proof_when_consequent_is_antecedent():
    assert prove_by_rules(parse_formula("[i,j|] => [i,j|] | [i,k|]")).proved


@pytest.mark.parametrize("text", [
    "[i,j|] => [i,j|k]",
    "[i,j|k] => [i,j|]",
    "[i,j|k] & [i,k|l] & [i,l|j] => [i,j|]",
])
def test_not_provable_returns_countermodel(text):
    phi = parse_formula(text)
    result = prove_by_rules(phi)
    assert not result.proved
    assert result.reason == "countermodel"
    model = result.countermodel
    assert all(s in model for s in phi.antecedents)
    assert not any(s in model for s in phi.consequents)
    assert all(satisfies(model, rule)[0] for rule in BUILTIN_RULES)


def test_budget_exhaustion_is_not_a_disproof():
    result = prove_by_rules(parse_formula("[i,j|k] & [i,k|l] & [i,l|j] => [i,j|]"), max_nodes=0)
    assert not result.proved
    assert result.reason == "budget"
    assert result.countermodel is None


def gaussian_structure(seed: int, gs: GroundSet) -> CIStructure:
    """Структура Σ = AAᵀ + I для разреженной целочисленной A"""
    rnd = Random(seed)
    n = gs.n
    A = [[rnd.choice([0, 0, 0, 1, -1, 2]) for _ in range(n)] for _ in range(n)]
    rows = [[sum(A[r][t] * A[c][t] for t in range(n)) + (1 if r == c else 0) for c in range(n)]
            for r in range(n)]
    return structure_of(RationalCovariance.from_rows(gs, rows))


@pytest.mark.parametrize("seed", range(20))
def test_gaussian_structures_are_closed(seed):
    G = gaussian_structure(seed, IJKL if seed % 2 else IJK)
    assert closure(G, resolve_rules([SEMIGRAPHOID_HALF])) == G
    for rule in BUILTIN_RULES:
        assert satisfies(G, rule) == (True, None)
