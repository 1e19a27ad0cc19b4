import json
from fractions import Fraction
from random import Random

import mpmath
import pytest

from algnum import (RATIONALS, AlgebraicReal, FieldCovariance, FieldElement, as_field_covariance, field_ops,
                    is_principally_regular, sign_of, verify_counterexample)
from ci_core import ci_holds, is_positive_definite, parse_formula
from errors import DataFormatError, FieldMismatch, ZeroDivisionInField
from formats import counterexample_report_to_json, matrix_from_json
from minors import GroundSet, RationalCovariance, almost_principal_minor, principal_minor

SQRT2 = AlgebraicReal([-2, 0, 1], (1, 2))
CBRT2 = AlgebraicReal([-2, 0, 0, 1], (1, 2))


def a(*coeffs, alpha=SQRT2):
    return FieldElement(list(coeffs), alpha)


def load(fixture_path, name):
    with open(fixture_path(name), encoding="utf-8") as fh:
        return matrix_from_json(json.load(fh))


# --- поле -------------------------------------------------------------------------

def test_sqrt2_arithmetic():
    alpha = a(0, 1)
    assert alpha * alpha == 2
    assert (1 + alpha).inverse() == alpha - 1
    assert alpha ** -2 == Fraction(1, 2)
    assert (alpha / 2) * 2 == alpha
    assert str(alpha * Fraction(1, 4) - 1) == "-1 + 1/4*a"


def test_field_ops_bundle():
    ops = field_ops(a(1, 1), a(0, 1))
    assert ops["add"] == a(1, 2)
    assert ops["mul"] == a(2, 1)
    assert ops["inverse"] == a(0, Fraction(1, 2))


@pytest.mark.parametrize("seed", range(10))
def test_field_axioms(seed):
    rnd = Random(seed)

    def rand():
        return a(*(Fraction(rnd.randint(-9, 9), rnd.randint(1, 5)) for _ in range(3)), alpha=CBRT2)

    x, y, z = rand(), rand(), rand()
    assert x + y == y + x
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    if not x.is_zero():
        assert x * x.inverse() == 1


def test_reduction_modulo_minimal_polynomial():
    assert a(0, 0, 0, 1, alpha=CBRT2) == 2
    assert len(a(1, 2, 3, 4, 5, alpha=CBRT2).coeffs) == 3


def test_signs_need_refinement():
    alpha = a(0, 1)
    assert sign_of(alpha - 1) == 1
    assert sign_of(Fraction(7, 5) - alpha) == -1
    assert sign_of(Fraction(17, 12) - alpha) == 1
    assert sign_of(alpha * alpha - 2) == 0
    assert sign_of(a(0, 0, 1, alpha=CBRT2) - Fraction(3, 2)) == 1


def test_reducible_minimal_polynomial():
    one = AlgebraicReal([-1, 0, 1], (0, 2))
    element = FieldElement([-1, 1], one)
    assert sign_of(element) == 0
    with pytest.raises(ZeroDivisionInField):
        element.inverse()


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionInField):
        a(0, 0).inverse()


def test_mixing_fields_is_an_error():
    with pytest.raises(FieldMismatch):
        a(0, 1) + a(0, 1, alpha=CBRT2)
    assert a(0, 1) != a(0, 1, alpha=CBRT2)


@pytest.mark.parametrize("minpoly,interval", [
    (["1/2", 0, 1], (0, 1)),
    ([-2, 0, 1], (-2, 2)),
    ([-4, 0, 1], (2, 3)),
    ([1, 2, 1], (-2, 0)),
    ([5], (0, 1)),
    ([-2, 0, 1], (2, 1)),
])
def test_bad_algebraic_numbers(minpoly, interval):
    with pytest.raises(DataFormatError):
        AlgebraicReal(minpoly, interval)


def test_refine_keeps_isolation():
    current = SQRT2
    for _ in range(20):
        current = current.refine()
        assert current.count_roots(current.lo, current.hi) == 1
    assert current.hi - current.lo == Fraction(1, 2 ** 20)
    assert current.same_as(SQRT2)
    assert not AlgebraicReal([-2, 0, 1], (-2, -1)).same_as(SQRT2)


def test_rationals_are_degree_one():
    assert RATIONALS.degree == 1
    x = FieldElement.from_rational(Fraction(-3, 7))
    assert sign_of(x) == -1
    assert x.inverse() == Fraction(-7, 3)


SIGN_FIELDS = [
    ([-2, 0, 1], (1, 2)), ([-3, 0, 1], (1, 2)), ([-5, 0, 1], (2, 3)), ([-7, 0, 1], (2, 3)),
    ([-11, 0, 1], (3, 4)), ([-2, 0, 0, 1], (1, 2)), ([-3, 0, 0, 1], (1, 2)), ([-1, -1, 0, 1], (1, 2)),
]


@pytest.mark.slow
@pytest.mark.parametrize("minpoly,interval", SIGN_FIELDS)
def test_sign_against_high_precision(minpoly, interval):
    alpha = AlgebraicReal(minpoly, interval)
    rnd = Random(sum(minpoly))
    with mpmath.workdps(100):
        root = mpmath.findroot(lambda t: mpmath.polyval(minpoly[::-1], t), mpmath.mpf(sum(interval)) / 2)
        for _ in range(125):
            coeffs = [Fraction(rnd.randint(-50, 50), rnd.randint(1, 20)) for _ in range(alpha.degree)]
            value = sum(mpmath.mpf(c.numerator) / c.denominator * root ** k for k, c in enumerate(coeffs))
            expected = 0 if value == 0 else (1 if value > 0 else -1)
            assert sign_of(FieldElement(coeffs, alpha)) == expected, (minpoly, coeffs)


# --- контрпримеры ---------------------------------------------------------------------

def test_sqrt2_witness(fixture_path):
    sigma = load(fixture_path, "witness_sqrt2.json")
    assert isinstance(sigma, FieldCovariance)
    assert principal_minor(["i", "j", "k"], sigma) == Fraction(3, 4)
    assert almost_principal_minor("i", "j", ["k"], sigma) == Fraction(-1, 8)
    assert is_positive_definite(sigma)
    assert ci_holds(sigma, parse_formula("[i,j|] => [i,j|k]").antecedents[0])
    report = verify_counterexample(sigma, parse_formula("[i,j|] => [i,j|k]"))
    assert report.confirmed
    assert report.reasons == []


@pytest.mark.parametrize("name,formula", [
    ("witness_1.json", "[i,j|] => [i,j|k]"),
    ("witness_2.json", "[i,j|k] => [i,j|]"),
])
def test_shipped_rational_witnesses(fixture_path, name, formula):
    report = verify_counterexample(load(fixture_path, name), parse_formula(formula))
    assert report.confirmed
    data = counterexample_report_to_json(report)
    assert data["confirmed"] is True
    assert data["positive_definite"] is True


def test_witness_does_not_refute_valid_rule(fixture_path):
    report = verify_counterexample(load(fixture_path, "witness_1.json"),
                                   parse_formula("[i,j|] & [i,j|k] => [i,k|] | [j,k|]"))
    assert not report.confirmed
    assert any(r.startswith("antecedent [i,j|k]") for r in report.reasons)


def test_four_variable_matrix_is_only_principally_regular(fixture_path):
    sigma = load(fixture_path, "regular_not_pd4x4.json")
    report = verify_counterexample(sigma, parse_formula("[i,j|k] & [i,k|l] & [i,l|j] => [i,j|]"))
    assert not report.positive_definite
    assert report.principally_regular
    assert not report.confirmed
    assert report.confirmed_principally_regular
    assert report.reasons == ["not positive definite: [ij] = -15"]
    assert is_principally_regular(sigma)


def test_identity_is_not_a_counterexample():
    sigma = as_field_covariance(RationalCovariance.identity(GroundSet.of("ijk")))
    report = verify_counterexample(sigma, parse_formula("[i,j|] => [i,j|k]"))
    assert not report.confirmed
    assert report.reasons == ["consequent [i,j|k] holds"]


def test_ground_set_mismatch():
    with pytest.raises(DataFormatError):
        verify_counterexample(RationalCovariance.identity(GroundSet.of("ijkl")), parse_formula("[i,j|] => [i,j|k]"))
