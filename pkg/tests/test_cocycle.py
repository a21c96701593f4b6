import random

import pytest
from hypothesis import given, settings, strategies as st

from cases import PLANE, SPACE3
from cocycle_forge.cocycle import (
    FAMILIES,
    Bilinear,
    ConstantShift,
    CocycleN,
    FunctionCocycle,
    LinearCombination,
    Polynomial,
    Potential,
    check_cocycle2,
    check_grouping,
    check_offset_laws,
    check_symmetry_nary,
    cocycle_from_json,
    cocycle_offset,
    extend_nary,
    normalize,
    random_cocycle,
    shifted,
)
from cocycle_forge.conedomain import ConeDomain
from cocycle_forge.errors import ContractError, DomainError, EvaluationError
from cocycle_forge.exactq import Q, QVector

LINE = ConeDomain.simplex(1)
PRODUCT = Bilinear([[[1]]])  # f(a, b) = a * b


def q(*xs):
    return QVector([Q(x) if not isinstance(x, tuple) else Q(*x) for x in xs])


def cube():
    return Potential(Polynomial(1, [[(1, (3,))]]))


def test_bilinear_passes():
    assert check_cocycle2(PRODUCT, LINE, 500, 0).passed


def test_cubic_potential_passes():
    assert check_cocycle2(cube(), LINE, 500, 0).passed


def test_asymmetric_evaluator_fails_with_witness():
    broken = FunctionCocycle(lambda a, b: a, 1, 1, "first-argument")
    rep = check_cocycle2(broken, LINE, 500, 0)
    assert not rep.passed
    assert rep.counterexample["law"] == "symmetry"


def test_non_cocycle_symmetric_fails():
    # symmetric, but the linear part a + b breaks the cocycle identity
    broken = FunctionCocycle(lambda a, b: QVector([a[0] * a[0] * b[0] * b[0] + a[0] + b[0]]), 1, 1)
    rep = check_cocycle2(broken, LINE, 200, 1)
    assert not rep.passed and rep.counterexample["law"] == "cocycle"


def test_evaluator_error_carries_point():
    def boom(a, b):
        raise RuntimeError("nope")

    with pytest.raises(EvaluationError) as info:
        check_cocycle2(FunctionCocycle(boom, 1, 1), LINE, 10, 0)
    assert info.value.point is not None


def test_nary_unfold():
    fn = extend_nary(PRODUCT)
    quarter = q((1, 4))
    assert fn(quarter, quarter, quarter) == q((3, 16))
    assert fn(quarter).is_zero()
    assert fn(q((1, 3)), q((1, 6))) == PRODUCT(q((1, 3)), q((1, 6)))


def test_nary_domain_check():
    fn = CocycleN(PRODUCT, LINE)
    with pytest.raises(DomainError):
        fn(q((3, 4)), q((1, 2)))


def test_symmetry_and_grouping_examples():
    fn = extend_nary(PRODUCT)
    a = [q((1, 4)), q((1, 4)), q((1, 2))]
    assert fn(*a) == fn(a[2], a[0], a[1])
    e = q((1, 8))
    assert fn(e, e, e, e) == fn(e * 2, e * 2) + fn(e, e) + fn(e, e) == q((3, 32))
    square = Potential(Polynomial(1, [[(1, (2,))]]))
    assert check_symmetry_nary(extend_nary(square), LINE, 4, 200, 0).passed
    for shape in ([2, 1], [1, 1], [2, 2], [1, 3, 2]):
        assert check_grouping(fn, LINE, shape, 100, 0).passed


def test_asymmetric_base_fails_nary_symmetry():
    broken = Bilinear([[[0, 1], [2, 0]]])
    rep = check_symmetry_nary(extend_nary(broken), ConeDomain.simplex(2), 3, 200, 0)
    assert not rep.passed and "permutation" in rep.counterexample


def test_grouping_rejects_bad_shapes():
    with pytest.raises(ContractError):
        check_grouping(extend_nary(PRODUCT), LINE, [0, 2])


@pytest.mark.parametrize("p", range(1, 40))
def test_repeated_matches_fold(p):
    f = random_cocycle("sum", 2, 2, random.Random(p))
    fn = extend_nary(f)
    x = q((1, 7), (2, 9))
    assert fn.repeated(x, p) == fn.repeated_fold(x, p) == fn(*([x] * p))


def test_offsets():
    assert cocycle_offset(PRODUCT).is_zero()
    assert cocycle_offset(ConstantShift(PRODUCT, q((5, 7)))) == q((5, 7))
    c = Potential(Polynomial(1, [[(3, (0,)), (1, (2,))]]))
    assert cocycle_offset(c) == q(-3)


def test_normalize():
    base = PRODUCT
    f0, z = normalize(ConstantShift(base, q(2)))
    assert f0 is base and z == q(2)
    f1, z1 = normalize(base)
    assert f1 is base and z1.is_zero()
    again, z2 = normalize(f0)
    assert again is f0 and z2.is_zero()


def test_shifted_merges():
    f = shifted(shifted(PRODUCT, q(1)), q(2))
    assert isinstance(f, ConstantShift) and f.base is PRODUCT and f.z == q(3)
    assert shifted(f, q(-3)) is PRODUCT


def test_offset_laws_for_shift():
    f = ConstantShift(PRODUCT, q((5, 7)))
    rep = check_offset_laws(f, LINE, 100, 0)
    assert rep.passed and rep.details["z"] == q((5, 7))


def test_offset_laws_detect_bad_zero_behaviour():
    bad = FunctionCocycle(lambda a, b: QVector([1 if a[0] or b[0] else 0]), 1, 1)
    assert not check_offset_laws(bad, LINE, 20, 0).passed


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("domain", [LINE, PLANE, SPACE3], ids=["d1", "d2", "d3"])
def test_random_families_are_cocycles(family, domain):
    f = random_cocycle(family, domain.dim, 2, random.Random(3))
    assert check_cocycle2(f, domain, 300, 4).passed


@pytest.mark.parametrize("family", FAMILIES)
def test_json_round_trip(family):
    f = random_cocycle(family, 3, 2, random.Random(9))
    g = cocycle_from_json(f.to_json())
    a, b = q((1, 5), 0, (2, 7)), q((1, 3), (1, 2), 0)
    assert f(a, b) == g(a, b)
    assert g.to_json() == f.to_json()


@pytest.mark.parametrize("data", [
    {"family": "bogus"},
    {"matrices": [[["1"]]]},
    {"family": "bilinear"},
    {"family": "bilinear", "matrices": [[["1", "2"]]]},
    {"family": "potential", "dim": 1, "components": [[{"coef": "1", "exp": [5]}]]},
    {"family": "shift", "base": {"family": "bilinear", "matrices": [[["1"]]]}, "z": ["1", "2"]},
])
def test_json_rejects_malformed(data):
    with pytest.raises(ContractError):
        cocycle_from_json(data)


def test_combination_dimension_mismatch():
    with pytest.raises(ContractError):
        LinearCombination([(1, PRODUCT), (1, Bilinear([[[1, 0], [0, 1]]]))])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from(FAMILIES))
def test_potential_of_any_polynomial_is_a_cocycle(seed, family):
    f = random_cocycle(family, 2, 1, random.Random(seed))
    assert check_cocycle2(f, PLANE, 25, seed).passed
