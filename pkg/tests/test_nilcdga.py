from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from linfalg.algebra import Generator, GradedAlgebra
from linfalg.errors import ArgumentError, UnsupportedError
from linfalg.fixtures import fixture_names, load_fixture
from linfalg.nilcdga import (KahlerModule, NilCdga, check_nilcdga, ideal_power, kahler,
                             quotient_map_ok)


def de_rham_plane():
    gens = [Generator("x", 0), Generator("y", 0), Generator("dx", 1), Generator("dy", 1)]
    return GradedAlgebra(gens, differential={"x": "dx", "y": "dy"}, name="OmegaQ2")


def mixed():
    # Q[x]/(x^3) tensor Lambda(t1, t2) with d x = x t1, which preserves x^3 = 0
    gens = [Generator("x", 0, nil=3), Generator("t1", 1), Generator("t2", 1)]
    return GradedAlgebra(gens, differential={"x": "x*t1"}, name="mixed")


MIX = mixed()
MONOS = MIX.basis()


def elements(alg, monos):
    return st.lists(st.tuples(st.sampled_from(monos), st.integers(-3, 3)), max_size=4).map(
        lambda terms: sum((alg.monomial(m, c) for m, c in terms), alg.zero()))


homogeneous = st.sampled_from(MONOS).map(MIX.monomial)


@given(homogeneous, homogeneous)
def test_graded_commutativity(a, b):
    sign = (-1) ** (a.parity() * b.parity())
    assert (a * b - b * a * sign).is_zero()


@given(elements(MIX, MONOS), elements(MIX, MONOS), elements(MIX, MONOS))
def test_associative_and_distributive(a, b, c):
    assert ((a * b) * c - a * (b * c)).is_zero()
    assert (a * (b + c) - a * b - a * c).is_zero()


@given(homogeneous, elements(MIX, MONOS))
def test_leibniz(a, b):
    d = MIX.d
    assert (d(a * b) - d(a) * b - a * d(b) * (-1) ** a.parity()).is_zero()


def test_odd_squares_vanish_and_nil_order():
    t1, x = MIX.gen("t1"), MIX.gen("x")
    assert (t1 * t1).is_zero()
    assert (x * x * x).is_zero()
    assert not (x * x).is_zero()


def test_relation_not_preserved_by_d_is_flagged():
    gens = [Generator("x", 0, nil=3), Generator("t1", 1)]
    alg = GradedAlgebra(gens, differential={"x": "t1"})
    rep = check_nilcdga(NilCdga(alg, ["x", "t1"], order=4), raise_on_failure=False)
    assert not rep.get("d respects relations").passed
    assert check_nilcdga(NilCdga(MIX, ["x", "t1", "t2"], order=4), raise_on_failure=False).ok


def test_duplicate_generators_rejected():
    with pytest.raises(ArgumentError):
        GradedAlgebra([Generator("x", 0), Generator("x", 1)])


def test_grassmann_base_checks():
    alg = GradedAlgebra([Generator("t1", 1), Generator("t2", 1)], name="Lambda2")
    A = NilCdga(alg, ["t1", "t2"], order=2)
    rep = check_nilcdga(A)
    assert rep.ok
    assert len(ideal_power(A, 1)) == 3
    assert len(ideal_power(A, 2)) == 1
    assert ideal_power(A, 3) == []
    assert quotient_map_ok(A)


def test_ideal_power_is_multiplicative():
    alg = GradedAlgebra([Generator("t1", 1), Generator("t2", 1), Generator("t3", 1)])
    A = NilCdga(alg, ["t1", "t2", "t3"], order=3)
    for k in range(4):
        for l in range(4 - k):
            for a in ideal_power(A, k):
                for b in ideal_power(A, l):
                    assert A.in_ideal(a * b, k + l)


@pytest.mark.parametrize("name", fixture_names("linf"))
def test_fixture_bases_are_nilpotent_dg_ideals(name):
    A = load_fixture(name).base
    assert check_nilcdga(A, raise_on_failure=False).ok
    assert quotient_map_ok(A)


def test_kahler_anticommuting_differentials():
    for alg in (de_rham_plane(), MIX):
        km = kahler(alg)
        assert km.check(kmax=3, window=2).ok


def test_kahler_relation_for_truncated_variable():
    km = KahlerModule(MIX)
    x = km.embed(MIX.gen("x"))
    # x^3 = 0 forces x^2 d_x = 0
    assert (x * x * km.d_dR(x)).is_zero()
    assert not (x * km.d_dR(x)).is_zero()


def test_kahler_d_dR_is_derivation_into_one_forms():
    km = kahler(de_rham_plane())
    A = km.algebra
    x, y = A.gen("x"), A.gen("y")
    f = x * x * y
    assert (km.d_dR(f) - (A.scalar(2) * x * y * A.gen("d_x") + x * x * A.gen("d_y"))).is_zero()
    assert km.form_degree(km.d_dR(f)) == {1}


def test_kahler_rejects_non_monomial_relations():
    alg = GradedAlgebra([Generator("x", 0), Generator("y", 0)], relations=[(1, 1)])
    with pytest.raises(UnsupportedError):
        KahlerModule(alg)
