from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from desing import (Ideal, contains_one, derivative_ideal, ideal_equal,
                    ideal_member, ideal_power, ideal_product, ideal_sum,
                    iterated_derivative, log_derivative_ideal,
                    order_along_hyperplane, order_at_point, radical_membership,
                    reduced_groebner)
from desing.algebra import INFINITY, normal_form

from conftest import P, XY, XYZW, ideal, random_poly


# -- orders --------------------------------------------------------------------


def test_order_at_point_examples():
    assert order_at_point(ideal(XY, "y^2 - x^3"), (0, 0)) == 2
    surf = ideal(XYZW, "y^2 - x^3", "x^4 + x*z^2 - w^3")
    assert order_at_point(surf, (0, 0, 0, 0)) == 2
    # translate by (1,1): the cusp is smooth there
    assert order_at_point(ideal(XY, "y^2 - x^3"), (1, 1)) == 1


def test_order_at_point_translation_oracle(rng):
    # oracle: full expansion of the translated polynomial
    for _ in range(20):
        f = random_poly(rng, 2)
        if f.is_zero():
            continue
        p = (rng.randint(-2, 2), rng.randint(-2, 2))
        assert order_at_point(Ideal(2, [f]), p) == f.translate(p).order_at_origin()


def test_order_zero_ideal_is_infinite():
    assert order_at_point(Ideal(2), (0, 0)) == INFINITY
    assert order_along_hyperplane(Ideal(2), 0) == INFINITY


def test_order_along_hyperplane():
    assert order_along_hyperplane(ideal(XY, "x^2*y + x^3"), 0) == 2
    two = ideal(XYZW, "x*(y^2 - x)", "x^2*(x + z^2 - w^3)")
    assert order_along_hyperplane(two, 0) == 1
    assert order_along_hyperplane(ideal(XY, "x^2"), 1) == 0


def test_order_min_over_generators_redundancy(rng):
    for _ in range(15):
        gens = [random_poly(rng, 2) for _ in range(2)]
        gens = [g for g in gens if not g.is_zero()]
        if not gens:
            continue
        I = Ideal(2, gens)
        J = Ideal(2, list(I.gens) + [I.gens[0] + I.gens[-1]])
        p = (rng.randint(0, 1), rng.randint(0, 1))
        assert order_at_point(I, p) >= order_at_point(J, p)
        # a sum of generators can only raise the min, never lower it
        assert order_at_point(J, p) == order_at_point(I, p)


# -- derivative ideals -----------------------------------------------------------


def test_derivative_ideal_cusp():
    D = derivative_ideal(ideal(XY, "y^2 - x^3"))
    assert ideal_equal(D, ideal(XY, "y", "x^2"))


def test_derivative_ideal_trivial_cases():
    assert contains_one(derivative_ideal(ideal(("x",), "x")))
    assert derivative_ideal(Ideal(1)).is_zero()


def test_log_derivative_examples():
    assert ideal_equal(log_derivative_ideal(ideal(XY, "x^2*y"), [0]), ideal(XY, "x^2"))
    assert ideal_equal(log_derivative_ideal(ideal(XY, "x^4"), [0]), ideal(XY, "x^4"))
    assert ideal_equal(log_derivative_ideal(ideal(XY, "y^2"), [0]), ideal(XY, "y"))


def test_iterated_derivative():
    assert ideal_equal(iterated_derivative(ideal(XY, "y^3"), None, 2), ideal(XY, "y"))
    I = ideal(XY, "x^2*y^2")
    assert iterated_derivative(I, None, 0) is I
    lhs = iterated_derivative(iterated_derivative(I, None, 1), None, 1)
    assert ideal_equal(lhs, iterated_derivative(I, None, 2))


def test_derivative_composition_law(rng):
    # D_E^k(D_E^l(I)) = D_E^(k+l)(I) on random small ideals
    for _ in range(12):
        gens = [random_poly(rng, 3, max_deg=2, max_terms=3) for _ in range(2)]
        I = Ideal(3, gens)
        if I.is_zero():
            continue
        e = [0] if rng.random() < 0.5 else []
        for k, l in ((1, 1), (1, 2)):
            lhs = iterated_derivative(iterated_derivative(I, e, l), e, k)
            rhs = iterated_derivative(I, e, k + l)
            assert ideal_equal(lhs, rhs)


def test_derivative_product_rule_inclusion(rng):
    # D_E^k(I*J) inside sum of D_E^j(I) * D_E^(k-j)(J)
    for _ in range(8):
        I = Ideal(2, [random_poly(rng, 2, max_deg=2, max_terms=2)])
        J = Ideal(2, [random_poly(rng, 2, max_deg=2, max_terms=2)])
        if I.is_zero() or J.is_zero():
            continue
        k = 1
        lhs = iterated_derivative(ideal_product(I, J), None, k)
        rhs = Ideal(2)
        for j in range(k + 1):
            rhs = ideal_sum(rhs, ideal_product(iterated_derivative(I, None, j),
                                               iterated_derivative(J, None, k - j)))
        for g in lhs.gens:
            assert ideal_member(g, rhs)


# -- ideal arithmetic --------------------------------------------------------------


def test_ideal_ops():
    assert ideal_equal(ideal_sum(ideal(XY, "x"), ideal(XY, "y")), ideal(XY, "x", "y"))
    assert ideal_equal(ideal_product(ideal(XY, "x"), ideal(XY, "y")), ideal(XY, "x*y"))
    sq = ideal_power(ideal(XY, "x", "y"), 2)
    assert ideal_equal(sq, ideal(XY, "x^2", "x*y", "y^2"))


# -- Groebner engine ---------------------------------------------------------------


def test_reduced_groebner_examples():
    assert reduced_groebner(ideal(XY, "x^2", "x")) == (P("x"),)
    assert reduced_groebner(ideal(XY, "x+1", "x")) == (P("1"),)
    basis = reduced_groebner(ideal(XY, "y^2 - x", "x"))
    assert basis == (P("x"), P("y^2"))


def test_groebner_deterministic(rng):
    for _ in range(10):
        gens = [random_poly(rng, 2) for _ in range(3)]
        a = Ideal(2, gens).basis()
        b = Ideal(2, gens).basis()
        assert a == b


def test_contains_one():
    assert contains_one(ideal(XY, "x", "x+1"))
    assert not contains_one(ideal(XY, "x^2", "y"))
    three = ideal(XY, "x-1", "y-1", "x*y-1")
    assert not contains_one(three)  # witness point (1,1)
    assert order_at_point(three, (1, 1)) >= 1


def test_contains_one_implies_order_zero(rng):
    for _ in range(10):
        gens = [random_poly(rng, 2) for _ in range(2)]
        I = Ideal(2, gens)
        if not contains_one(I):
            continue
        for p in ((0, 0), (1, 0), (1, 1), (2, -1)):
            assert order_at_point(I, p) == 0


def test_ideal_equal():
    assert ideal_equal(ideal(XY, "y", "x^2"), derivative_ideal(ideal(XY, "y^2 - x^3")))
    assert not ideal_equal(ideal(XY, "x"), ideal(XY, "x^2"))
    assert ideal_equal(Ideal(2), Ideal(2))


def test_normal_form_is_zero_on_members():
    I = ideal(XY, "y^2 - x", "x*y")
    f = P("y^3") * I.gens[0] + P("x - 7") * I.gens[1]
    assert normal_form(f, I.basis()).is_zero()


def test_radical_membership():
    assert radical_membership(P("x"), ideal(XY, "x^2"))
    assert not radical_membership(P("y"), ideal(XY, "x^2"))
    assert radical_membership(P("x*y"), ideal(XY, "x^2", "y^3"))


small = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)),
                        st.integers(-3, 3), min_size=1, max_size=3)


@given(small, small)
@settings(max_examples=25, deadline=None)
def test_membership_of_combinations(t1, t2):
    from desing.poly import Poly
    f, g = Poly(2, t1), Poly(2, t2)
    I = Ideal(2, [f, g])
    if I.is_zero():
        return
    assert ideal_member(f * g, I)
    assert ideal_member(f + g, I)
