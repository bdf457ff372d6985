from fractions import Fraction

import pytest

from desing import (Ideal, apply_sequence, coefficient_sum, equivalence_probe,
                    homogenized_ideal, ideal_equal, mu_H_oracle, mu_oracle,
                    order_along_hyperplane, order_at_point, parse_poly,
                    parse_sequence)
from desing.invariant import INF
from desing.testseq import SequenceError, TestSequence

from conftest import P, XY, XYZ, ideal, marked


def test_sequence_parse_and_serialize():
    text = "P;B(x,y)@x;E(1,2)@t"
    seq = parse_sequence(text)
    assert seq.serialize() == text
    assert seq.steps[0] == ("P",)
    assert seq.steps[1] == ("B", ("x", "y"), "x")
    assert seq.steps[2] == ("E", 1, 2, "t")
    with pytest.raises(SequenceError):
        parse_sequence("Q(x)")


def test_empty_sequence_is_identity():
    m = marked(XY, ["y^2 - x^3"], 2)
    assert apply_sequence(m, TestSequence(())) is m


def test_apply_blowup_step():
    m = marked(XY, ["y^2 - x^3"], 2)
    out = apply_sequence(m, parse_sequence("B(x,y)@x"))
    assert ideal_equal(out.ideal, ideal(XY, "y^2 - x"))
    assert out.chart.cid == "root.x"


def test_apply_projection_then_exceptional():
    m = marked(XY, ["y^2 - x^3"], 2, e=("x",))
    out = apply_sequence(m, parse_sequence("P"))
    assert out.ideal.arity == 3
    labels = [d.label for d in out.e_view]
    assert len(labels) == 2
    gadget = apply_sequence(out, parse_sequence(f"E({labels[0]},{labels[1]})@x"))
    assert gadget.d == 2  # exceptional transforms never change the marking


def test_inadmissible_step_reports_index():
    m = marked(XY, ["y^2 - x^3"], 2)
    with pytest.raises(SequenceError, match="step 0"):
        apply_sequence(m, parse_sequence("B(y)@y"))


# -- order recovery oracles -----------------------------------------------------------


ORACLE_FIXTURES = [
    (XY, ["y^2 - x^3"], 1, (0, 0)),
    (XY, ["y^2 - x^3"], 2, (0, 0)),
    (("x",), ["x"], 1, (0,)),
    (("x",), ["x^2"], 1, (0,)),
    (("x",), ["x^3"], 2, (0,)),
    (XY, ["x^2*y^3"], 1, (0, 0)),
    (XY, ["x^2 + y^2"], 2, (0, 0)),
    (XY, ["x^2 + y^3"], 2, (0, 0)),
    (XYZ, ["x*y - z^2"], 1, (0, 0, 0)),
    (XY, ["x^4 + y^4"], 3, (0, 0)),
    (XY, ["y^2 - x^3"], 1, (1, 1)),
]


def test_mu_oracle_matches_order():
    for names, gens, d, a in ORACLE_FIXTURES:
        m = marked(names, gens, d)
        expect = Fraction(int(order_at_point(m.ideal, a)), d)
        assert mu_oracle(m, a, 6, 6) == expect


def test_mu_oracle_is_presentation_invariant():
    a = marked(XY, ["y^2 - x^3"], 1)
    b = a.with_ideal(ideal(XY, "2*y^2 - 2*x^3", "x*(y^2 - x^3)", "y^2 - x^3"), 1)
    assert mu_oracle(a, (0, 0), 6, 6) == mu_oracle(b, (0, 0), 6, 6)


def test_mu_oracle_zero_ideal():
    m = marked(XY, [], 1)
    assert mu_oracle(m, (0, 0), 6, 6) == INF


def test_mu_H_oracle_matches_valuation():
    fixtures = [
        (["x^2*y^3"], 0, 2),
        (["x^2*y^3"], 1, 3),
        (["y^2 - x^3"], 0, 0),
        (["x*(y^2 - x^3)"], 0, 1),
        (["x^4*y + x^2*y^2"], 0, 2),
    ]
    for gens, label, want in fixtures:
        m = marked(XY, gens, 1, e=("x", "y"))
        assert mu_H_oracle(m, label, (0, 0), 12) == Fraction(want)


def test_mu_H_oracle_presentation_invariant():
    a = marked(XY, ["x^2*y^3"], 1, e=("x", "y"))
    b = a.with_ideal(ideal(XY, "3*x^2*y^3", "x^4*y^3"), 1)
    assert mu_H_oracle(a, 0, (0, 0)) == mu_H_oracle(b, 0, (0, 0))


def test_mu_H_requires_point_on_divisor():
    m = marked(XY, ["x^2*y^3"], 1, e=("x", "y"))
    with pytest.raises(SequenceError):
        mu_H_oracle(m, 0, (1, 0))


# -- equivalence probe ------------------------------------------------------------------


def test_probe_reflexive():
    m = marked(XY, ["y^2 - x^3"], 2)
    rep = equivalence_probe(m, m, depth=1, trials=16)
    assert not rep["distinguished"]


def test_probe_symmetric_on_distinction():
    a = marked(("x",), ["x"], 1)
    b = marked(("x",), ["x^2"], 1)
    ra = equivalence_probe(a, b, depth=2, trials=64)
    rb = equivalence_probe(b, a, depth=2, trials=64)
    assert ra["distinguished"] and rb["distinguished"]
    assert ra["witness"] == rb["witness"]


def test_probe_distinguishes_x_from_x_squared_with_witness():
    a = marked(("x",), ["x"], 1)
    b = marked(("x",), ["x^2"], 1)
    rep = equivalence_probe(a, b, depth=2, trials=64)
    assert rep["distinguished"]
    assert rep["witness"]  # a concrete recorded sequence
    seq = parse_sequence(rep["witness"])
    assert len(seq.steps) >= 1


def test_probe_cusp_vs_coefficient_sum():
    m = marked(XY, ["y^2 - x^3"], 2)
    ce = coefficient_sum(m)
    rep = equivalence_probe(m, ce, depth=2, trials=32)
    assert not rep["distinguished"]


def test_homogenized_ideal_cusp():
    m = marked(XY, ["y^2 - x^3"], 2)
    h = homogenized_ideal(m)
    assert h.d == 2
    want = ideal(XY, "y^2 - x^3", "y^2", "x^2*y", "x^4")
    assert ideal_equal(h.ideal, want)


def test_homogenized_d1_is_identity():
    m = marked(XY, ["y^2 - x^3"], 1)
    h = homogenized_ideal(m)
    assert ideal_equal(h.ideal, m.ideal) and h.d == 1


def test_probe_homogenized_vs_coefficient_sum():
    m = marked(XY, ["y^2 - x^3"], 2)
    rep = equivalence_probe(coefficient_sum(m), homogenized_ideal(m),
                            depth=2, trials=32)
    assert not rep["distinguished"]
