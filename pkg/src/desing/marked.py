"""Marked ideals: transforms, sums/products, factorization, companion and
coefficient constructions, maximal contact search.

A marked ideal is realized chart-locally as an ideal in the active frame
variables of a chart together with a positive marking d.  The frame is the
ordered list of coordinates spanning the working subvariety N; the divisor
record of the chart supplies the ordered exceptional set E.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from math import lcm

from .algebra import (Ideal, contains_one, ideal_power, ideal_product,
                      iterated_derivative, order_along_hyperplane,
                      order_along_subspace, order_at_point)
from .charts import Chart, product_with_line
from .poly import Poly


class MarkedError(ValueError):
    pass


class AdmissibilityError(MarkedError):
    """A proposed center fails the valuation test along some generator."""


class MonomialCaseError(MarkedError):
    """The residual part is trivial on the cosupport; use the monomial routine."""


class ContactError(RuntimeError):
    """No maximal contact hypersurface is polynomially available here."""


@dataclass(frozen=True)
class MarkedIdeal:
    chart: Chart
    ideal: Ideal
    d: int
    frame: tuple = None          # ordered active variable indices; default leading block
    e_labels: tuple | None = None  # restrict the divisor view (None = every chart divisor)

    def __post_init__(self):
        if self.frame is None:
            object.__setattr__(self, "frame", tuple(range(self.chart.n_dim)))
        if self.d < 1:
            raise MarkedError("marking must be >= 1")
        if self.ideal.arity != self.chart.arity:
            raise MarkedError("ideal arity must match the chart")
        fset = set(self.frame)
        for g in self.ideal.gens:
            if not g.variables() <= fset:
                raise MarkedError("generators must involve only frame variables")
        for d in self.e_view:
            if d.coord not in fset:
                raise MarkedError("divisor view must be transverse to N")

    @property
    def n_dim(self) -> int:
        return len(self.frame)

    @property
    def e_view(self) -> tuple:
        fset = set(self.frame)
        out = []
        for d in self.chart.divisors:
            if not d.alive or d.coord not in fset:
                continue
            if self.e_labels is not None and d.label not in self.e_labels:
                continue
            out.append(d)
        return tuple(out)

    def with_empty_e(self) -> "MarkedIdeal":
        return replace(self, e_labels=())

    def with_ideal(self, ideal: Ideal, d: int | None = None) -> "MarkedIdeal":
        return replace(self, ideal=ideal, d=self.d if d is None else d)

    def on_point(self, p) -> bool:
        """Whether the point lies on N (all non-frame coordinates vanish)."""
        fset = set(self.frame)
        return all(v == 0 for i, v in enumerate(p) if i not in fset)


@dataclass(frozen=True)
class MonomialPart:
    """Exponents of the exceptional-monomial factor, per alive divisor."""
    exponents: tuple  # ordered (label, coord, exponent) with exponent > 0

    def as_poly(self, arity: int) -> Poly:
        e = [0] * arity
        for _, coord, k in self.exponents:
            e[coord] = k
        return Poly.monomial(arity, e)

    def exponent_of(self, label: int) -> int:
        for lab, _, k in self.exponents:
            if lab == label:
                return k
        return 0


# -- cosupport and orders -----------------------------------------------------


def cosupp_member(m: MarkedIdeal, p) -> bool:
    if not m.on_point(p):
        raise MarkedError("point does not lie on N")
    return order_at_point(m.ideal, p) >= m.d


def cosupp_empty(m: MarkedIdeal) -> bool:
    """Emptiness over the algebraic closure via plain derivatives (E-free law)."""
    if m.ideal.is_zero():
        return False  # cosupport is all of N
    D = iterated_derivative(m.ideal, None, m.d - 1, variables=m.frame)
    return contains_one(D)


def cosupport_ideal(m: MarkedIdeal) -> Ideal:
    """Ideal whose vanishing locus is the cosupport (plain derivative chain)."""
    return iterated_derivative(m.ideal, None, m.d - 1, variables=m.frame)


def max_order(m: MarkedIdeal, constraint: Ideal | None = None):
    """Largest c with V(D^(c-1)(I)) meeting V(constraint); infinity never occurs
    for nonzero ideals.  The unconstrained form is the maximum order on V(I)'s
    ambient chart; Step II.B passes the cosupport chain of the full ideal."""
    if m.ideal.is_zero():
        raise MarkedError("max_order of the zero ideal")
    extra = constraint.gens if constraint is not None else ()
    current = m.ideal
    c = 0
    while not contains_one(Ideal(m.ideal.arity, current.gens + tuple(extra))):
        c += 1
        current = iterated_derivative(current, None, 1, variables=m.frame)
    return c


def is_maximal_order(m: MarkedIdeal) -> bool:
    if m.ideal.is_zero():
        return False
    if cosupp_empty(m):
        return True
    return max_order(m, constraint=cosupport_ideal(m)) == m.d


# -- transforms ---------------------------------------------------------------


def _child_substitution(m: MarkedIdeal, child: Chart) -> tuple:
    link = child.parent
    if link is None or link.parent_id != m.chart.cid:
        raise MarkedError("chart is not a child of the marked ideal's chart")
    return link.submap


def admissible_verdict(m: MarkedIdeal, coords) -> bool:
    """Valuation test: every generator has order >= d along the coordinate center."""
    if m.ideal.is_zero():
        return True
    return order_along_subspace(m.ideal.gens, coords) >= m.d


def transform_admissible(m: MarkedIdeal, child: Chart) -> MarkedIdeal:
    submap = _child_substitution(m, child)
    k = child.parent.chart_var
    if k not in m.frame:
        raise MarkedError("N does not meet this chart (trailing chart variable)")
    center = child.born_center
    if center is None:
        raise MarkedError("child chart was not created by a blow-up")
    if not admissible_verdict(m, center):
        raise AdmissibilityError(
            f"center {center} is not inside the cosupport at marking {m.d}")
    images = dict(enumerate(submap))
    gens = []
    for g in m.ideal.gens:
        h = g.substitute(images).divexact_var(k, m.d)
        assert h is not None
        gens.append(h)
    return MarkedIdeal(child, Ideal(child.arity, gens), m.d,
                       frame=m.frame, e_labels=_extend_labels(m, child))


def _extend_labels(m: MarkedIdeal, child: Chart):
    """A restricted divisor view always admits the newly created divisor."""
    if m.e_labels is None:
        return None
    return m.e_labels + (child.divisors[-1].label,)


def transform_exceptional(m: MarkedIdeal, child: Chart) -> MarkedIdeal:
    submap = _child_substitution(m, child)
    if child.parent.chart_var not in m.frame:
        raise MarkedError("N does not meet this chart")
    images = dict(enumerate(submap))
    gens = [g.substitute(images) for g in m.ideal.gens]
    return MarkedIdeal(child, Ideal(child.arity, gens), m.d,
                       frame=m.frame, e_labels=_extend_labels(m, child))


def transform_projection(m: MarkedIdeal, child: Chart) -> MarkedIdeal:
    """Transform by the projection from the product with a line (divisor appended)."""
    pos = m.chart.n_dim
    gens = [g.insert_axis(pos) for g in m.ideal.gens]
    frame = tuple(i if i < pos else i + 1 for i in m.frame) + (pos,)
    e_labels = m.e_labels
    if e_labels is not None:
        new = child.divisors[-1].label
        e_labels = e_labels + (new,)
    return MarkedIdeal(child, Ideal(child.arity, gens), m.d,
                       frame=tuple(sorted(frame)), e_labels=e_labels)


def pullback_line(m: MarkedIdeal, new_label: int, year: int = 0) -> MarkedIdeal:
    """Smooth pull-back along the projection: same data, no horizontal divisor."""
    child = product_with_line(m.chart, new_label, year)
    horizontal = child.divisors[-1].label
    labels = m.e_labels
    if labels is None:
        labels = tuple(d.label for d in m.chart.divisors)
    pos = m.chart.n_dim
    gens = [g.insert_axis(pos) for g in m.ideal.gens]
    frame = tuple(sorted(tuple(i if i < pos else i + 1 for i in m.frame) + (pos,)))
    assert horizontal not in labels
    return MarkedIdeal(child, Ideal(child.arity, gens), m.d,
                       frame=frame, e_labels=labels)


# -- sums and products ---------------------------------------------------------


def _check_same_frame(a: MarkedIdeal, b: MarkedIdeal):
    if a.chart.cid != b.chart.cid or a.frame != b.frame:
        raise MarkedError("marked ideals live on different frames")
    if tuple(d.label for d in a.e_view) != tuple(d.label for d in b.e_view):
        raise MarkedError("marked ideals carry different divisor views")


def marked_sum(a: MarkedIdeal, b: MarkedIdeal) -> MarkedIdeal:
    _check_same_frame(a, b)
    l = lcm(a.d, b.d)
    gens = ideal_power(a.ideal, l // a.d).gens + ideal_power(b.ideal, l // b.d).gens
    return a.with_ideal(Ideal(a.ideal.arity, gens), l)


def marked_product(a: MarkedIdeal, b: MarkedIdeal) -> MarkedIdeal:
    _check_same_frame(a, b)
    return a.with_ideal(ideal_product(a.ideal, b.ideal), a.d + b.d)


def sum_marked(terms) -> MarkedIdeal:
    """Left fold of marked_sum in the given (canonical) order."""
    terms = list(terms)
    out = terms[0]
    for t in terms[1:]:
        out = marked_sum(out, t)
    return out


# -- factorization, companion, coefficient -------------------------------------


def factor_monomial(m: MarkedIdeal):
    """I = M(I) * N(I): exceptional-monomial part and residual."""
    if m.ideal.is_zero():
        raise MarkedError("cannot factor the zero ideal")
    exps = []
    mono: dict[int, int] = {}
    for d in m.e_view:
        k = order_along_hyperplane(m.ideal, d.coord)
        if k > 0:
            exps.append((d.label, d.coord, k))
            mono[d.coord] = k
    gens = []
    for g in m.ideal.gens:
        h = g.divexact_monomial(mono)
        assert h is not None
        gens.append(h)
    return MonomialPart(tuple(exps)), Ideal(m.ideal.arity, gens)


def companion(m: MarkedIdeal) -> MarkedIdeal:
    """Maximal-order companion G = N(I) or N(I) + M(I), per the residual order."""
    mono, residual = factor_monomial(m)
    cons = cosupport_ideal(m)
    c = max_order(m.with_ideal(residual, m.d), constraint=cons)
    if c == 0:
        raise MonomialCaseError("residual has order 0 on the cosupport")
    if c >= m.d:
        g = m.with_ideal(residual, c)
    else:
        mpart = m.with_ideal(Ideal(m.ideal.arity, [mono.as_poly(m.ideal.arity)]), m.d - c)
        g = marked_sum(m.with_ideal(residual, c), mpart)
    assert is_maximal_order(g), "companion failed the maximal-order check"
    return g


def coefficient_sum(m: MarkedIdeal, k: int | None = None) -> MarkedIdeal:
    """Marked sum of the logarithmic derivative ladder, before restriction."""
    if k is None:
        k = m.d - 1
    e_coords = [d.coord for d in m.e_view]
    terms = []
    current = m.ideal
    for j in range(k + 1):
        terms.append(m.with_ideal(current, m.d - j))
        if j < k:
            current = iterated_derivative(current, e_coords, 1, variables=m.frame)
    return sum_marked(terms)


def coefficient_ideal(m: MarkedIdeal, contact: int) -> MarkedIdeal:
    """Restrict the derivative ladder to the straightened contact hypersurface."""
    if contact not in m.frame:
        raise MarkedError("contact variable is not in the frame")
    if contact in {d.coord for d in m.e_view}:
        raise MarkedError("contact variable is an exceptional coordinate")
    if not is_maximal_order(m):
        raise MarkedError("coefficient ideal requires a maximal-order marked ideal")
    cs = coefficient_sum(m)
    zero = Poly.zero(m.ideal.arity)
    gens = [g.substitute({contact: zero}) for g in cs.ideal.gens]
    frame = tuple(i for i in m.frame if i != contact)
    return MarkedIdeal(m.chart, Ideal(m.ideal.arity, gens), cs.d,
                       frame=frame, e_labels=m.e_labels)


def contact_candidates(m: MarkedIdeal):
    """Order-1 generators of D_E^(d-1)(I) paired with qualifying variables.

    Yields (generator, variable, unit coefficient) in canonical order: the
    derivative ladder's generator order, then the frame's variable order.
    """
    e_coords = {d.coord for d in m.e_view}
    ladder = iterated_derivative(m.ideal, [d.coord for d in m.e_view],
                                 m.d - 1, variables=m.frame)
    for g in ladder.gens:
        if g.order_at_origin() != 1:
            continue
        for v in m.frame:
            if v in e_coords:
                continue
            c = g.linear_coeff(v)
            if c != 0:
                yield g, v, c


def find_maximal_contact(m: MarkedIdeal) -> Poly:
    if m.ideal.is_zero() or cosupp_empty(m):
        raise MarkedError("maximal contact needs a nonempty cosupport")
    for g, _, _ in contact_candidates(m):
        return g
    raise ContactError(
        f"maximal contact not polynomially available in chart {m.chart.cid}")


def boundary_companion(m: MarkedIdeal, coeff: MarkedIdeal, s: int) -> MarkedIdeal:
    """J = C + E-ideal for the current divisor count s (general maximal order case)."""
    if s == 0:
        raise MarkedError("s = 0 has no boundary part; use the coefficient ideal")
    dropped = set(m.frame) - set(coeff.frame)
    if len(dropped) != 1:
        raise MarkedError("coefficient ideal must drop exactly one frame variable")
    t = dropped.pop()
    arity = m.ideal.arity
    d_c = coeff.d
    zero = Poly.zero(arity)
    factors = []
    for combo in itertools.combinations(m.e_view, s):
        gens = []
        for d in combo:
            x = Poly.var(arity, d.coord) if d.coord != t else zero
            gens.append(x ** d_c)
        factors.append(Ideal(arity, gens))
    e_ideal = factors[0]
    for f in factors[1:]:
        e_ideal = ideal_product(e_ideal, f)
    boundary = MarkedIdeal(m.chart, e_ideal, d_c, frame=coeff.frame,
                           e_labels=coeff.e_labels)
    return marked_sum(coeff, boundary)
