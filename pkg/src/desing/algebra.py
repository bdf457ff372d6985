"""Ideal arithmetic and a Buchberger engine for triviality/membership tests.

The Groebner machinery uses graded reverse lexicographic order with the
chart's variable order, the sugar selection strategy, and full reduction.
It is invoked only for decisions (contains 1, membership, ideal equality);
the resolution loop itself runs on orders and exact divisions.
"""
from __future__ import annotations

import itertools
import threading
from fractions import Fraction
from typing import Iterable, Sequence

from .poly import Poly, grevlex_key

INFINITY = float("inf")


def _is_monomial_multiple(g: Poly, h: Poly) -> bool:
    """Whether g equals (monomial constant) * h; such generators are redundant."""
    if len(g.terms) != len(h.terms) or h.is_zero() or g.is_zero():
        return False
    return _mm(g, *g.leading(), h, *h.leading())


def _mm(g: Poly, ge, gc, h: Poly, he, hc) -> bool:
    off = tuple(a - b for a, b in zip(ge, he))
    if any(o < 0 for o in off):
        return False
    for e, c in h.terms.items():
        v = g.terms.get(tuple(a + b for a, b in zip(e, off)))
        if v is None or v * hc != c * gc:  # cross-multiplied: exact for int/Fraction
            return False
    return True


_PRUNE_TERM_CAP = 256     # pruning is an optimization; skip it for huge polynomials
_PRUNE_WORK_CAP = 400_000  # total term touches allowed per pruning pass


def prune_gens(gens: Sequence[Poly]) -> list:
    """Drop generators that are monomial multiples of earlier/smaller ones.

    Keeps the first occurrence, preserving the canonical generator order; the
    generated ideal is unchanged.  Work is bounded: oversized polynomials and
    passes that exhaust the budget are kept unpruned rather than compared.
    """
    kept: list = []  # (g, lead exps, lead coeff, term count)
    work = _PRUNE_WORK_CAP
    for g in gens:
        if g.is_zero():
            continue
        ge, gc = g.leading()
        ng = len(g.terms)
        if ng > _PRUNE_TERM_CAP or work < 0:
            kept.append((g, ge, gc, ng))
            continue
        drop = False
        for h, he, hc, nh in kept:
            if nh == ng:
                work -= ng
                if _mm(g, ge, gc, h, he, hc):
                    drop = True
                    break
        if drop:
            continue
        survivors = []
        for h, he, hc, nh in kept:
            if nh == ng:
                work -= ng
                if _mm(h, he, hc, g, ge, gc):
                    continue
            survivors.append((h, he, hc, nh))
        kept = survivors
        kept.append((g, ge, gc, ng))
    return [entry[0] for entry in kept]


class Ideal:
    """Finitely generated ideal; generators keep their given order.

    Construction drops zero, repeated, and monomial-multiple generators; the
    remaining list is the canonical generator sequence of the ideal.
    """

    __slots__ = ("arity", "gens", "_basis", "_lock", "_ordcache")

    def __init__(self, arity: int, gens: Iterable[Poly] = ()):
        self.arity = arity
        seen = set()
        kept = []
        for g in gens:
            if g.arity != arity:
                raise ValueError("generator arity mismatch")
            if g.is_zero() or g in seen:
                continue
            seen.add(g)
            kept.append(g)
        self.gens = tuple(prune_gens(kept))
        self._basis = None
        self._lock = threading.Lock()
        self._ordcache: dict = {}

    def is_zero(self) -> bool:
        return not self.gens

    def basis(self) -> tuple:
        """Unique reduced grevlex Groebner basis, computed at most once."""
        if self._basis is None:
            with self._lock:
                if self._basis is None:
                    self._basis = buchberger(self.gens, self.arity)
        return self._basis

    def contains(self, f: Poly) -> bool:
        if f.is_zero():
            return True
        if self.is_zero():
            return False
        return normal_form(f, self.basis()).is_zero()

    def __repr__(self):
        return f"Ideal({', '.join(g.format() for g in self.gens) or '0'})"


# -- division and Buchberger -------------------------------------------------


def _divides(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _exp_sub(a: tuple, b: tuple) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def _exp_lcm(a: tuple, b: tuple) -> tuple:
    return tuple(max(x, y) for x, y in zip(a, b))


def normal_form(f: Poly, basis: Sequence[Poly]) -> Poly:
    """Full remainder of f under multivariate division by basis (fixed scan order)."""
    if not basis:
        return f
    leads = [g.leading() for g in basis]
    tail = f
    out: dict[tuple, Fraction] = {}
    while not tail.is_zero():
        e, c = tail.leading()
        for g, (ge, gc) in zip(basis, leads):
            if _divides(ge, e):
                tail = tail - g.mul_monomial(_exp_sub(e, ge), Fraction(c) / Fraction(gc))
                break
        else:
            out[e] = c
            tail = tail - Poly.monomial(tail.arity, e, c)
    return Poly(f.arity, out)


def _spoly(f: Poly, g: Poly) -> Poly:
    fe, fc = f.leading()
    ge, gc = g.leading()
    l = _exp_lcm(fe, ge)
    return f.mul_monomial(_exp_sub(l, fe), Fraction(1) / fc) - \
        g.mul_monomial(_exp_sub(l, ge), Fraction(1) / gc)


def buchberger(gens: Sequence[Poly], arity: int) -> tuple:
    """Reduced grevlex Groebner basis via Buchberger with sugar selection."""
    G: list[Poly] = []
    sugar: list[int] = []
    for g in gens:
        if not g.is_zero():
            G.append(g)
            sugar.append(g.total_degree())
    if not G:
        return ()

    pairs = set()

    def pair_key(p):
        i, j = p
        l = _exp_lcm(G[i].leading()[0], G[j].leading()[0])
        s = max(sugar[i] + sum(_exp_sub(l, G[i].leading()[0])),
                sugar[j] + sum(_exp_sub(l, G[j].leading()[0])))
        return (s, grevlex_key(l), i, j)

    for i, j in itertools.combinations(range(len(G)), 2):
        pairs.add((i, j))

    while pairs:
        i, j = min(pairs, key=pair_key)
        pairs.discard((i, j))
        ei, ej = G[i].leading()[0], G[j].leading()[0]
        l = _exp_lcm(ei, ej)
        if l == tuple(a + b for a, b in zip(ei, ej)):
            continue  # coprime leading monomials
        s = _spoly(G[i], G[j])
        r = normal_form(s, G)
        if r.is_zero():
            continue
        sug = max(sugar[i] + sum(_exp_sub(l, ei)), sugar[j] + sum(_exp_sub(l, ej)))
        G.append(r)
        sugar.append(max(sug, r.total_degree()))
        k = len(G) - 1
        for m in range(k):
            pairs.add((m, k))

    # minimalize
    order = sorted(range(len(G)), key=lambda i: grevlex_key(G[i].leading()[0]))
    minimal: list[Poly] = []
    for i in order:
        e = G[i].leading()[0]
        if not any(_divides(m.leading()[0], e) for m in minimal):
            minimal.append(G[i])
    # interreduce fully and normalize to monic
    reduced = []
    for i, g in enumerate(minimal):
        rest = minimal[:i] + minimal[i + 1:]
        r = normal_form(g, rest) if rest else g
        if not r.is_zero():
            reduced.append(r.scale(Fraction(1) / r.leading()[1]))
    reduced.sort(key=lambda g: grevlex_key(g.leading()[0]))
    return tuple(reduced)


def reduced_groebner(I: Ideal) -> tuple:
    return I.basis()


def contains_one(I: Ideal) -> bool:
    if I.is_zero():
        return False
    for g in I.gens:  # cheap pre-check: a nonzero constant generator
        if g.is_constant():
            return True
    b = I.basis()
    return len(b) == 1 and b[0].is_constant()


def ideal_equal(a: Ideal, b: Ideal) -> bool:
    if a.arity != b.arity:
        raise ValueError("arity mismatch")
    return a.basis() == b.basis()


def ideal_member(f: Poly, I: Ideal) -> bool:
    return I.contains(f)


def radical_membership(f: Poly, I: Ideal) -> bool:
    """Rabinowitsch trick: f in rad(I) iff I + (1 - t*f) is trivial."""
    if f.is_zero():
        return True
    n = I.arity
    ext = [g.insert_axis(n) for g in I.gens]
    t = Poly.var(n + 1, n)
    ext.append(Poly.const(n + 1, 1) - t * f.insert_axis(n))
    return contains_one(Ideal(n + 1, ext))


# -- sums, products, powers ---------------------------------------------------


def ideal_sum(a: Ideal, b: Ideal) -> Ideal:
    if a.arity != b.arity:
        raise ValueError("arity mismatch")
    return Ideal(a.arity, a.gens + b.gens)


def ideal_product(a: Ideal, b: Ideal) -> Ideal:
    if a.arity != b.arity:
        raise ValueError("arity mismatch")
    if a.is_zero() or b.is_zero():
        return Ideal(a.arity)
    return Ideal(a.arity, [f * g for f in a.gens for g in b.gens])


def ideal_power(a: Ideal, k: int) -> Ideal:
    if k < 0:
        raise ValueError("negative ideal power")
    if k == 0:
        return Ideal(a.arity, [Poly.const(a.arity, 1)])
    if a.is_zero():
        return Ideal(a.arity)
    gens = []
    for combo in itertools.combinations_with_replacement(a.gens, k):
        g = combo[0]
        for h in combo[1:]:
            g = g * h
        gens.append(g)
    return Ideal(a.arity, gens)


# -- derivative ideals --------------------------------------------------------


def _dedup(gens: Iterable[Poly]) -> list:
    seen = set()
    out = []
    for g in gens:
        if g.is_zero() or g in seen:
            continue
        seen.add(g)
        out.append(g)
    return out


def derivative_gens(gens: Sequence[Poly], variables: Sequence[int]) -> list:
    """Generators plus all first partials, in canonical order (pruned)."""
    out = list(gens)
    for g in gens:
        for v in variables:
            out.append(g.diff(v))
    return prune_gens(_dedup(out))


def log_derivative_gens(gens: Sequence[Poly], e_coords: Sequence[int],
                        variables: Sequence[int]) -> list:
    """Generators plus derivatives preserving the divisor coordinates.

    E-coordinates contribute x_H * d/dx_H, the rest plain partials.
    """
    eset = set(e_coords)
    out = list(gens)
    for g in gens:
        for v in variables:
            d = g.diff(v)
            if v in eset:
                d = d * Poly.var(g.arity, v)
            out.append(d)
    return prune_gens(_dedup(out))


def derivative_ideal(I: Ideal, variables: Sequence[int] | None = None) -> Ideal:
    vs = range(I.arity) if variables is None else variables
    return Ideal(I.arity, derivative_gens(I.gens, list(vs)))


def log_derivative_ideal(I: Ideal, e_coords: Sequence[int],
                         variables: Sequence[int] | None = None) -> Ideal:
    vs = range(I.arity) if variables is None else variables
    return Ideal(I.arity, log_derivative_gens(I.gens, e_coords, list(vs)))


def iterated_derivative(I: Ideal, e_coords: Sequence[int] | None, j: int,
                        variables: Sequence[int] | None = None) -> Ideal:
    out = I
    for _ in range(j):
        if e_coords:
            out = log_derivative_ideal(out, e_coords, variables)
        else:
            out = derivative_ideal(out, variables)
    return out


# -- orders and valuations ----------------------------------------------------


def poly_order_at(g: Poly, point) -> int | float:
    """Order of one polynomial at a rational point.

    Probes by evaluating g and its first two derivative layers before falling
    back to a full translation; the probe avoids expanding high-degree
    polynomials at points with nonzero coordinates.
    """
    if g.is_zero():
        return INFINITY
    if all(v == 0 for v in point):
        return g.order_at_origin()
    if g.evaluate(point) != 0:
        return 0
    layer = [g]
    for k in (1, 2):
        nxt = []
        seen = set()
        for h in layer:
            for v in range(g.arity):
                d = h.diff(v)
                if d.is_zero() or d in seen:
                    continue
                seen.add(d)
                if d.evaluate(point) != 0:
                    return k
                nxt.append(d)
        if not nxt:
            return INFINITY
        layer = nxt
    return g.translate(point).order_at_origin()


def order_at_point(I: Ideal, point: Sequence) -> int | float:
    """min over generators of the order at the point; infinity for (0)."""
    if I.is_zero():
        return INFINITY
    key = tuple(point)
    cached = I._ordcache.get(key)
    if cached is not None:
        return cached
    best = INFINITY
    for g in I.gens:
        o = poly_order_at(g, point)
        if o < best:
            best = o
            if best == 0:
                break
    I._ordcache[key] = best
    return best


def order_along_hyperplane(I: Ideal, var: int) -> int | float:
    """min over generators of the x_var-adic valuation; infinity for (0)."""
    if I.is_zero():
        return INFINITY
    best = INFINITY
    for g in I.gens:
        v = g.valuation(var)
        if v < best:
            best = v
            if best == 0:
                break
    return best


def order_along_subspace(gens: Sequence[Poly], coords: Iterable[int]) -> int | float:
    """min over generators of the order along the coordinate subspace V(coords)."""
    cs = set(coords)
    best = INFINITY
    for g in gens:
        if g.is_zero():
            continue
        o = min(sum(e[i] for i in cs) for e in g.terms)
        if o < best:
            best = o
            if best == 0:
                break
    return best
