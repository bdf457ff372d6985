"""Stateful descent through companion and coefficient ideals.

The invariant of a point is assembled by a recursion that is *not* memoryless:
each round fixes constants when it starts (the residual order entering the
pair, the divisor snapshot whose count enters as s) and those constants stay
in force while the round's companion still has cosupport at the point.  The
towers below hold that state per chart and per divisor stratum; blow-ups
transform every level, and levels that lose the point (or fail the exact
divisibility of their weak transform) are rebuilt on the spot, which realizes
the neighbourhood-restart reading of the recursion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm

from .algebra import (Ideal, derivative_gens, ideal_power,
                      order_along_hyperplane, order_at_point, poly_order_at,
                      prune_gens)
from .charts import Chart, solve_graph_at
from .invariant import (INF, TERM_INF, TERM_ZERO, InvariantValue, MonomialMark,
                        monomial_J)
from .poly import Poly


class DescentError(RuntimeError):
    """The recursion cannot continue at this point (no polynomial contact)."""


@dataclass
class DivView:
    label: int
    coord: int


@dataclass
class Contact:
    target: int
    psi: Poly     # graph relation: x_target == psi on the contact hypersurface


@dataclass
class SRound:
    year: int
    s: int
    jt: "Tower"   # the J-tower; identical to the coefficient tower when s == 0


@dataclass
class Round:
    year: int
    nu: Fraction            # residual order / marking, fixed at formation
    g: Ideal | None         # companion transform; None = dead here
    g_d: int
    snapshot: tuple         # divisor labels counted by s for this round
    contact: Contact | None = None
    coeff: "Tower | None" = None
    d_coeff: int = 0
    sround: SRound | None = None


@dataclass
class Tower:
    ideal: Ideal
    d: int
    frame: tuple            # active chart variable indices
    divisors: list          # DivView accumulated since this level formed
    round: Round | None = None


@dataclass
class EvalContext:
    chart: Chart
    year: int
    shear_rounds: int = 32
    build: bool = True


# -- helpers -------------------------------------------------------------------


def _monomial_data(tower: Tower):
    exps = []
    mono = {}
    for dv in tower.divisors:
        k = order_along_hyperplane(tower.ideal, dv.coord)
        if k > 0:
            exps.append((dv, k))
            mono[dv.coord] = k
    gens = []
    for g in tower.ideal.gens:
        h = g.divexact_monomial(mono)
        assert h is not None
        gens.append(h)
    return exps, Ideal(tower.ideal.arity, gens)


def _s_count(chart: Chart, labels, p) -> int:
    count = 0
    for lab in labels:
        d = chart.divisor(lab)
        if d.alive and p[d.coord] == 0:
            count += 1
    return count


def _power_cost(base: Ideal, k: int) -> int:
    """Upper bound for the work of raising an ideal to the k-th power."""
    if k <= 1 or base.is_zero():
        return len(base.gens)
    gens = comb(len(base.gens) + k - 1, k)
    widest = max(len(g.terms) for g in base.gens)
    terms = comb(widest + k - 1, k) if widest > 1 else 1
    return max(gens, min(terms, 10 ** 9))


def _fold_marked(terms):
    """Left fold of marked sums over (Ideal, marking) pairs."""
    ideal, d = terms[0]
    for nxt, e in terms[1:]:
        l = lcm(d, e)
        for base, k in ((ideal, l // d), (nxt, l // e)):
            if _power_cost(base, k) > 50_000:
                raise DescentError(
                    f"marked-sum power {k} of the coefficient ladder "
                    f"is beyond desk scale")
        gens = ideal_power(ideal, l // d).gens + ideal_power(nxt, l // e).gens
        ideal, d = Ideal(ideal.arity, gens), l
    return ideal, d


def _build_companion(nres: Ideal, onp: int, d: int, exps, arity: int):
    if onp >= d:
        return nres, onp
    e = [0] * arity
    for dv, k in exps:
        e[dv.coord] = k
    mono = Ideal(arity, [Poly.monomial(arity, e)])
    return _fold_marked([(nres, onp), (mono, d - onp)])


def _contact_at(g: Ideal, g_d: int, frame, p, rounds: int):
    """First solvable order-1 section of D^(g_d-1) of the companion at p.

    The ladder is walked layer by layer, keeping only derivatives that can
    still reach order one within the remaining differentiations; candidates
    are collected in the canonical enumeration order.  A work budget turns
    pathologically large ladders into a diagnostic instead of a stall.
    """
    candidates = []
    layer = []
    seen = set()
    budget = 200_000
    for h in g.gens:
        seen.add(h)
        o = poly_order_at(h, p)
        if o == 1:
            candidates.append(h)
        if o <= g_d and g_d > 1:  # order 1 still reachable within g_d - 1 steps
            layer.append(h)
    for j in range(1, g_d):
        remaining = g_d - 1 - j  # differentiations still available afterwards
        nxt = []
        for h in layer:
            for v in frame:
                dh = h.diff(v)
                if dh.is_zero() or dh in seen:
                    continue
                seen.add(dh)
                o = poly_order_at(dh, p)
                if o == 1:
                    candidates.append(dh)
                if o <= remaining + 1 and remaining > 0:
                    nxt.append(dh)
                budget -= len(dh.terms)
        if budget < 0:
            raise DescentError(
                f"derivative ladder of marking {g_d} is beyond desk scale")
        layer = prune_gens(nxt)
        if not layer:
            break
    for gen in candidates:
        local = gen.translate(p)
        for v in frame:
            if local.linear_coeff(v) == 0:
                continue
            psi = solve_graph_at(gen, v, p, rounds)
            if psi is not None:
                return v, psi
    return None


def _build_coeff(g: Ideal, g_d: int, frame, target: int, psi: Poly):
    """Coefficient ladder restricted to the contact graph, left-fold marked sum."""
    arity = g.arity
    terms = []
    gens = list(g.gens)
    budget = 200_000
    for j in range(g_d):
        restricted = Ideal(arity, [h.substitute({target: psi}) for h in gens])
        terms.append((restricted, g_d - j))
        if j + 1 < g_d:
            budget -= sum(len(h.terms) for h in gens) * (len(frame) + 1)
            if budget < 0:
                raise DescentError(
                    f"coefficient ladder of marking {g_d} is beyond desk scale")
            gens = derivative_gens(gens, frame)
    ideal, d_c = _fold_marked(terms)
    subframe = tuple(i for i in frame if i != target)
    return Tower(ideal, d_c, subframe, []), d_c


def _build_boundary(ctx: EvalContext, r: Round, tower: Tower, s: int):
    """J = C + E-ideal for the s-element subsets of the snapshot divisors."""
    import itertools
    arity = tower.ideal.arity
    t, psi = r.contact.target, r.contact.psi
    alive = []
    for lab in r.snapshot:
        d = ctx.chart.divisor(lab)
        if d.alive:
            alive.append(d)
    factors = []
    for combo in itertools.combinations(alive, s):
        gens = []
        for d in combo:
            x = Poly.var(arity, d.coord).substitute({t: psi})
            gens.append(x ** r.d_coeff)
        factors.append(Ideal(arity, gens))
    e_ideal = factors[0]
    for f in factors[1:]:
        if e_ideal.is_zero() or f.is_zero():
            e_ideal = Ideal(arity)
            break
        e_ideal = Ideal(arity, [a * b for a in e_ideal.gens for b in f.gens])
    j_ideal = Ideal(arity, r.coeff.ideal.gens + e_ideal.gens)
    return Tower(j_ideal, r.d_coeff, r.coeff.frame, [])


# -- the descent ----------------------------------------------------------------


def descend(ctx: EvalContext, tower: Tower, p, path=None):
    """Yield ("pair", nu, s) events then one ("end", terminator, mu, J_labels)."""
    I, d = tower.ideal, tower.d
    if I.is_zero():
        if path is not None:
            path.append(("zero", tower))
        yield ("end", TERM_INF, INF, ())
        return
    exps, nres = _monomial_data(tower)

    r = tower.round
    r_ok = (r is not None and r.g is not None
            and order_at_point(r.g, p) >= r.g_d)
    if not r_ok:
        onp = order_at_point(nres, p)
        if onp == 0:
            mu = Fraction(order_at_point(I, p), d)
            alpha = {dv.label: k for dv, k in exps if p[dv.coord] == 0}
            universe = sorted(alpha)
            J = monomial_J(alpha, d, universe)
            assert J is not None, "cosupport point without admissible divisor subset"
            coords = {dv.label: dv.coord for dv, _ in exps}
            if path is not None:
                path.append(("monomial", tower, mu, J, tuple(coords[l] for l in J)))
            yield ("end", TERM_ZERO, mu, J)
            return
        g, g_d = _build_companion(nres, onp, d, exps, I.arity)
        r = Round(ctx.year, Fraction(onp, d), g, g_d,
                  tuple(dv.label for dv in tower.divisors))
        if ctx.build:
            tower.round = r

    # the pair is known before any contact work, so dominated strata can be
    # pruned without forcing a (possibly impossible) contact construction
    s_p = _s_count(ctx.chart, r.snapshot, p)
    yield ("pair", r.nu, s_p)

    contact_ok = (r.contact is not None and r.coeff is not None
                  and r.contact.psi.evaluate(p) == p[r.contact.target]
                  and order_at_point(r.coeff.ideal, p) >= r.d_coeff)
    if not contact_ok:
        found = _contact_at(r.g, r.g_d, tower.frame, p, ctx.shear_rounds)
        if found is None:
            raise DescentError(
                f"maximal contact not polynomially available in chart "
                f"{ctx.chart.cid} at {tuple(p)}")
        v, psi = found
        coeff, d_c = _build_coeff(r.g, r.g_d, tower.frame, v, psi)
        # divisors created since this round formed restrict to the contact
        # hypersurface and stay in view (the formation-time ones do not:
        # the coefficient construction forgets them into the E-ideal)
        snap = set(r.snapshot)
        coeff.divisors = [DivView(dv.label, dv.coord) for dv in tower.divisors
                          if dv.label not in snap and dv.coord != v]
        assert order_at_point(coeff.ideal, p) >= d_c
        if ctx.build:
            r.contact, r.coeff, r.d_coeff, r.sround = Contact(v, psi), coeff, d_c, None
        else:
            r = Round(r.year, r.nu, r.g, r.g_d, r.snapshot,
                      Contact(v, psi), coeff, d_c, None)

    sr = r.sround
    sr_ok = (sr is not None and sr.s == s_p
             and (sr.jt is r.coeff or order_at_point(sr.jt.ideal, p) >= sr.jt.d))
    if not sr_ok:
        if s_p == 0:
            jt = r.coeff
        else:
            jt = _build_boundary(ctx, r, tower, s_p)
        sr = SRound(ctx.year, s_p, jt)
        if ctx.build:
            r.sround = sr

    if path is not None:
        path.append(("level", tower, r, sr))
    yield from descend(ctx, sr.jt, p, path)


def evaluate(ctx: EvalContext, tower: Tower, p, path=None):
    """Run the descent to completion; returns (InvariantValue, MonomialMark)."""
    pairs = []
    for ev in descend(ctx, tower, p, path):
        if ev[0] == "pair":
            pairs.append((ev[1], ev[2]))
        else:
            _, term, mu, J = ev
            return InvariantValue(tuple(pairs), term), MonomialMark(mu, tuple(J))
    raise AssertionError("descent ended without terminator")


# -- transforms of towers --------------------------------------------------------


def _weak_gens(gens, images, elims, k, dpow):
    out = []
    for g in gens:
        h = g.substitute(images)
        for t, psi in elims:
            h = h.substitute({t: psi})
        if not h.is_zero():
            h = h.divexact_var(k, dpow)
            if h is None:
                return None
        out.append(h)
    return out


def transform_tower(tower: Tower, images, elims, k: int, new_label: int,
                    base, rounds: int, frame=None, wipe_round: bool = False):
    """Weak transform of a tower under a blow-up chart; None when it dies.

    `frame` overrides the level's frame when an enclosing contact switched to
    a different graph variable; in that case the stale deeper rounds are wiped
    and rebuilt on demand.
    """
    new_frame = tower.frame if frame is None else frame
    gens = _weak_gens(tower.ideal.gens, images, elims, k, tower.d)
    if gens is None:
        return None
    fset = set(new_frame)
    divisors = [DivView(dv.label, dv.coord) for dv in tower.divisors
                if dv.coord != k and dv.coord in fset]
    if k in fset:
        divisors.append(DivView(new_label, k))
    out = Tower(Ideal(tower.ideal.arity, gens), tower.d, new_frame, divisors)
    if tower.round is not None and not wipe_round:
        out.round = _transform_round(tower.round, images, elims, k, new_label,
                                     base, rounds, new_frame)
    return out


def _transform_round(r: Round, images, elims, k, new_label, base, rounds, frame):
    g_gens = _weak_gens(r.g.gens, images, elims, k, r.g_d) if r.g is not None else None
    if g_gens is None:
        return None
    g = Ideal(r.g.arity, g_gens)
    out = Round(r.year, r.nu, g, r.g_d, r.snapshot)
    if r.contact is None or r.coeff is None:
        return out
    t = r.contact.target
    z = Poly.var(g.arity, t) - r.contact.psi
    z_gens = _weak_gens([z], images, elims, k, 1)
    if z_gens is None:
        return out
    # re-solve the transformed graph, preferring the old variable but allowing
    # a switch when the strict transform tilts onto a different coordinate
    t_new = None
    psi = None
    for v in (t, *(u for u in frame if u != t)):
        psi = solve_graph_at(z_gens[0], v, base, rounds)
        if psi is not None:
            t_new = v
            break
    if t_new is None:
        return out
    elims2 = list(elims) + [(t_new, psi)]
    subframe = tuple(u for u in frame if u != t_new)
    switched = t_new != t
    coeff = transform_tower(r.coeff, images, elims2, k, new_label, base, rounds,
                            frame=subframe, wipe_round=switched)
    if coeff is None:
        return out
    out.contact, out.coeff, out.d_coeff = Contact(t_new, psi), coeff, r.d_coeff
    if r.sround is not None and not switched:
        if r.sround.jt is r.coeff:
            out.sround = SRound(r.sround.year, r.sround.s, coeff)
        else:
            jt = transform_tower(r.sround.jt, images, elims2, k, new_label,
                                 base, rounds, frame=subframe)
            if jt is not None:
                out.sround = SRound(r.sround.year, r.sround.s, jt)
    return out


def reexpress_tower(tower: Tower, tau, base, rounds: int):
    """Rewrite all stored data through a chart re-coordinatization tau."""
    gens = [g.substitute(tau) for g in tower.ideal.gens]
    out = Tower(Ideal(tower.ideal.arity, gens), tower.d, tower.frame,
                [DivView(dv.label, dv.coord) for dv in tower.divisors])
    r = tower.round
    if r is None:
        return out
    g = Ideal(r.g.arity, [h.substitute(tau) for h in r.g.gens]) if r.g is not None else None
    nr = Round(r.year, r.nu, g, r.g_d, r.snapshot)
    out.round = nr
    if r.contact is None or r.coeff is None or g is None:
        return out
    t = r.contact.target
    z = (Poly.var(tower.ideal.arity, t) - r.contact.psi).substitute(tau)
    psi = solve_graph_at(z, t, base, rounds)
    if psi is None:
        return out
    coeff = reexpress_tower(r.coeff, tau, base, rounds)
    nr.contact, nr.coeff, nr.d_coeff = Contact(t, psi), coeff, r.d_coeff
    if r.sround is not None:
        if r.sround.jt is r.coeff:
            nr.sround = SRound(r.sround.year, r.sround.s, coeff)
        else:
            nr.sround = SRound(r.sround.year, r.sround.s,
                               reexpress_tower(r.sround.jt, tau, base, rounds))
    return out


# -- center extraction ------------------------------------------------------------


@dataclass
class CenterPlan:
    coords: tuple                 # coordinates of the center after any shears
    shears: dict = field(default_factory=dict)  # target -> polynomial offset
    bottom: str = "zero"          # "zero" or "monomial"
    j_labels: tuple = ()
    mu: object = INF


def extract_center(arity: int, top_frame, path) -> CenterPlan:
    """Coordinate form of the subspace reached at the bottom of a descent."""
    zero_base = set(range(arity)) - set(top_frame)
    targets = []
    for entry in path:
        if entry[0] == "level":
            _, _, r, _ = entry
            targets.append((r.contact.target, r.contact.psi))
    bottom = path[-1]
    plan = CenterPlan(())
    if bottom[0] == "monomial":
        _, _, mu, j_labels, j_coords = bottom
        zero_base |= set(j_coords)
        plan.bottom, plan.j_labels, plan.mu = "monomial", tuple(j_labels), mu
    values: dict[int, Poly] = {}
    psi_of = dict(targets)

    def val(v: int) -> Poly:
        if v in values:
            return values[v]
        if v in zero_base:
            out = Poly.zero(arity)
        elif v in psi_of:
            psi = psi_of[v]
            out = psi.substitute({w: val(w) for w in psi.variables()})
        else:
            out = Poly.var(arity, v)
        values[v] = out
        return out

    shears = {}
    for t, _ in targets:
        r = val(t)
        if not r.is_zero():
            shears[t] = r
    plan.coords = tuple(sorted(zero_base | {t for t, _ in targets}))
    plan.shears = shears
    return plan
