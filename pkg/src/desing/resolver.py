"""The resolution loop: stratum evaluation, center selection, blow-ups,
verification, overlap consistency, and the hypersurface wrapper.

Per year, every leaf chart enumerates divisor strata, evaluates the invariant
at their origins (lazily, pruning dominated strata), and the charts attaining
the global maximum of (inv, J) blow up the center extracted from the bottom of
their descent.  When a maximal stratum is not coordinate-alignable in its own
chart (the needed shear would move an exceptional coordinate) the engine acts
in a sibling chart where the same point is alignable and cedes the stratum to
that subtree.  Years in which a chart does not act are identity steps.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import Ideal, contains_one, order_along_subspace, order_at_point
from .charts import (Center, Chart, apply_reparam, blowup_charts, root_chart,
                     shear_map)
from .descent import (CenterPlan, DescentError, DivView, EvalContext, Tower,
                      descend, evaluate, extract_center, reexpress_tower,
                      transform_tower)
from .invariant import (INF, TERM_INF, TERM_ZERO, InvariantValue, MonomialMark,
                        compare_decrease, subset_compare)
from .marked import (MarkedIdeal, admissible_verdict, cosupp_empty,
                     transform_admissible)
from .poly import Poly

_T_ZERO = (0,)
_T_INF = (2,)


def _tok(x):
    return (1, Fraction(x))


class ResolverError(RuntimeError):
    pass


@dataclass
class RunOptions:
    max_steps: int = 64
    trace: int = 0
    shear_rounds: int = 32

    def __post_init__(self):
        if self.max_steps < 1:
            raise ResolverError("max_steps must be >= 1")


@dataclass
class Node:
    chart: Chart
    marked: MarkedIdeal | None
    born_year: int = 0
    towers: dict = field(default_factory=dict)   # base point -> Tower
    ceded: set = field(default_factory=set)      # strata handled by a sibling subtree
    children: list = field(default_factory=list)
    closed_year: int | None = None

    def is_leaf_at(self, year: int) -> bool:
        return self.born_year < year and (self.closed_year is None or self.closed_year >= year)


@dataclass
class CenterRecord:
    year: int
    chart_id: str
    coords: tuple
    inv: InvariantValue
    mark: MonomialMark
    gens: tuple
    d: int
    bottom_d: int


@dataclass
class EvalRecord:
    chart_id: str
    point: tuple
    inv: str
    mu: str
    j_labels: tuple
    complete: bool


@dataclass
class YearRecord:
    year: int
    evals: list = field(default_factory=list)
    centers: list = field(default_factory=list)
    deferred: bool = False


class ResolutionTree:
    def __init__(self, root: Node):
        self.nodes: dict[str, Node] = {root.chart.cid: root}
        self.root_id = root.chart.cid
        self.years: list[YearRecord] = []
        self.next_label = 1 + max((d.label for d in root.chart.divisors), default=-1)
        self.status = "running"
        self.note = ""
        self.warnings: list[str] = []

    def chart(self, cid: str) -> Chart:
        return self.nodes[cid].chart

    def current_leaves(self):
        return [n for n in self.nodes.values() if n.closed_year is None]


# -- the engine -----------------------------------------------------------------


class Engine:
    def __init__(self, tree: ResolutionTree, opts: RunOptions):
        self.tree = tree
        self.opts = opts

    # towers -------------------------------------------------------------

    def _fresh_top(self, node: Node) -> Tower:
        m = node.marked
        return Tower(m.ideal, m.d, m.frame,
                     [DivView(d.label, d.coord) for d in m.e_view])

    def stratum_origin(self, node: Node, key) -> tuple:
        m = node.marked
        p = [Fraction(0)] * m.ideal.arity
        for d in m.e_view:
            if d.label not in key:
                p[d.coord] = Fraction(1)
        return tuple(p)

    def tower(self, node: Node, p) -> Tower:
        p = tuple(Fraction(v) for v in p)
        if p in node.towers:
            return node.towers[p]
        t = None
        link = node.chart.parent
        if link is not None and link.parent_id in self.tree.nodes:
            parent = self.tree.nodes[link.parent_id]
            if parent.marked is not None:
                img = tuple(g.evaluate(p) for g in link.submap)
                ptower = self.tower(parent, img)
                new_label = node.chart.divisors[-1].label
                t = transform_tower(ptower, dict(enumerate(link.submap)), [],
                                    link.chart_var, new_label, p,
                                    self.opts.shear_rounds)
        if t is None:
            t = self._fresh_top(node)
        else:
            t.ideal = node.marked.ideal
            t.divisors = [DivView(d.label, d.coord) for d in node.marked.e_view]
        node.towers[p] = t
        return t

    def eval_at(self, node: Node, p, year: int, build: bool = True, path=None):
        ctx = EvalContext(node.chart, year, self.opts.shear_rounds, build)
        return evaluate(ctx, self.tower(node, p), tuple(p), path)

    # candidates and selection --------------------------------------------

    def candidates(self, year: int):
        out = []
        for cid in sorted(self.tree.nodes):
            node = self.tree.nodes[cid]
            if node.closed_year is not None or node.marked is None:
                continue
            m = node.marked
            labels = [d.label for d in m.e_view]
            seen = set()
            for r in range(len(labels), -1, -1):
                for combo in itertools.combinations(labels, r):
                    p = self.stratum_origin(node, frozenset(combo))
                    if p in seen or p in node.ceded:
                        continue
                    seen.add(p)
                    if order_at_point(m.ideal, p) >= m.d:
                        out.append((node, p))
        return out

    def select(self, cands, year: int):
        """Lazily run descents, prune dominated strata, and return winners."""
        states = []
        for node, p in cands:
            ctx = EvalContext(node.chart, year, self.opts.shear_rounds, True)
            gen = descend(ctx, self.tower(node, p), p)
            states.append({"node": node, "p": p, "gen": gen,
                           "tokens": [], "done": False, "err": None,
                           "end": None, "dead": False})

        def pull(st):
            try:
                ev = next(st["gen"])
            except DescentError as e:
                st["err"] = e
                return
            except StopIteration:
                st["done"] = True
                return
            if ev[0] == "pair":
                st["tokens"].extend((_tok(ev[1]), _tok(ev[2])))
            else:
                st["tokens"].append(_T_INF if ev[1] == TERM_INF else _T_ZERO)
                st["done"] = True
                st["end"] = (ev[1], ev[2], ev[3])

        def dominated(a, b) -> bool:
            for x, y in zip(a["tokens"], b["tokens"]):
                if x != y:
                    return x < y
            return False

        while True:
            progress = False
            for st in states:
                if not (st["done"] or st["err"] or st["dead"]):
                    pull(st)
                    progress = True
            for st in states:
                if st["dead"]:
                    continue
                for other in states:
                    if other is st or other["dead"] or other["err"]:
                        continue
                    if dominated(st, other):
                        st["dead"] = True
                        break
            if all(st["done"] or st["err"] or st["dead"] for st in states):
                break
            if not progress:
                break

        finished = [st for st in states if st["done"] and not st["dead"]]
        if not finished:
            stuck = [st for st in states if st["err"]]
            raise stuck[0]["err"] if stuck else ResolverError("no stratum completed")
        best = max(tuple(st["tokens"]) for st in finished)
        for st in states:
            if st["err"] and not st["dead"]:
                prefix = tuple(st["tokens"])
                if best[:len(prefix)] == prefix:
                    raise st["err"]
        winners = [st for st in finished if tuple(st["tokens"]) == best]
        universe = list(range(self.tree.next_label))
        best_j = None
        for st in winners:
            j = st["end"][2]
            if best_j is None or subset_compare(j, best_j, universe) > 0:
                best_j = j
        winners = [st for st in winners
                   if subset_compare(st["end"][2], best_j, universe) == 0]
        return states, winners, best

    # acting on a winner ----------------------------------------------------

    def plan_center(self, node: Node, p, year: int) -> CenterPlan:
        path: list = []
        self.eval_at(node, p, year, build=True, path=path)
        return extract_center(node.marked.ideal.arity, node.marked.frame, path)

    def blocked_shears(self, node: Node, plan: CenterPlan):
        return [t for t in plan.shears if t in node.chart.e_coords()]

    def siblings_of(self, node: Node):
        link = node.chart.parent
        if link is None:
            return
        for cid in sorted(self.tree.nodes):
            sib = self.tree.nodes[cid]
            if (sib is not node and sib.chart.parent is not None
                    and sib.chart.parent.parent_id == link.parent_id
                    and sib.chart.born_center == node.chart.born_center
                    and sib.closed_year is None and sib.marked is not None):
                yield sib

    def redirect(self, node: Node, p, year: int):
        """Find a sibling chart where the same point has an alignable center."""
        for sib in self.siblings_of(node):
            q = chart_transition(node.chart, sib.chart, p)
            if q is None:
                continue
            if order_at_point(sib.marked.ideal, q) < sib.marked.d:
                continue
            try:
                plan = self.plan_center(sib, q, year)
            except DescentError:
                continue
            if self.blocked_shears(sib, plan):
                continue
            return sib, q, plan
        return None

    def apply_shears(self, node: Node, shears: dict):
        chart = node.chart
        tau = {}
        tau_inv = {}
        for t, offset in shears.items():
            if t in chart.e_coords():
                raise DescentError(
                    f"center straightening needs the exceptional coordinate "
                    f"{chart.names[t]} in chart {chart.cid}")
            tau.update(shear_map(chart.arity, t, offset))  # old x_t = new x_t + offset
            tau_inv[t] = Poly.var(chart.arity, t) - offset
        node.chart = apply_reparam(chart, tau, tau_inv)
        m = node.marked
        gens = [g.substitute(tau) for g in m.ideal.gens]
        node.marked = MarkedIdeal(node.chart, Ideal(m.ideal.arity, gens), m.d,
                                  frame=m.frame, e_labels=m.e_labels)
        inv_tau = {t: Poly.var(chart.arity, t) - off for t, off in shears.items()}
        new_towers = {}
        for p, tw in node.towers.items():
            q = tuple(inv_tau[i].evaluate(p) if i in inv_tau else p[i]
                      for i in range(chart.arity))
            new_towers[q] = reexpress_tower(tw, tau, q, self.opts.shear_rounds)
        node.towers = new_towers
        node.ceded = {tuple(inv_tau[i].evaluate(p) if i in inv_tau else p[i]
                            for i in range(chart.arity)) for p in node.ceded}

    def blow_up(self, node: Node, coords: tuple, year: int):
        m = node.marked
        if not admissible_verdict(m, coords):
            raise ResolverError(
                f"selected center {coords} inadmissible in chart {node.chart.cid}")
        label = self.tree.next_label
        self.tree.next_label += 1
        center = Center(node.chart.cid, tuple(sorted(coords)))
        children = blowup_charts(node.chart, center, label, year)
        for chart in children:
            k = chart.parent.chart_var
            if k in m.frame:
                child_marked = transform_admissible(m, chart)
            else:
                child_marked = None
            child = Node(chart, child_marked, born_year=year)
            # regions ceded to a sibling subtree stay ceded in the children
            for p in node.ceded:
                if p[k] != 0:
                    q = list(p)
                    for i in coords:
                        if i != k:
                            q[i] = p[i] / p[k]
                    child.ceded.add(tuple(q))
            self.tree.nodes[chart.cid] = child
            node.children.append(chart.cid)
        node.closed_year = year


# -- driving --------------------------------------------------------------------


def _mu_str(mu) -> str:
    if mu == INF:
        return "inf"
    f = Fraction(mu)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _prefix_inv_str(tokens) -> str:
    parts = []
    i = 0
    while i + 1 < len(tokens) and tokens[i][0] == 1 and tokens[i + 1][0] == 1:
        parts.append(f"{_mu_str(tokens[i][1])},{tokens[i + 1][1]}")
        i += 2
    if i < len(tokens) and tokens[i][0] != 1:
        parts.append("inf" if tokens[i] == _T_INF else "0")
        return "[" + ";".join(parts) + "]"
    return "[" + ";".join(parts + ["..."]) + "]"


def _inv_of(st) -> InvariantValue:
    return InvariantValue(
        tuple((st["tokens"][i][1], int(st["tokens"][i + 1][1]))
              for i in range(0, len(st["tokens"]) - 1, 2)),
        st["end"][0])


def _eval_key(e: EvalRecord):
    from .invariant import parse_invariant
    return parse_invariant(e.inv).tokens()


def resolve(m: MarkedIdeal, opts: RunOptions | None = None) -> ResolutionTree:
    """Resolve the marked ideal; the tree records every year's data.

    Status on return: "resolved" when every leaf verifies cosupport-empty,
    "sampled" when the sampled strata are exhausted but some leaf still has
    off-stratum cosupport, "step_limit" or "stuck" for the diagnostic endings
    (the partial tree is always returned, never discarded).
    """
    opts = opts or RunOptions()
    tree = ResolutionTree(Node(m.chart, m, born_year=0))
    eng = Engine(tree, opts)
    prev_best = None
    prev_deferred = False
    for year in range(1, opts.max_steps + 1):
        cands = eng.candidates(year)
        if not cands:
            break
        try:
            states, winners, best = eng.select(cands, year)
        except DescentError as e:
            tree.status = "stuck"
            tree.note = str(e)
            break
        record = YearRecord(year)
        for st in states:
            if st["done"]:
                record.evals.append(EvalRecord(
                    st["node"].chart.cid, st["p"], _inv_of(st).serialize(),
                    _mu_str(st["end"][1]), tuple(st["end"][2]), True))
            else:
                record.evals.append(EvalRecord(
                    st["node"].chart.cid, st["p"],
                    _prefix_inv_str(st["tokens"]), "", (), False))
        if prev_best is not None and best > prev_best and not prev_deferred:
            tree.status = "stuck"
            tree.note = f"invariant failed to decrease at year {year}"
            tree.years.append(record)
            break

        # route each winner to a chart where its center is coordinate-alignable
        actions = []   # (node, point, plan, inv, mark)
        failed = None
        for st in winners:
            node, p = st["node"], st["p"]
            plan = eng.plan_center(node, p, year)
            if eng.blocked_shears(node, plan):
                rerouted = eng.redirect(node, p, year)
                if rerouted is None:
                    failed = DescentError(
                        f"center at {tuple(p)} in chart {node.chart.cid} is not "
                        f"coordinate-alignable in any chart")
                    break
                node.ceded.add(tuple(p))
                node, p, plan = rerouted
            actions.append((node, p, plan, _inv_of(st),
                            MonomialMark(st["end"][1], tuple(st["end"][2]))))
        if failed is not None:
            tree.status = "stuck"
            tree.note = str(failed)
            tree.years.append(record)
            break

        # the same global center must act in every sibling chart whose
        # cosupport meets it; charts that cannot align their piece cede the
        # overlap to the acting subtree
        idx = 0
        while idx < len(actions):
            node, p0, plan, inv0, mark0 = actions[idx]
            idx += 1
            if not plan.coords:
                continue
            for sib in eng.siblings_of(node):
                for sample in _plan_samples(node.chart.arity, plan):
                    q = chart_transition(node.chart, sib.chart, sample)
                    if q is None or q in sib.ceded:
                        continue
                    if order_at_point(sib.marked.ideal, q) < sib.marked.d:
                        continue
                    covered = any(a[0] is sib and plan_contains(a[2], q)
                                  for a in actions)
                    if covered:
                        continue
                    if any(a[0] is sib for a in actions):
                        tree.warnings.append(
                            f"year {year}: {sib.chart.cid} meets a second center; deferred")
                        continue
                    try:
                        plan2 = eng.plan_center(sib, q, year)
                        blocked = bool(eng.blocked_shears(sib, plan2))
                    except DescentError:
                        blocked = True
                        plan2 = None
                    if blocked:
                        sib.ceded.add(tuple(q))
                        continue
                    inv_q, mark_q = eng.eval_at(sib, q, year, build=True)
                    actions.append((sib, q, plan2, inv_q, mark_q))

        by_node: dict[str, list] = {}
        for act in actions:
            by_node.setdefault(act[0].chart.cid, []).append(act)
        deferred = False
        for cid, group in by_node.items():
            node = group[0][0]
            plan, inv, mark = group[0][2], group[0][3], group[0][4]
            if any(a[2].coords != plan.coords or a[2].shears.keys() != plan.shears.keys()
                   for a in group[1:]):
                deferred = True
            p0 = group[0][1]
            bottom_d = _bottom_marking(eng, node, p0, year)
            if plan.shears:
                try:
                    eng.apply_shears(node, plan.shears)
                except DescentError as e:
                    tree.status = "stuck"
                    tree.note = str(e)
                    tree.years.append(record)
                    return tree
            record.centers.append(CenterRecord(
                year, cid, plan.coords, inv, mark,
                node.marked.ideal.gens, node.marked.d, bottom_d))
            if plan.coords:
                eng.blow_up(node, plan.coords, year)
            else:
                node.closed_year = year  # total collapse: center is all of N
        record.deferred = deferred
        tree.years.append(record)
        prev_best, prev_deferred = best, deferred
    else:
        if eng.candidates(opts.max_steps + 1):
            tree.status = "step_limit"
            tree.note = f"step limit {opts.max_steps} reached"
    if tree.status == "running":
        tree.status = "resolved" if all(
            n.marked is None or cosupp_empty(n.marked)
            for n in tree.current_leaves()) else "sampled"
    return tree


def _bottom_marking(eng: Engine, node: Node, p, year: int) -> int:
    path: list = []
    eng.eval_at(node, p, year, build=True, path=path)
    return path[-1][1].d


def resolve_monomial(m: MarkedIdeal, opts: RunOptions | None = None) -> ResolutionTree:
    """Combinatorial phase: requires the residual part to be trivial on cosupp."""
    from .marked import factor_monomial, max_order, cosupport_ideal
    _, residual = factor_monomial(m)
    c = max_order(m.with_ideal(residual, m.d), constraint=cosupport_ideal(m))
    if c != 0:
        raise ResolverError("not in the monomial case: residual has positive order")
    return resolve(m, opts)


def step_I_driver(g: MarkedIdeal, opts: RunOptions | None = None) -> ResolutionTree:
    """Resolution of a maximal-order marked ideal (contact + boundary rounds)."""
    from .marked import is_maximal_order
    if not is_maximal_order(g):
        raise ResolverError("step I requires a marked ideal of maximal order")
    return resolve(g, opts)


def step_II_driver(m: MarkedIdeal, opts: RunOptions | None = None) -> ResolutionTree:
    """General case: drives companion rounds with strictly dropping residual order."""
    from .marked import factor_monomial, max_order, cosupport_ideal
    _, residual = factor_monomial(m)
    c = max_order(m.with_ideal(residual, m.d), constraint=cosupport_ideal(m))
    if c == 0:
        raise ResolverError("residual is trivial; use resolve_monomial")
    return resolve(m, opts)


# -- verification -----------------------------------------------------------------


def verify_resolved(tree: ResolutionTree) -> dict:
    """Re-derive leaf emptiness and every recorded center's admissibility."""
    leaves = []
    ok = True
    for node in tree.current_leaves():
        if node.marked is None:
            leaves.append({"chart": node.chart.cid, "status": "vacuous"})
            continue
        empty = cosupp_empty(node.marked)
        ok = ok and empty
        leaves.append({"chart": node.chart.cid,
                       "status": "empty" if empty else "nonempty"})
    centers = []
    for rec in (c for y in tree.years for c in y.centers):
        if not rec.coords:
            centers.append({"year": rec.year, "chart": rec.chart_id, "admissible": True})
            continue
        good = order_along_subspace(rec.gens, rec.coords) >= rec.d
        ok = ok and good
        centers.append({"year": rec.year, "chart": rec.chart_id,
                        "admissible": bool(good)})
    return {"resolved": ok and all(l["status"] != "nonempty" for l in leaves),
            "all_centers_admissible": all(c["admissible"] for c in centers),
            "leaves": leaves, "centers": centers}


def sibling_transition(p, center_coords, k1: int, k2: int):
    """Point transition between two charts of one blow-up; None off the overlap."""
    if p[k2] == 0:
        return None
    q = [Fraction(v) for v in p]
    inv = Fraction(1) / p[k2]
    for i in center_coords:
        if i == k2:
            continue
        q[i] = p[i] * inv
    q[k1] = inv
    q[k2] = p[k1] * p[k2]
    return tuple(q)


def chart_transition(c1: Chart, c2: Chart, p):
    """Sibling transition respecting any re-coordinatizations of either chart."""
    if c1.reparam is not None:
        p = tuple(g.evaluate(p) for g in c1.reparam)
    q = sibling_transition(p, c1.born_center, c1.parent.chart_var,
                           c2.parent.chart_var)
    if q is None:
        return None
    if c2.reparam_inv is not None:
        q = tuple(g.evaluate(q) for g in c2.reparam_inv)
    return tuple(Fraction(v) for v in q)


def plan_contains(plan: CenterPlan, q) -> bool:
    """Whether a point lies on the center a plan describes (pre-shear coords)."""
    for i in plan.coords:
        expected = plan.shears[i].evaluate(q) if i in plan.shears else 0
        if q[i] != expected:
            return False
    return True


def _center_samples(chart: Chart, coords, cap: int = 8):
    free = [i for i in range(chart.arity) if i not in coords]
    values = [Fraction(1), Fraction(2)]
    pts = []
    for combo in itertools.product(values, repeat=min(len(free), 3)):
        p = [Fraction(0)] * chart.arity
        for i, v in zip(free, combo):
            p[i] = v
        pts.append(tuple(p))
        if len(pts) >= cap:
            break
    if not pts:
        pts.append(tuple(Fraction(0) for _ in range(chart.arity)))
    return pts


def _plan_samples(arity: int, plan: CenterPlan, cap: int = 8):
    """Rational points on a planned center, in the chart's current coordinates."""
    free = [i for i in range(arity) if i not in plan.coords]
    values = [Fraction(1), Fraction(2)]
    pts = []
    for combo in itertools.product(values, repeat=min(len(free), 3)):
        p = [Fraction(0)] * arity
        for i, v in zip(free, combo):
            p[i] = v
        for t in plan.coords:
            if t in plan.shears:
                p[t] = Fraction(plan.shears[t].evaluate(p))
        pts.append(tuple(p))
        if len(pts) >= cap:
            break
    return pts


def overlap_consistency(tree: ResolutionTree, year: int) -> dict:
    """Check that sibling charts' recorded centers agree on chart overlaps."""
    record = next((y for y in tree.years if y.year == year), None)
    checks = 0
    failures = []
    if record is None:
        return {"year": year, "checks": 0, "failures": []}
    events = {c.chart_id: c for c in record.centers}
    for cid, rec in events.items():
        node = tree.nodes[cid]
        link = node.chart.parent
        if link is None or not rec.coords:
            continue
        siblings = [n for n in tree.nodes.values()
                    if n.chart.parent is not None
                    and n.chart.parent.parent_id == link.parent_id
                    and n.chart.cid != cid and n.is_leaf_at(year)]
        born = node.chart.born_center
        for sib in siblings:
            if sib.chart.born_center != born:
                continue
            other = events.get(sib.chart.cid)
            for p in _center_samples(node.chart, rec.coords):
                q = chart_transition(node.chart, sib.chart, p)
                if q is None:
                    continue
                checks += 1
                covered = (other is not None
                           and all(q[i] == 0 for i in other.coords))
                ceded = tuple(q) in sib.ceded
                if not covered and not ceded:
                    failures.append({"year": year, "from": cid, "to": sib.chart.cid,
                                     "point": [str(v) for v in q],
                                     "reason": "center not matched in sibling"})
    return {"year": year, "checks": checks, "failures": failures}


# -- strict transforms and the hypersurface wrapper ---------------------------------


def root_images(tree: ResolutionTree, node: Node) -> list:
    """Root coordinates expressed in this chart's coordinates (composed pullback)."""
    if node.chart.parent is None:
        n = node.chart.arity
        if node.chart.reparam is not None:
            return list(node.chart.reparam)
        return [Poly.var(n, i) for i in range(n)]
    parent = tree.nodes[node.chart.parent.parent_id]
    upper = root_images(tree, parent)
    images = dict(enumerate(node.chart.parent.submap))
    return [g.substitute(images) for g in upper]


def strict_transform_gens(tree: ResolutionTree, node: Node, gens) -> list:
    """Pull root polynomials back and divide out the full exceptional powers."""
    images = dict(enumerate(root_images(tree, node)))
    out = []
    for g in gens:
        h = g.substitute(images)
        for d in node.chart.divisors:
            if d.alive and d.birth > 0 and not h.is_zero():
                v = h.valuation(d.coord)
                if v:
                    h = h.divexact_var(d.coord, v)
        out.append(h)
    return out


def jacobian_gens(gens, variables) -> list:
    out = list(gens)
    for g in gens:
        for v in variables:
            out.append(g.diff(v))
    return out


def smoothness_report(tree: ResolutionTree, node: Node, strict) -> dict:
    """Smooth + simple-normal-crossings checks for a strict hypersurface."""
    arity = node.chart.arity
    f = strict[0]
    sing = Ideal(arity, jacobian_gens([f], range(arity)))
    smooth = contains_one(sing) or f.is_constant()
    snc = {}
    for d in node.chart.divisors:
        if not d.alive:
            continue
        gens = [f, Poly.var(arity, d.coord)]
        gens += [f.diff(j) for j in range(arity) if j != d.coord]
        snc[d.label] = contains_one(Ideal(arity, gens)) or f.is_constant()
    return {"chart": node.chart.cid, "smooth": bool(smooth),
            "snc": {k: bool(v) for k, v in snc.items()}}


def hypersurface_resolve(f: Poly, names, opts: RunOptions | None = None):
    """Resolve (f, 1) on affine space and report on the strict transform of V(f)."""
    if f.is_constant():
        raise ResolverError("hypersurface needs a nonconstant polynomial")
    chart = root_chart(names)
    m = MarkedIdeal(chart, Ideal(chart.arity, [f]), 1)
    tree = resolve(m, opts)
    reports = []
    for node in tree.current_leaves():
        strict = strict_transform_gens(tree, node, [f])
        reports.append(smoothness_report(tree, node, strict))
    return tree, {"charts": reports,
                  "smooth_everywhere": all(r["smooth"] for r in reports),
                  "snc_everywhere": all(all(r["snc"].values()) for r in reports)}


# -- invariant entry points ----------------------------------------------------------


def invariant_at(tree: ResolutionTree, chart_id: str, point=None, build: bool = False):
    """Invariant (inv, mu, J) of the current state at a rational cosupport point."""
    node = tree.nodes[chart_id]
    if node.marked is None:
        raise ResolverError("chart carries no marked ideal (N does not meet it)")
    eng = Engine(tree, RunOptions())
    if point is None:
        point = tuple(Fraction(0) for _ in range(node.chart.arity))
    point = tuple(Fraction(v) for v in point)
    if order_at_point(node.marked.ideal, point) < node.marked.d:
        raise ResolverError("point is not in the cosupport")
    year = len(tree.years) + 1
    return eng.eval_at(node, point, year, build=build)


def center_from_recursion(tree: ResolutionTree, chart_id: str, point=None) -> CenterPlan:
    """The coordinate subspace reached at the bottom of the recursion at a point."""
    node = tree.nodes[chart_id]
    if node.marked is None:
        raise ResolverError("chart carries no marked ideal")
    eng = Engine(tree, RunOptions())
    if point is None:
        point = tuple(Fraction(0) for _ in range(node.chart.arity))
    return eng.plan_center(node, tuple(Fraction(v) for v in point),
                           len(tree.years) + 1)


def fresh_tree(m: MarkedIdeal) -> ResolutionTree:
    """A zero-year tree around a marked ideal, for invariant queries."""
    return ResolutionTree(Node(m.chart, m, born_year=0))


# -- monotonicity report ---------------------------------------------------------------


def monotonicity_report(tree: ResolutionTree, opts: RunOptions | None = None) -> dict:
    """Strict-decrease checks at sampled points over every recorded center."""
    opts = opts or RunOptions()
    eng = Engine(tree, opts)
    failures = []
    checks = 0
    monomial_checks = 0
    persistence_checks = 0
    # off-center persistence: a chart that did not act keeps its values
    acted_years: dict[str, set] = {}
    for y in tree.years:
        for c in y.centers:
            acted_years.setdefault(c.chart_id, set()).add(c.year)
    seen: dict[tuple, tuple] = {}
    for y in tree.years:
        for e in y.evals:
            if not e.complete:
                continue
            key = (e.chart_id, e.point)
            prev = seen.get(key)
            if prev is not None:
                prev_year, prev_inv, prev_mu = prev
                untouched = not any(prev_year <= ay < y.year
                                    for ay in acted_years.get(e.chart_id, ()))
                if untouched:
                    persistence_checks += 1
                    if (e.inv, e.mu) != (prev_inv, prev_mu):
                        failures.append({"year": y.year, "chart": e.chart_id,
                                         "point": [str(v) for v in e.point],
                                         "reason": "values changed off the center",
                                         "new": e.inv, "old": prev_inv})
            seen[key] = (y.year, e.inv, e.mu)
    for record in tree.years:
        for rec in record.centers:
            node = tree.nodes[rec.chart_id]
            for cid in node.children:
                child = tree.nodes[cid]
                if child.marked is None:
                    continue
                m = child.marked
                labels = [d.label for d in m.e_view]
                seen = set()
                for r in range(len(labels), -1, -1):
                    for combo in itertools.combinations(labels, r):
                        q = eng.stratum_origin(child, frozenset(combo))
                        if q in seen:
                            continue
                        seen.add(q)
                        if order_at_point(m.ideal, q) < m.d:
                            continue
                        img = [g.evaluate(q) for g in child.chart.parent.submap]
                        if rec.coords and any(img[i] != 0 for i in rec.coords):
                            continue
                        try:
                            inv_q, mark_q = eng.eval_at(child, q, rec.year + 1,
                                                        build=True)
                        except DescentError:
                            continue
                        checks += 1
                        if compare_decrease((inv_q, mark_q.mu),
                                            (rec.inv, rec.mark.mu)) >= 0:
                            failures.append({
                                "year": rec.year, "chart": cid,
                                "point": [str(v) for v in q],
                                "new": inv_q.serialize(), "old": rec.inv.serialize()})
                        if (rec.inv.terminator == TERM_ZERO and not rec.inv.pairs
                                and inv_q.terminator == TERM_ZERO and not inv_q.pairs):
                            monomial_checks += 1
                            delta = Fraction(rec.mark.mu) - Fraction(mark_q.mu)
                            step = delta * rec.bottom_d
                            if delta <= 0 or step.denominator != 1:
                                failures.append({
                                    "year": rec.year, "chart": cid,
                                    "point": [str(v) for v in q],
                                    "reason": f"monomial mu step {delta} not a "
                                              f"positive multiple of 1/{rec.bottom_d}"})
    return {"checks": checks, "monomial_checks": monomial_checks,
            "persistence_checks": persistence_checks, "failures": failures}


# -- serialization -----------------------------------------------------------------


def tree_to_dict(tree: ResolutionTree) -> dict:
    latest_eval: dict[str, EvalRecord] = {}
    for y in tree.years:
        best: dict[str, EvalRecord] = {}
        for e in y.evals:
            if not e.complete:
                continue
            cur = best.get(e.chart_id)
            if cur is None or _eval_key(e) > _eval_key(cur):
                best[e.chart_id] = e
        latest_eval.update(best)
    acted = {c.chart_id: c for y in tree.years for c in y.centers}
    nodes = []
    for cid, node in tree.nodes.items():
        chart = node.chart
        entry = {
            "chart_id": cid,
            "parent": chart.parent.parent_id if chart.parent else None,
            "substitution": [g.format(chart.names) for g in chart.parent.submap]
            if chart.parent else None,
            "vars": list(chart.names),
            "E": [{"label": d.label,
                   "coord": chart.names[d.coord] if d.coord is not None else None,
                   "alive": d.alive, "birth": d.birth} for d in chart.divisors],
            "born_year": node.born_year,
            "closed_year": node.closed_year,
        }
        if node.marked is not None:
            m = node.marked
            entry["gens"] = [g.format(chart.names) for g in m.ideal.gens]
            entry["d"] = m.d
            entry["frame"] = [chart.names[i] for i in m.frame]
        else:
            entry["gens"] = None
            entry["d"] = None
            entry["frame"] = None
        ev = latest_eval.get(cid)
        entry["inv"] = ev.inv if ev else None
        entry["mu"] = ev.mu if ev else None
        entry["J"] = list(ev.j_labels) if ev else None
        rec = acted.get(cid)
        entry["center"] = [chart.names[i] for i in rec.coords] if rec else None
        nodes.append(entry)
    years = []
    for y in tree.years:
        years.append({
            "year": y.year,
            "deferred": y.deferred,
            "evals": [{"chart": e.chart_id, "point": [str(v) for v in e.point],
                       "inv": e.inv, "mu": e.mu, "J": list(e.j_labels),
                       "complete": e.complete} for e in y.evals],
            "centers": [{"chart": c.chart_id,
                         "coords": [tree.nodes[c.chart_id].chart.names[i]
                                    for i in c.coords],
                         "inv": c.inv.serialize(), "mu": _mu_str(c.mark.mu),
                         "J": list(c.mark.j_labels)} for c in y.centers],
        })
    return {"root": tree.root_id, "status": tree.status, "note": tree.note,
            "nodes": nodes, "years": years}


def tree_to_json(tree: ResolutionTree) -> str:
    return json.dumps(tree_to_dict(tree), sort_keys=True, indent=2)


def tree_to_dot(tree: ResolutionTree) -> str:
    lines = ["digraph resolution {"]
    for cid, node in tree.nodes.items():
        shape = "box" if node.closed_year is None else "ellipse"
        lines.append(f'  "{cid}" [shape={shape}];')
    for cid, node in tree.nodes.items():
        for child in node.children:
            lines.append(f'  "{cid}" -> "{child}";')
    lines.append("}")
    return "\n".join(lines)
