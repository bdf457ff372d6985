"""Test sequences, order-recovery oracles, equivalence probing, homogenization.

A test sequence is a composition of admissible blow-ups (with a chart choice),
projections from a product with a line, and exceptional blow-ups.  Two marked
ideals are distinguished when some sequence is admissible for one but not the
other, or when the transformed cosupports differ; the probe reports evidence,
never proof.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction

from .algebra import (Ideal, ideal_product, iterated_derivative,
                      order_at_point, radical_membership, INFINITY)
from .charts import Center, blowup_charts, exceptional_blowup, product_with_line
from .marked import (MarkedIdeal, admissible_verdict, transform_admissible,
                     transform_exceptional, transform_projection)
from .poly import Poly


class SequenceError(ValueError):
    pass


@dataclass(frozen=True)
class TestSequence:
    """Steps: ("P",) | ("B", var-names, chart-name) | ("E", i, j, chart-name)."""
    __test__ = False  # not a pytest class, despite the name
    steps: tuple

    def serialize(self) -> str:
        out = []
        for s in self.steps:
            if s[0] == "P":
                out.append("P")
            elif s[0] == "B":
                out.append(f"B({','.join(s[1])})@{s[2]}")
            else:
                out.append(f"E({s[1]},{s[2]})@{s[3]}")
        return ";".join(out)


_STEP = re.compile(r"^(?:P|B\(([^)]*)\)@(\w+)|E\((\d+),(\d+)\)@(\w+))$")


def parse_sequence(text: str) -> TestSequence:
    steps = []
    for chunk in text.strip().split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        m = _STEP.match(chunk)
        if not m:
            raise SequenceError(f"cannot parse step {chunk!r}")
        if chunk == "P":
            steps.append(("P",))
        elif chunk.startswith("B"):
            names = tuple(v.strip() for v in m.group(1).split(",") if v.strip())
            steps.append(("B", names, m.group(2)))
        else:
            steps.append(("E", int(m.group(3)), int(m.group(4)), m.group(5)))
    return TestSequence(tuple(steps))


def _next_label(chart) -> int:
    return 1 + max((d.label for d in chart.divisors), default=-1)


def apply_step(m: MarkedIdeal, step) -> MarkedIdeal:
    chart = m.chart
    label = _next_label(chart)
    if step[0] == "P":
        child = product_with_line(chart, label, chart.depth + 1)
        return transform_projection(m, child)
    if step[0] == "B":
        names = step[1]
        coords = []
        for nm in names:
            if nm not in chart.names:
                raise SequenceError(f"unknown variable {nm!r} in chart {chart.cid}")
            coords.append(chart.names.index(nm))
        coords = sorted(set(coords) | (set(range(chart.arity)) - set(m.frame)))
        if not admissible_verdict(m, coords):
            raise SequenceError(f"inadmissible blow-up at {names}")
        charts = blowup_charts(chart, Center(chart.cid, tuple(coords)), label,
                               chart.depth + 1)
        want = chart.names.index(step[2])
        for c in charts:
            if c.parent.chart_var == want:
                return transform_admissible(m, c)
        raise SequenceError(f"chart {step[2]!r} is not a chart of this blow-up")
    if step[0] == "E":
        charts = exceptional_blowup(chart, step[1], step[2], label, chart.depth + 1)
        want = chart.names.index(step[3])
        for c in charts:
            if c.parent.chart_var == want:
                return transform_exceptional(m, c)
        raise SequenceError(f"chart {step[3]!r} is not a chart of this blow-up")
    raise SequenceError(f"unknown step {step!r}")


def apply_sequence(m: MarkedIdeal, seq: TestSequence) -> MarkedIdeal:
    cur = m
    for idx, step in enumerate(seq.steps):
        try:
            cur = apply_step(cur, step)
        except SequenceError as e:
            raise SequenceError(f"step {idx}: {e}") from None
    return cur


# -- mu oracles (order recovery through test sequences) -------------------------


def mu_oracle(m: MarkedIdeal, a, j_max: int = 6, i_max: int = 6):
    """Recover ord_a(I)/d from admissibility data of the point blow-up gadget.

    Projection to M x A^1, then j point blow-ups along the vertical line
    through a, then up to i further blow-ups with center D meet N; membership
    of (j, i) is the valuation criterion, and mu = 1 + sup (i+1)/j.
    """
    if order_at_point(m.ideal, a) < m.d:
        raise SequenceError("point is not in the cosupport")
    if m.ideal.is_zero():
        return INFINITY
    n = m.ideal.arity
    t = n  # the new line coordinate
    shifted = [g.translate(a).insert_axis(n) for g in m.ideal.gens]
    best = None
    for j in range(1, j_max + 1):
        sub = {i: Poly.var(n + 1, i) * Poly.var(n + 1, t) ** j for i in m.frame}
        v = min(g.substitute(sub).valuation(t) for g in shifted)
        v -= j * m.d  # the j admissible point blow-ups divide by t^d each
        for i in range(0, i_max + 1):
            if v - i * m.d >= m.d:
                frac = Fraction(i + 1, j)
                if best is None or frac > best:
                    best = frac
    return Fraction(1) if best is None else 1 + best


def mu_H_oracle(m: MarkedIdeal, label: int, a, j_max: int = 12):
    """Recover ord_{H,a}(I)/d from the projection + exceptional blow-up gadget."""
    div = m.chart.divisor(label)
    if not div.alive:
        raise SequenceError("divisor is not alive in this chart")
    c = div.coord
    if a[c] != 0:
        raise SequenceError("point does not lie on the divisor")
    if order_at_point(m.ideal, a) < m.d:
        raise SequenceError("point is not in the cosupport")
    n = m.ideal.arity
    t = n
    shifted = [g.translate(a).insert_axis(n) for g in m.ideal.gens]

    def ord_level(j: int):
        sub = {c: Poly.var(n + 1, c) * Poly.var(n + 1, t) ** j}
        return min(g.substitute(sub).order_at_origin() for g in shifted)

    prev = None
    m0 = ord_level(0)
    for j in range(1, j_max + 1):
        m1 = ord_level(j)
        diff = Fraction(m1 - m0, m.d)
        if prev is not None and diff == prev:
            return diff
        prev, m0 = diff, m1
    raise SequenceError(f"mu_H did not stabilize within {j_max} levels")


# -- equivalence probing ---------------------------------------------------------


def _cosupport_chain(m: MarkedIdeal) -> Ideal:
    return iterated_derivative(m.ideal, None, m.d - 1, variables=m.frame)


def _same_cosupport(a: MarkedIdeal, b: MarkedIdeal) -> bool:
    ca, cb = _cosupport_chain(a), _cosupport_chain(b)
    if ca.is_zero() != cb.is_zero():
        return (ca.is_zero() and all(radical_membership(g, ca) for g in cb.gens)) or \
               (cb.is_zero() and all(radical_membership(g, cb) for g in ca.gens))
    return all(radical_membership(g, cb) for g in ca.gens) and \
        all(radical_membership(g, ca) for g in cb.gens)


def _candidate_steps(m: MarkedIdeal):
    chart = m.chart
    steps = [("P",)]
    frame_names = [chart.names[i] for i in m.frame]
    for r in range(1, len(frame_names) + 1):
        for combo in itertools.combinations(m.frame, r):
            names = tuple(chart.names[i] for i in combo)
            for k in combo:
                steps.append(("B", names, chart.names[k]))
    alive = [d for d in chart.divisors if d.alive]
    for di, dj in itertools.combinations(alive, 2):
        for k in (di.coord, dj.coord):
            steps.append(("E", di.label, dj.label, chart.names[k]))
    return steps


def equivalence_probe(a: MarkedIdeal, b: MarkedIdeal, depth: int = 2,
                      trials: int = 32) -> dict:
    """Search test sequences for a disagreement in admissibility or cosupport.

    Evidence only: "no distinction found" is not a proof of equivalence.
    """
    if a.chart.cid != b.chart.cid or a.frame != b.frame:
        raise SequenceError("probe needs marked ideals on the same frame")
    if tuple(d.label for d in a.e_view) != tuple(d.label for d in b.e_view):
        raise SequenceError("probe needs marked ideals with the same divisor view")
    counter = {"checked": 0}

    def walk(x: MarkedIdeal, y: MarkedIdeal, prefix, left: int):
        if not _same_cosupport(x, y):
            return {"distinguished": True,
                    "witness": TestSequence(tuple(prefix)).serialize(),
                    "reason": "cosupports differ"}
        if left == 0 or counter["checked"] >= trials:
            return None
        for step in _candidate_steps(x):
            if counter["checked"] >= trials:
                return None
            if step[0] == "B":
                coords = sorted({x.chart.names.index(nm) for nm in step[1]}
                                | (set(range(x.chart.arity)) - set(x.frame)))
                va = admissible_verdict(x, coords)
                vb = admissible_verdict(y, coords)
                if va != vb:
                    return {"distinguished": True,
                            "witness": TestSequence(tuple(prefix + [step])).serialize(),
                            "reason": "admissibility verdicts differ"}
                if not va:
                    continue
            counter["checked"] += 1
            try:
                nx = apply_step(x, step)
                ny = apply_step(y, step)
            except SequenceError:
                continue
            found = walk(nx, ny, prefix + [step], left - 1)
            if found:
                return found
        return None

    found = walk(a, b, [], depth)
    if found:
        found["sequences_checked"] = counter["checked"]
        return found
    return {"distinguished": False, "witness": None,
            "sequences_checked": counter["checked"]}


# -- homogenized ideal ------------------------------------------------------------


def homogenized_ideal(m: MarkedIdeal) -> MarkedIdeal:
    """Sum of D^j(I) * (D^(d-1)(I))^j for j < d, marked d (plain derivatives)."""
    arity = m.ideal.arity
    top = iterated_derivative(m.ideal, None, m.d - 1, variables=m.frame)
    gens = []
    power = Ideal(arity, [Poly.const(arity, 1)])
    current = m.ideal
    for j in range(m.d):
        gens.extend(ideal_product(current, power).gens)
        if j + 1 < m.d:
            current = iterated_derivative(current, None, 1, variables=m.frame)
            power = ideal_product(power, top)
    return m.with_ideal(Ideal(arity, gens), m.d)
