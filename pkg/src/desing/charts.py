"""Affine charts, blow-up substitutions, coordinate shears, point transport.

Every chart keeps adapted coordinates: exceptional hypersurfaces are vanishing
loci of single coordinates, the working subvariety N is the vanishing of the
trailing coordinates, and blow-up centers are coordinate subspaces.  Under
these conventions the standard chart substitutions are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .poly import Poly


class ChartError(ValueError):
    pass


class StraighteningError(RuntimeError):
    """Triangular shears did not terminate within the round budget."""


@dataclass(frozen=True)
class Divisor:
    """One exceptional hypersurface as seen from a chart."""
    label: int              # global identity, increasing with birth year
    coord: int | None       # chart coordinate cut out by the strict transform
    alive: bool             # whether the strict transform meets this chart
    birth: int = 0          # blow-up year that created the divisor


@dataclass(frozen=True)
class ParentLink:
    parent_id: str
    submap: tuple           # per parent variable: its image in child coordinates
    chart_var: int          # the coordinate whose chart this is


@dataclass(frozen=True)
class Chart:
    cid: str
    names: tuple
    n_dim: int
    divisors: tuple = ()
    parent: ParentLink | None = None
    reparam: tuple | None = None      # as-born coordinates in current coordinates
    reparam_inv: tuple | None = None  # current coordinates in as-born coordinates
    depth: int = 0
    born_center: tuple | None = None  # parent coordinates blown up to create this chart

    @property
    def arity(self) -> int:
        return len(self.names)

    def alive_divisors(self) -> tuple:
        return tuple(d for d in self.divisors if d.alive)

    def divisor(self, label: int) -> Divisor:
        for d in self.divisors:
            if d.label == label:
                return d
        raise ChartError(f"no divisor labelled {label} in chart {self.cid}")

    def e_coords(self) -> set:
        return {d.coord for d in self.divisors if d.alive}


@dataclass(frozen=True)
class Center:
    chart_id: str
    coords: tuple            # strictly increasing variable indices

    def __post_init__(self):
        if len(set(self.coords)) != len(self.coords) or tuple(sorted(self.coords)) != self.coords:
            raise ChartError("center coordinates must be distinct and sorted")


def root_chart(names: Sequence[str], n_dim: int | None = None,
               e_bindings: Sequence[tuple] = ()) -> Chart:
    """Fresh ambient chart; e_bindings are (label, coord) pairs for an initial E.

    The initial divisor must consist of coordinate hyperplanes transverse to N.
    """
    names = tuple(names)
    nd = len(names) if n_dim is None else n_dim
    if not 0 <= nd <= len(names):
        raise ChartError("n_dim out of range")
    divisors = []
    seen = set()
    for label, coord in e_bindings:
        if coord in seen or not 0 <= coord < nd:
            raise ChartError("initial E must be distinct coordinate hyperplanes inside N")
        seen.add(coord)
        divisors.append(Divisor(label, coord, True, 0))
    divisors.sort(key=lambda d: d.label)
    return Chart("root", names, nd, tuple(divisors))


def validate_center(chart: Chart, center: Center) -> None:
    if center.chart_id != chart.cid:
        raise ChartError("center does not belong to this chart")
    if not center.coords:
        raise ChartError("center needs at least one coordinate")
    for c in center.coords:
        if not 0 <= c < chart.arity:
            raise ChartError(f"center coordinate {c} out of range")


def blowup_charts(chart: Chart, center: Center, new_label: int, year: int = 0) -> list:
    """Standard coordinate charts of the blow-up along a coordinate subspace.

    One chart per center coordinate x_k: x_k maps to x_k, every other center
    coordinate x_j to x_k*x_j; the new exceptional divisor V(x_k) is appended
    as the last member of E.
    """
    validate_center(chart, center)
    n = chart.arity
    S = set(center.coords)
    charts = []
    for k in center.coords:
        submap = []
        for i in range(n):
            if i == k or i not in S:
                submap.append(Poly.var(n, i))
            else:
                submap.append(Poly.var(n, k) * Poly.var(n, i))
        divisors = []
        for d in chart.divisors:
            if d.alive and d.coord == k:
                divisors.append(replace(d, coord=None, alive=False))
            else:
                divisors.append(d)
        divisors.append(Divisor(new_label, k, True, year))
        charts.append(Chart(
            cid=f"{chart.cid}.{chart.names[k]}",
            names=chart.names,
            n_dim=chart.n_dim,
            divisors=tuple(divisors),
            parent=ParentLink(chart.cid, tuple(submap), k),
            depth=year,
            born_center=tuple(center.coords),
        ))
    return charts


def product_with_line(chart: Chart, new_label: int, year: int = 0,
                      name: str | None = None) -> Chart:
    """Product with a line; the horizontal divisor V(t) is appended last."""
    n = chart.arity
    if name is None:
        base = "t"
        k = 0
        name = base
        while name in chart.names:
            k += 1
            name = f"{base}{k}"
    pos = chart.n_dim
    names = chart.names[:pos] + (name,) + chart.names[pos:]
    submap = [Poly.var(n + 1, i if i < pos else i + 1) for i in range(n)]
    divisors = [d for d in chart.divisors]  # coords < n_dim are unaffected by the insertion
    divisors.append(Divisor(new_label, pos, True, year))
    return Chart(
        cid=f"{chart.cid}.{name}",
        names=names,
        n_dim=chart.n_dim + 1,
        divisors=tuple(divisors),
        parent=ParentLink(chart.cid, tuple(submap), pos),
        depth=year,
        born_center=None,
    )


def exceptional_blowup(chart: Chart, label_i: int, label_j: int,
                       new_label: int, year: int = 0) -> list:
    """Blow up the intersection of two distinct alive exceptional hypersurfaces."""
    if label_i == label_j:
        raise ChartError("exceptional blow-up needs two distinct divisors")
    di, dj = chart.divisor(label_i), chart.divisor(label_j)
    if not (di.alive and dj.alive):
        raise ChartError("both divisors must be alive in this chart")
    center = Center(chart.cid, tuple(sorted((di.coord, dj.coord))))
    return blowup_charts(chart, center, new_label, year)


# -- coordinate shears --------------------------------------------------------


def solve_graph(z: Poly, target: int, max_rounds: int = 32) -> Poly | None:
    """Solve z = 0 for x_target near the origin by iterated substitution.

    Requires a nonzero linear coefficient on x_target.  Returns phi with
    z(x | x_target := phi) == 0 exactly and phi free of x_target, or None
    when the iteration does not close up polynomially.
    """
    c = z.linear_coeff(target)
    if c == 0:
        return None
    zn = z.scale(Fraction(1) / c)
    q = Poly.var(z.arity, target) - zn
    phi = Poly.zero(z.arity)
    degree_cap = max(24, 4 * z.total_degree())
    for _ in range(max_rounds):
        nxt = q.substitute({target: phi})
        if nxt == phi:
            return phi
        if nxt.total_degree() > degree_cap or len(nxt.terms) > 600:
            return None  # divergent iteration: the graph is a genuine power series
        phi = nxt
    return None


def solve_graph_at(z: Poly, target: int, base: Sequence, max_rounds: int = 32) -> Poly | None:
    """Like solve_graph but anchored at a rational base point on V(z)."""
    base = [Fraction(b) for b in base]
    zt = z.translate(base)
    phi = solve_graph(zt, target, max_rounds)
    if phi is None:
        return None
    psi = phi.translate([-b for b in base])
    if base[target]:
        psi = psi + Poly.const(z.arity, base[target])
    return psi


def shear_map(arity: int, target: int, phi: Poly) -> dict:
    """Coordinate change sending old x_target to x_target + phi (phi free of target)."""
    return {target: Poly.var(arity, target) + phi}


def apply_reparam(chart: Chart, tau: Mapping[int, Poly],
                  tau_inv: Mapping[int, Poly] | None = None) -> Chart:
    """Re-coordinatize a chart; tau gives old coordinates in terms of new ones.

    tau_inv (new coordinates in terms of old) keeps the inverse record used
    for point transitions between sibling charts.
    """
    n = chart.arity
    identity = tuple(Poly.var(n, i) for i in range(n))
    reparam = tuple(g.substitute(tau) for g in (chart.reparam or identity))
    inv = chart.reparam_inv or identity
    if tau_inv is not None:
        inv = tuple(Poly.var(n, i).substitute(tau_inv).substitute(dict(enumerate(inv)))
                    for i in range(n))
    out = replace(chart, reparam=reparam,
                  reparam_inv=inv if tau_inv is not None else chart.reparam_inv)
    if chart.parent is not None:
        submap = tuple(g.substitute(tau) for g in chart.parent.submap)
        out = replace(out, parent=replace(chart.parent, submap=submap))
    return out


def shear_straighten(chart: Chart, z: Poly, target: int,
                     max_rounds: int = 32) -> tuple:
    """Re-coordinatize so z becomes exactly the coordinate x_target.

    The change fixes every other coordinate, in particular all exceptional
    coordinates, so E stays coordinate-aligned.  Returns (new chart, image).
    """
    if target in chart.e_coords():
        raise ChartError(f"straightening target {chart.names[target]} is an exceptional coordinate")
    c = z.linear_coeff(target)
    if c == 0 or z.translate([0] * chart.arity).order_at_origin() != 1:
        raise StraighteningError(f"{z.format(chart.names)} has no unit linear term in "
                                 f"{chart.names[target]} at the origin")
    phi = solve_graph(z, target, max_rounds)
    if phi is None:
        raise StraighteningError(
            f"straightening of {z.format(chart.names)} did not terminate within {max_rounds} rounds")
    tau = shear_map(chart.arity, target, phi)
    image = z.substitute(tau).scale(Fraction(1) / c)
    if image != Poly.var(chart.arity, target):
        raise StraighteningError(
            f"{z.format(chart.names)} is not exactly straightenable onto {chart.names[target]}")
    inv = {target: Poly.var(chart.arity, target) - phi}
    return apply_reparam(chart, tau, inv), image


# -- point transport ----------------------------------------------------------


def transport_point(lookup: Callable[[str], Chart], chart: Chart,
                    point: Sequence) -> tuple:
    """Image of a chart point under the composed substitutions down to the root."""
    pt = [Fraction(v) for v in point]
    cur = chart
    while cur.parent is not None:
        link = cur.parent
        pt = [g.evaluate(pt) for g in link.submap]
        cur = lookup(link.parent_id)
    if cur.reparam is not None:
        pt = [g.evaluate(pt) for g in cur.reparam]
    return tuple(pt)
