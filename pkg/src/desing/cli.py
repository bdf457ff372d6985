"""Command line interface: resolve | invariant | order | testseq | probe.

Exit status: 0 on success, 1 on input errors, 2 on diagnostic outcomes
(step limit, straightening failure, leaves left unresolved).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .algebra import order_along_hyperplane, order_at_point
from .charts import StraighteningError
from .descent import DescentError
from .invariant import INF
from .marked import MarkedError
from .poly import PolyError
from .problem import ProblemError, parse_problem
from .resolver import (ResolverError, RunOptions, fresh_tree,
                       hypersurface_resolve, invariant_at, resolve,
                       tree_to_dict, tree_to_dot, verify_resolved)
from .testseq import SequenceError, equivalence_probe, parse_sequence, apply_sequence


def _read_problem(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read())


def _parse_point(text: str, arity: int):
    parts = [p.strip() for p in text.strip().strip("()").split(",") if p.strip()]
    if len(parts) != arity:
        raise ProblemError(f"point needs {arity} coordinates")
    return tuple(Fraction(p) for p in parts)


def _center_note(tree, rec) -> str:
    chart = tree.nodes[rec.chart_id].chart
    names = ",".join(chart.names[i] for i in rec.coords)
    if len(rec.coords) == chart.arity:
        return f"centre {{0}} = V({names})"
    if not rec.coords:
        return "centre all of N"
    return f"centre V({names})"


def _emit_trace(tree, out):
    for year in tree.years:
        for rec in year.centers:
            print(f"year {year.year}: {_center_note(tree, rec)} in chart "
                  f"{rec.chart_id} inv={rec.inv.serialize()} "
                  f"mu={'inf' if rec.mark.mu == INF else rec.mark.mu}", file=out)
        if not year.centers:
            print(f"year {year.year}: no centre", file=out)
    if tree.status in ("resolved", "exhausted"):
        return
    from .resolver import center_from_recursion
    from .descent import DescentError
    from .algebra import order_at_point
    for node in sorted(tree.current_leaves(), key=lambda n: n.chart.cid):
        m = node.marked
        if m is None:
            continue
        origin = tuple(Fraction(0) for _ in range(m.ideal.arity))
        if order_at_point(m.ideal, origin) < m.d:
            continue
        try:
            plan = center_from_recursion(tree, node.chart.cid)
        except DescentError:
            continue
        names = ",".join(node.chart.names[i] for i in plan.coords)
        print(f"pending: next centre V({names}) in chart {node.chart.cid}", file=out)


def cmd_resolve(args) -> int:
    pf = _read_problem(args.file)
    opts = RunOptions(max_steps=args.max_steps, trace=int(args.trace),
                      shear_rounds=args.shear_rounds)
    if pf.mode == "hypersurface":
        tree, strict = hypersurface_resolve(pf.gens[0], pf.vars, opts)
    else:
        tree, strict = resolve(pf.to_marked(), opts), None
    report = verify_resolved(tree)
    if args.dot:
        print(tree_to_dot(tree))
        return 0 if tree.status == "resolved" else 2
    if args.format == "json":
        payload = tree_to_dict(tree)
        payload["verify"] = report
        if strict is not None:
            payload["strict_transform"] = strict
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        if args.trace:
            _emit_trace(tree, sys.stdout)
        print(f"status: {tree.status}" + (f" ({tree.note})" if tree.note else ""))
        print(f"years: {len(tree.years)}  charts: {len(tree.nodes)}")
        print(f"verified resolved: {report['resolved']}")
        if strict is not None:
            print(f"strict transform smooth: {strict['smooth_everywhere']}, "
                  f"snc: {strict['snc_everywhere']}")
    return 0 if tree.status == "resolved" else 2


def cmd_invariant(args) -> int:
    pf = _read_problem(args.file)
    m = pf.to_marked()
    tree = fresh_tree(m)
    point = _parse_point(args.point, len(pf.vars)) if args.point else None
    inv, mark = invariant_at(tree, m.chart.cid, point)
    if args.format == "json":
        print(json.dumps({"inv": inv.serialize(),
                          "mu": "inf" if mark.mu == INF else str(mark.mu),
                          "J": list(mark.j_labels)}, sort_keys=True))
    else:
        print(inv.serialize())
        print(mark.serialize())
    return 0


def cmd_order(args) -> int:
    pf = _read_problem(args.file)
    m = pf.to_marked()
    out = {}
    if args.point:
        p = _parse_point(args.point, len(pf.vars))
        o = order_at_point(m.ideal, p)
        out["order"] = "inf" if o == INF else int(o)
        print(f"ord at ({args.point}) = {out['order']}")
    if args.along:
        if args.along not in pf.vars:
            raise ProblemError(f"unknown variable {args.along!r}")
        v = order_along_hyperplane(m.ideal, pf.vars.index(args.along))
        out["valuation"] = "inf" if v == INF else int(v)
        print(f"ord along V({args.along}) = {out['valuation']}")
    if not out:
        raise ProblemError("order needs --point and/or --along")
    return 0


def cmd_testseq(args) -> int:
    pf = _read_problem(args.file)
    m = pf.to_marked()
    seq = parse_sequence(args.seq)
    result = apply_sequence(m, seq)
    chart = result.chart
    print(f"chart: {chart.cid}")
    print("gens: " + ", ".join(g.format(chart.names) for g in result.ideal.gens))
    print(f"d: {result.d}")
    e = ", ".join(f"{d.label}:{chart.names[d.coord] if d.alive else 'dead'}"
                  for d in chart.divisors)
    print(f"E: [{e}]")
    return 0


def cmd_probe(args) -> int:
    a = _read_problem(args.file).to_marked()
    b = _read_problem(args.other).to_marked()
    report = equivalence_probe(a, b, depth=args.depth, trials=args.trials)
    if report["distinguished"]:
        print(f"distinguished by {report['witness']} ({report['reason']})")
    else:
        print(f"no distinction found ({report['sequences_checked']} sequences)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="desing",
                                 description="functorial resolution of marked ideals")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resolve", help="run the resolution loop on a problem file")
    p.add_argument("file")
    p.add_argument("--max-steps", type=int, default=64)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--dot", action="store_true", help="emit the chart tree as DOT")
    p.add_argument("--shear-rounds", type=int, default=32)
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("invariant", help="invariant (inv, mu, J) at a point")
    p.add_argument("file")
    p.add_argument("--point", default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_invariant)

    p = sub.add_parser("order", help="orders and valuations")
    p.add_argument("file")
    p.add_argument("--point", default=None)
    p.add_argument("--along", default=None)
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("testseq", help="replay a serialized test sequence")
    p.add_argument("file")
    p.add_argument("--seq", required=True)
    p.set_defaults(func=cmd_testseq)

    p = sub.add_parser("probe", help="equivalence probe on two problem files")
    p.add_argument("file")
    p.add_argument("other")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--trials", type=int, default=32)
    p.set_defaults(func=cmd_probe)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ProblemError, PolyError, MarkedError, SequenceError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (DescentError, StraighteningError, ResolverError) as e:
        print(f"diagnostic: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
