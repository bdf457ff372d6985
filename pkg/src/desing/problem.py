"""Problem files: a small field grammar describing one marked ideal.

Fields are introduced by `key:` and separated by newlines or `/`:

    vars: x,y,z,w / d: 1 / gens: y^2 - x^3, x^4 + x*z^2 - w^3

Optional fields: `n_dim` (defaults to all variables), `E` (divisor bindings
such as `H1=x, H2=y`), `mode` (marked | hypersurface).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .algebra import Ideal
from .charts import root_chart
from .marked import MarkedIdeal
from .poly import Poly, PolyError, parse_poly


class ProblemError(ValueError):
    pass


_FIELD = re.compile(r"(?:^|[\n/])\s*(vars|n_dim|E|d|gens|mode)\s*:")


@dataclass(frozen=True)
class ProblemFile:
    vars: tuple
    n_dim: int
    e_bindings: tuple        # ((divisor name, variable name), ...)
    d: int
    gens: tuple              # Poly, canonical form
    mode: str = "marked"

    def serialize(self) -> str:
        lines = [f"vars: {','.join(self.vars)}"]
        if self.n_dim != len(self.vars):
            lines.append(f"n_dim: {self.n_dim}")
        if self.e_bindings:
            lines.append("E: " + ", ".join(f"{n}={v}" for n, v in self.e_bindings))
        lines.append(f"d: {self.d}")
        lines.append("gens: " + ", ".join(g.format(self.vars) for g in self.gens))
        if self.mode != "marked":
            lines.append(f"mode: {self.mode}")
        return "\n".join(lines) + "\n"

    def to_marked(self) -> MarkedIdeal:
        bindings = []
        for i, (_, var) in enumerate(self.e_bindings):
            bindings.append((i, self.vars.index(var)))
        chart = root_chart(self.vars, self.n_dim, bindings)
        return MarkedIdeal(chart, Ideal(len(self.vars), list(self.gens)), self.d)

    def divisor_names(self) -> dict:
        return {i: name for i, (name, _) in enumerate(self.e_bindings)}


def _split_list(text: str):
    """Split on top-level commas (the grammar has no nested commas)."""
    return [p.strip() for p in text.split(",") if p.strip()]


def parse_problem(text: str) -> ProblemFile:
    matches = list(_FIELD.finditer(text))
    if not matches:
        raise ProblemError("no fields found (expected at least vars, d, gens)")
    fields: dict[str, str] = {}
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        key = m.group(1)
        if key in fields:
            raise ProblemError(f"duplicate field {key!r}")
        fields[key] = text[m.end():end].strip()

    if "vars" not in fields:
        raise ProblemError("missing field 'vars'")
    names = tuple(_split_list(fields["vars"]))
    if len(set(names)) != len(names) or not names:
        raise ProblemError("variable names must be nonempty and distinct")

    mode = fields.get("mode", "marked").strip().lower()
    if mode not in ("marked", "hypersurface"):
        raise ProblemError(f"unknown mode {fields['mode']!r}")

    n_dim = len(names)
    if "n_dim" in fields:
        try:
            n_dim = int(fields["n_dim"])
        except ValueError:
            raise ProblemError("n_dim must be an integer") from None
        if not 0 < n_dim <= len(names):
            raise ProblemError("n_dim out of range")

    e_bindings = []
    if fields.get("E"):
        seen = set()
        for item in _split_list(fields["E"]):
            if "=" in item:
                label, var = (s.strip() for s in item.split("=", 1))
            else:
                label, var = f"H{len(e_bindings) + 1}", item
            if var not in names:
                raise ProblemError(f"E binds unknown variable {var!r}")
            if var in seen or names.index(var) >= n_dim:
                raise ProblemError(f"E binding {item!r} is not a distinct leading coordinate")
            seen.add(var)
            e_bindings.append((label, var))

    if "d" not in fields:
        if mode == "hypersurface":
            d = 1
        else:
            raise ProblemError("missing field 'd'")
    else:
        try:
            d = int(fields["d"])
        except ValueError:
            raise ProblemError("d must be an integer") from None
        if d < 1:
            raise ProblemError("d must be >= 1")

    if "gens" not in fields or not fields["gens"].strip():
        raise ProblemError("missing field 'gens'")
    gens = []
    for chunk in _split_list(fields["gens"]):
        try:
            gens.append(parse_poly(chunk, names))
        except PolyError as e:
            raise ProblemError(f"in generator {chunk!r}: {e}") from None

    if mode == "hypersurface" and len(gens) != 1:
        raise ProblemError("hypersurface mode takes exactly one generator")

    pf = ProblemFile(names, n_dim, tuple(e_bindings), d, tuple(gens), mode)
    pf.to_marked()  # re-check every marked-ideal invariant on load
    return pf
