"""Sparse multivariate polynomials over exact rationals.

Coefficients are `fractions.Fraction` (arbitrary precision, always reduced),
exponent vectors are tuples of naturals.  Zero coefficients are never stored,
so structural equality of the term maps is polynomial equality.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping, Sequence


class PolyError(ValueError):
    """Malformed polynomial input or an illegal operation."""


def grevlex_key(exps: tuple) -> tuple:
    """Sort key realizing graded reverse lexicographic order (larger = bigger)."""
    return (sum(exps), tuple(-e for e in reversed(exps)))


def _as_fraction(c):
    """Normalize a coefficient: plain int when integral, Fraction otherwise.

    Integer coefficients dominate in practice and plain int arithmetic is far
    cheaper than Fraction's; mixing the two is exact either way.
    """
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c._numerator if c._denominator == 1 else c
    raise PolyError(f"coefficient must be exact rational, got {type(c).__name__}")


class Poly:
    """Immutable sparse polynomial with a fixed variable count (arity)."""

    __slots__ = ("arity", "terms", "_hash", "_lead")

    def __init__(self, arity: int, terms: Mapping[tuple, Fraction] | None = None):
        self.arity = arity
        clean: dict[tuple, Fraction] = {}
        if terms:
            for exps, c in terms.items():
                c = _as_fraction(c)
                if c == 0:
                    continue
                if len(exps) != arity or any(e < 0 for e in exps):
                    raise PolyError(f"bad exponent vector {exps!r} for arity {arity}")
                clean[tuple(exps)] = c
        self.terms = clean
        self._hash = None
        self._lead = None

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(arity: int) -> "Poly":
        return Poly(arity)

    @staticmethod
    def const(arity: int, c) -> "Poly":
        return Poly(arity, {(0,) * arity: _as_fraction(c)})

    @staticmethod
    def var(arity: int, i: int, power: int = 1, coeff=1) -> "Poly":
        e = [0] * arity
        e[i] = power
        return Poly(arity, {tuple(e): _as_fraction(coeff)})

    @staticmethod
    def monomial(arity: int, exps: Sequence[int], coeff=1) -> "Poly":
        return Poly(arity, {tuple(exps): _as_fraction(coeff)})

    # -- basic structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.arity, 0)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def order_at_origin(self):
        """Lowest total degree of a term; infinity for the zero polynomial."""
        if not self.terms:
            return float("inf")
        return min(sum(e) for e in self.terms)

    def valuation(self, var: int):
        """Largest power of x_var dividing self; infinity for zero."""
        if not self.terms:
            return float("inf")
        return min(e[var] for e in self.terms)

    def linear_coeff(self, var: int):
        e = [0] * self.arity
        e[var] = 1
        return self.terms.get(tuple(e), 0)

    def variables(self) -> set:
        used = set()
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    used.add(i)
        return used

    def leading(self) -> tuple:
        """(exponents, coefficient) of the grevlex-leading term."""
        if not self.terms:
            raise PolyError("zero polynomial has no leading term")
        if self._lead is None:
            self._lead = max(self.terms, key=grevlex_key)
        return self._lead, self.terms[self._lead]

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        if self.arity != other.arity:
            raise PolyError("arity mismatch")
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        p = Poly.__new__(Poly)
        p.arity, p.terms, p._hash, p._lead = self.arity, out, None, None
        return p

    def __neg__(self) -> "Poly":
        p = Poly.__new__(Poly)
        p.arity = self.arity
        p.terms = {e: -c for e, c in self.terms.items()}
        p._hash = None
        p._lead = None
        return p

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.arity != other.arity:
            raise PolyError("arity mismatch")
        out: dict[tuple, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        p = Poly.__new__(Poly)
        p.arity, p.terms, p._hash, p._lead = self.arity, out, None, None
        return p

    def scale(self, c) -> "Poly":
        c = _as_fraction(c)
        if c == 0:
            return Poly.zero(self.arity)
        p = Poly.__new__(Poly)
        p.arity = self.arity
        p.terms = {e: k * c for e, k in self.terms.items()}
        p._hash = None
        p._lead = None
        return p

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise PolyError("negative power")
        result = Poly.const(self.arity, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def mul_monomial(self, exps: Sequence[int], coeff=1) -> "Poly":
        c = _as_fraction(coeff)
        out = {}
        for e, k in self.terms.items():
            out[tuple(a + b for a, b in zip(e, exps))] = k * c
        p = Poly.__new__(Poly)
        p.arity, p.terms, p._hash, p._lead = self.arity, out, None, None
        return p

    # -- calculus and composition ------------------------------------------

    def diff(self, var: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            k = e[var]
            if k:
                e2 = list(e)
                e2[var] = k - 1
                out[tuple(e2)] = c * k
        return Poly(self.arity, out)

    def substitute(self, images: Mapping[int, "Poly"]) -> "Poly":
        """Compose with x_i -> images[i]; unmapped variables map to themselves."""
        if not images:
            return self
        arity = None
        for im in images.values():
            arity = im.arity if arity is None else arity
            if im.arity != arity:
                raise PolyError("substitution images disagree on arity")
        if arity is None:
            arity = self.arity
        if all(len(im.terms) <= 1 for im in images.values()):
            return self._substitute_monomial(images, arity)
        powers: dict[tuple, Poly] = {}

        def power(i: int, k: int) -> Poly:
            key = (i, k)
            if key not in powers:
                base = images.get(i)
                if base is None:
                    base = Poly.var(arity, i)
                powers[key] = base ** k
            return powers[key]

        out = Poly.zero(arity)
        for e, c in self.terms.items():
            term = Poly.const(arity, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def _substitute_monomial(self, images, arity: int) -> "Poly":
        """Composition when every image is a monomial (or zero): no expansion."""
        mono = {}
        for i, im in images.items():
            mono[i] = next(iter(im.terms.items())) if im.terms else None
        out: dict[tuple, object] = {}
        for e, c in self.terms.items():
            exps = [0] * arity
            coeff = c
            dead = False
            for i, k in enumerate(e):
                if not k:
                    continue
                hit = mono.get(i, ...)
                if hit is ...:
                    exps[i] += k
                    continue
                if hit is None:
                    dead = True
                    break
                me, mc = hit
                for j, mj in enumerate(me):
                    if mj:
                        exps[j] += mj * k
                if mc != 1:
                    coeff = coeff * mc ** k
            if dead:
                continue
            key = tuple(exps)
            s = out.get(key, 0) + coeff
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        p = Poly.__new__(Poly)
        p.arity, p.terms, p._hash, p._lead = arity, out, None, None
        return p

    def translate(self, point: Sequence) -> "Poly":
        """Compose with the translation x -> x + p."""
        images = {}
        for i, v in enumerate(point):
            v = _as_fraction(v)
            if v != 0:
                images[i] = Poly(self.arity, {tuple(0 if j != i else 1 for j in range(self.arity)): Fraction(1),
                                              (0,) * self.arity: v})
        return self.substitute(images) if images else self

    def evaluate(self, point: Sequence):
        total = 0
        for e, c in self.terms.items():
            v = c
            for i, k in enumerate(e):
                if k:
                    p = point[i]
                    if p == 0:
                        v = 0
                        break
                    if p != 1:
                        v = v * p ** k
            if v:
                total = total + v
        return total

    def divexact_var(self, var: int, k: int) -> "Poly | None":
        """Divide by x_var^k; None when not exactly divisible."""
        if k == 0 or not self.terms:
            return self
        out = {}
        for e, c in self.terms.items():
            if e[var] < k:
                return None
            e2 = list(e)
            e2[var] -= k
            out[tuple(e2)] = c
        return Poly(self.arity, out)

    def divexact_monomial(self, exps: Mapping[int, int]) -> "Poly | None":
        p = self
        for v, k in exps.items():
            if k:
                p = p.divexact_var(v, k)
                if p is None:
                    return None
        return p

    def insert_axis(self, pos: int) -> "Poly":
        """Reinterpret in one more variable, inserted (unused) at index pos."""
        out = {}
        for e, c in self.terms.items():
            out[e[:pos] + (0,) + e[pos:]] = c
        return Poly(self.arity + 1, out)

    def drop_axis(self, pos: int) -> "Poly":
        """Reinterpret in one fewer variable; x_pos must not occur."""
        out = {}
        for e, c in self.terms.items():
            if e[pos]:
                raise PolyError(f"variable {pos} occurs; cannot drop axis")
            out[e[:pos] + e[pos + 1:]] = c
        return Poly(self.arity - 1, out)

    # -- comparisons --------------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self.terms.items())))
        return self._hash

    # -- text ---------------------------------------------------------------

    def format(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = [f"x{i}" for i in range(self.arity)]
        parts = []
        for e in sorted(self.terms, key=grevlex_key, reverse=True):
            c = self.terms[e]
            factors = []
            for i, k in enumerate(e):
                if k == 1:
                    factors.append(names[i])
                elif k > 1:
                    factors.append(f"{names[i]}^{k}")
            if not factors:
                body = str(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(abs(c))] + factors)
            parts.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self):
        return f"Poly({self.format()})"


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
                    r"|(?P<op>[-+*^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise PolyError(f"syntax error at column {pos + 1}: {text[pos:pos + 10]!r}")
            break
        out.append((m.lastgroup, m.group(m.lastgroup), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, tokens, names: Sequence[str]):
        self.tokens = tokens
        self.i = 0
        self.names = list(names)
        self.arity = len(self.names)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expr(self) -> Poly:
        sign = 1
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        p = self.term().scale(sign)
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                q = self.term()
                p = p + (q.scale(-1) if val == "-" else q)
            else:
                return p

    def term(self) -> Poly:
        p = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                p = p * self.factor()
            elif kind in ("num", "name") or (kind == "op" and val == "("):
                p = p * self.factor()
            else:
                return p

    def factor(self) -> Poly:
        p = self.base()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num" or "/" in val:
                raise PolyError(f"syntax error at column {pos + 1}: exponent must be a natural")
            p = p ** int(val)
        return p

    def base(self) -> Poly:
        kind, val, pos = self.take()
        if kind == "num":
            return Poly.const(self.arity, Fraction(val))
        if kind == "name":
            try:
                return Poly.var(self.arity, self.names.index(val))
            except ValueError:
                raise PolyError(f"unknown variable {val!r} at column {pos + 1}") from None
        if kind == "op" and val == "(":
            p = self.expr()
            kind, val, pos = self.take()
            if not (kind == "op" and val == ")"):
                raise PolyError(f"syntax error at column {pos + 1}: expected ')'")
            return p
        raise PolyError(f"syntax error at column {pos + 1}")


def parse_poly(text: str, names: Sequence[str]) -> Poly:
    """Parse the CLI polynomial grammar: `+ - ^`, optional `*`, rationals `p/q`."""
    parser = _Parser(_tokenize(text), names)
    p = parser.expr()
    kind, _, pos = parser.peek()
    if kind != "end":
        raise PolyError(f"syntax error at column {pos + 1}: trailing input")
    return p
