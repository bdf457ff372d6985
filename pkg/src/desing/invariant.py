"""The desingularization invariant: values, comparison, monomial combinatorics.

An invariant value is a finite list of pairs (nu, s) in Q_{>0} x N followed by
a terminator 0 or infinity, compared lexicographically with 0 below every pair
and infinity above.  Alongside it live mu (a nonnegative rational or infinity)
and J (an ordered subset of the divisor universe); centers are the maximum
locus of (inv, J), while mu only enters the decrease assertion.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

INF = float("inf")

TERM_ZERO = "zero"
TERM_INF = "inf"

# token tags order: terminator-zero < numeric entry < terminator-infinity
_T_ZERO = (0,)
_T_INF = (2,)


def _tok(x):
    return (1, Fraction(x))


@dataclass(frozen=True)
class InvariantValue:
    pairs: tuple      # ((nu, s), ...) with nu a positive Fraction, s a natural
    terminator: str   # TERM_ZERO or TERM_INF

    def tokens(self) -> tuple:
        out = []
        for nu, s in self.pairs:
            out.append(_tok(nu))
            out.append(_tok(s))
        out.append(_T_ZERO if self.terminator == TERM_ZERO else _T_INF)
        return tuple(out)

    def __lt__(self, other):
        return self.tokens() < other.tokens()

    def __le__(self, other):
        return self.tokens() <= other.tokens()

    def serialize(self) -> str:
        body = ";".join(f"{_frac(nu)},{s}" for nu, s in self.pairs)
        tail = "inf" if self.terminator == TERM_INF else "0"
        return "[" + (body + ";" if body else "") + tail + "]"

    def __repr__(self):
        return self.serialize()


def _frac(x) -> str:
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


@dataclass(frozen=True)
class MonomialMark:
    mu: object            # Fraction or infinity
    j_labels: tuple       # divisor labels, birth order

    def serialize(self) -> str:
        mu = "inf" if self.mu == INF else _frac(self.mu)
        return f"mu={mu} J={{{','.join(str(l) for l in self.j_labels)}}}"


def subset_compare(a, b, universe) -> int:
    """Compare divisor subsets by the lexicographic order of their 0/1 sequences
    over the birth-ordered universe; returns -1, 0, or 1."""
    sa, sb = set(a), set(b)
    da = tuple(1 if u in sa else 0 for u in universe)
    db = tuple(1 if u in sb else 0 for u in universe)
    return (da > db) - (da < db)


def subset_max(subsets, universe):
    best = None
    for s in subsets:
        if best is None or subset_compare(s, best, universe) > 0:
            best = s
    return best


def monomial_J(alpha, d: int, universe) -> tuple | None:
    """Maximum admissible subset for the monomial case.

    alpha maps divisor labels to positive exponents; among subsets I with
    0 <= sum(alpha) - d < alpha_k for all k in I, return the subset_compare
    maximum (as a birth-ordered tuple), or None when the total stays below d.
    """
    labels = [u for u in universe if alpha.get(u, 0) > 0]
    valid = []
    for r in range(1, len(labels) + 1):
        for combo in itertools.combinations(labels, r):
            total = sum(alpha[l] for l in combo)
            excess = total - d
            if 0 <= excess and all(excess < alpha[l] for l in combo):
                valid.append(combo)
    if not valid:
        return None
    best = subset_max(valid, universe)
    return tuple(u for u in universe if u in set(best))


def compare_inv(a: InvariantValue, b: InvariantValue) -> int:
    ta, tb = a.tokens(), b.tokens()
    return (ta > tb) - (ta < tb)


def compare_selection(a, b, universe) -> int:
    """Order (inv, J) pairs the way center selection does."""
    inv_a, j_a = a
    inv_b, j_b = b
    c = compare_inv(inv_a, inv_b)
    if c:
        return c
    return subset_compare(j_a, j_b, universe)


def compare_decrease(a, b) -> int:
    """Order (inv, mu) pairs for the strict-decrease assertion."""
    inv_a, mu_a = a
    inv_b, mu_b = b
    c = compare_inv(inv_a, inv_b)
    if c:
        return c
    fa = mu_a if mu_a == INF else Fraction(mu_a)
    fb = mu_b if mu_b == INF else Fraction(mu_b)
    return (fa > fb) - (fa < fb)


def parse_invariant(text: str) -> InvariantValue:
    """Inverse of InvariantValue.serialize, for fixtures."""
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    parts = [p for p in body.split(";") if p]
    tail = parts[-1]
    pairs = []
    for p in parts[:-1]:
        nu, s = p.split(",")
        pairs.append((Fraction(nu), int(s)))
    term = TERM_INF if tail == "inf" else TERM_ZERO
    return InvariantValue(tuple(pairs), term)
