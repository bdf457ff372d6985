import random

import pytest

from desing import Ideal, MarkedIdeal, Poly, parse_poly, root_chart

XY = ("x", "y")
XYZ = ("x", "y", "z")
XYZW = ("x", "y", "z", "w")


def P(text, names=XY):
    return parse_poly(text, names)


def ideal(names, *texts):
    return Ideal(len(names), [parse_poly(t, names) for t in texts])


def marked(names, gens, d, n_dim=None, e=()):
    """Build a marked ideal on a fresh root chart.

    e: iterable of variable names bound as initial exceptional hyperplanes.
    """
    chart = root_chart(names, n_dim, [(i, names.index(v)) for i, v in enumerate(e)])
    return MarkedIdeal(chart, ideal(names, *gens), d)


def random_poly(rng: random.Random, arity: int, max_deg=3, max_terms=4,
                coeff_range=3) -> Poly:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        e = [0] * arity
        for _ in range(rng.randint(0, max_deg)):
            e[rng.randrange(arity)] += 1
        c = rng.randint(-coeff_range, coeff_range)
        if c:
            terms[tuple(e)] = terms.get(tuple(e), 0) + c
    return Poly(arity, {k: v for k, v in terms.items() if v})


@pytest.fixture
def rng():
    return random.Random(20260808)
