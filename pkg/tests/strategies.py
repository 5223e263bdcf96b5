"""Hypothesis strategies shared across the test modules."""
import random

from hypothesis import strategies as st

from soalab.fpmod import FpModule, Ring, iso_classes, random_morphism

RINGS = [Ring.Zmod(4), Ring.Zmod(6)]


@st.composite
def presentations(draw, ring=None, max_gens=3, max_rels=3):
    """A module given by a random (not necessarily diagonal) relation matrix."""
    R = ring or draw(st.sampled_from(RINGS))
    n = draw(st.integers(0, max_gens))
    k = draw(st.integers(0, max_rels))
    cols = [[draw(st.integers(-6, 6)) for _ in range(n)] for _ in range(k)]
    return FpModule.from_columns(R, n, cols)


def small_objects(ring, bound=8):
    return st.sampled_from(iso_classes(ring, bound))


@st.composite
def morphisms(draw, ring=None, bound=8, dom=None, cod=None):
    R = ring or draw(st.sampled_from(RINGS))
    A = dom if dom is not None else draw(small_objects(R, bound))
    B = cod if cod is not None else draw(small_objects(R, bound))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_morphism(A, B, random.Random(seed))


@st.composite
def composable_pairs(draw, ring=None, bound=8):
    f = draw(morphisms(ring, bound))
    g = draw(morphisms(f.cod.ring, bound, dom=f.cod))
    return f, g


@st.composite
def spans(draw, ring=None, bound=8):
    """(f: A -> B, g: A -> C) with a common domain."""
    f = draw(morphisms(ring, bound))
    g = draw(morphisms(f.dom.ring, bound, dom=f.dom))
    return f, g


@st.composite
def cospans(draw, ring=None, bound=8):
    """(f: B -> D, g: C -> D) with a common codomain."""
    f = draw(morphisms(ring, bound))
    g = draw(morphisms(f.dom.ring, bound, cod=f.cod))
    return f, g
