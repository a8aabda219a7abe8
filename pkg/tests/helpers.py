"""Shared fixtures for the test modules: random corpora and comparison helpers."""

import random

from supergeom.algebra import SuperVectorSpace
from supergeom.lie import LieSuperalgebra
from supergeom.morphisms import product_morphism, random_morphism, rename_coordinates
from supergeom.weil import dual_numbers, odd_line, tensor_identification, truncated_line, weil_apply, weil_tensor


def random_space(rng, tag, max_even=3, max_odd=3):
    p, q = rng.randint(1, max_even), rng.randint(0, max_odd)
    return SuperVectorSpace(tuple(f"{tag}x{i}" for i in range(p)), tuple(f"{tag}t{i}" for i in range(q)))


def random_triples(seed, count=100):
    """Composable (f, g, h) with dims <= 3|3, degree <= 4, coefficients in [-10, 10]."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        A, B, C, D = (random_space(rng, c) for c in "abcd")
        f = random_morphism(rng, A, B, rng.randint(1, 4), 3)
        g = random_morphism(rng, B, C, rng.randint(1, 4), 3)
        h = random_morphism(rng, C, D, rng.randint(1, 4), 3)
        out.append((f, g, h))
    return out


def weil_algebras():
    """The four test algebras, plus disjointly named copies for tensor products."""
    D = dual_numbers("eps")
    Th = odd_line("theta")
    T3 = truncated_line("t", 3)
    DTh = weil_tensor(dual_numbers("d"), odd_line("o"))
    return {"D": D, "Th": Th, "T3": T3, "DTh": DTh}


def weil_copies():
    D = dual_numbers("eps2")
    Th = odd_line("theta2")
    T3 = truncated_line("s", 3)
    DTh = weil_tensor(dual_numbers("d2"), odd_line("o2"))
    return {"D": D, "Th": Th, "T3": T3, "DTh": DTh}


def tensor_lift_matches(A, B, f):
    """T^{A(x)B} f equals T^A T^B f after the coordinate identification."""
    lhs = weil_apply(weil_tensor(A, B), f)
    rhs = weil_apply(A, weil_apply(B, f))
    src = tensor_identification(A, B, f.source)
    tgt = tensor_identification(A, B, f.target)
    return rename_coordinates(lhs, rhs.source, rhs.target, src, tgt) == rhs


def products_preserved(A, f, g):
    lhs = weil_apply(A, product_morphism(f, g))
    rhs = product_morphism(weil_apply(A, f), weil_apply(A, g))
    same = lambda space: {n: (n, 1) for n in space.names}
    return rename_coordinates(lhs, rhs.source, rhs.target, same(lhs.source), same(lhs.target)) == rhs


def fiber_coordinates(A, space):
    """Coordinates of T^A E along the maximal ideal (everything but the 1: block)."""
    return [n for n in space.names if not n.startswith("1:")]


# Lie superalgebras used by the enveloping-algebra tests
def odd_square():
    return LieSuperalgebra([("x", 0), ("y", 1)], {("y", "y"): {"x": 1}})


def heisenberg():
    return LieSuperalgebra(
        [("e1", 0), ("e2", 0), ("e3", 0), ("y1", 1), ("y2", 1)],
        {("e1", "e2"): {"e3": 1}, ("e1", "y1"): {"y2": 1}, ("y1", "y1"): {"e3": 1}},
    )


def gl11():
    # gl(1|1): e11, e22 even; e12, e21 odd
    return LieSuperalgebra(
        [("h1", 0), ("h2", 0), ("u", 1), ("d", 1)],
        {
            ("h1", "u"): {"u": 1},
            ("h2", "u"): {"u": -1},
            ("h1", "d"): {"d": -1},
            ("h2", "d"): {"d": 1},
            ("u", "d"): {"h1": 1, "h2": 1},
        },
    )


def abelian():
    return LieSuperalgebra([("a", 0), ("b", 1), ("c", 1)], {})
