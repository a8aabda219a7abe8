import random
from fractions import Fraction

import pytest

from supergeom.algebra import Poly, PreconditionError, SuperVectorSpace, parse_superpoly
from supergeom.morphisms import (
    Box,
    DomainError,
    InvariantError,
    SpolMorphism,
    apply_to_word,
    check_domain,
    compose,
    compose_literal,
    compose_on_word,
    compose_oracle,
    constant_morphism,
    fiberwise_degree_check,
    identity,
    linear_morphism,
    product_morphism,
    product_space,
    projection,
    random_morphism,
    tuple_morphism,
    underlying,
)

E = SuperVectorSpace(("x",), ("xi",))
F = SuperVectorSpace(("y",), ("eta",))
H = SuperVectorSpace(("z",), ("zeta",))


def morph(source, target, **pull):
    return SpolMorphism.from_pullbacks(source, target, {k: parse_superpoly(source, v) for k, v in pull.items()})


def example_pair():
    f = morph(E, F, y="x^2", eta="x*xi")
    g = morph(F, H, z="y", zeta="y*eta")
    return f, g


def P(nvars, terms):
    return Poly(nvars, terms)


def test_identity_components():
    R10 = SuperVectorSpace(("x",), ())
    assert identity(R10).components == {(): {"x": P(1, {(1,): 1})}}
    R01 = SuperVectorSpace((), ("eta",))
    assert identity(R01).components == {(0,): {"eta": P(0, {(): 1})}}
    R22 = SuperVectorSpace(("a", "b"), ("s", "t"))
    comps = identity(R22).components
    assert sum(len(v) for v in comps.values()) == 4
    assert comps[(0,)] == {"s": P(2, {(0, 0): 1})}


def test_apply_to_word_examples():
    R10 = SuperVectorSpace(("x",), ())
    assert apply_to_word(identity(R10), ["x"]).result == {"x": P(1, {(0,): 1})}
    sq = morph(R10, R10, x="x^2")
    assert apply_to_word(sq, ["x", "x"]).result == {"x": P(1, {(0,): 2})}
    R12 = SuperVectorSpace(("x",), ("xi1", "xi2"))
    f = SpolMorphism(R12, R10, {(0, 1): {"x": P(1, {(1,): 1})}})
    assert apply_to_word(f, ["xi2", "xi1"]).result == {"x": P(1, {(1,): -1})}


def test_compose_worked_example():
    f, g = example_pair()
    h = compose(g, f)
    assert h == morph(E, H, z="x^2", zeta="x^3*xi")
    assert compose_literal(g, f) == h
    assert compose_oracle(g, f) == h


def test_identity_laws():
    f, g = example_pair()
    for m in (f, g):
        assert compose(m, identity(m.source)) == m
        assert compose(identity(m.target), m) == m


def test_constant_then_anything():
    f, g = example_pair()
    c = constant_morphism(E, F, [Fraction(3)])
    h = compose(g, c)
    assert h == constant_morphism(E, H, [Fraction(3)])
    assert compose_oracle(g, c) == h


def test_linear_composition_is_matrix_product():
    A = SuperVectorSpace(("a1", "a2"), ("s1",))
    B = SuperVectorSpace(("b1",), ("t1", "t2"))
    C = SuperVectorSpace(("c1", "c2"), ("u1",))
    f = linear_morphism(A, B, {"b1": {"a1": 2, "a2": -1}, "t1": {"s1": 3}, "t2": {"s1": 5}})
    g = linear_morphism(B, C, {"c1": {"b1": 7}, "c2": {"b1": 1}, "u1": {"t1": 1, "t2": -2}})
    gf = linear_morphism(A, C, {"c1": {"a1": 14, "a2": -7}, "c2": {"a1": 2, "a2": -1}, "u1": {"s1": -7}})
    assert compose(g, f) == gf
    assert compose_oracle(g, f) == gf


def test_linear_morphism_rejects_mixed_parity():
    with pytest.raises(InvariantError):
        linear_morphism(E, F, {"y": {"xi": 1}})


def test_purely_odd_source():
    Q = SuperVectorSpace((), ("s1", "s2"))
    f = morph(Q, F, y="3 + s1*s2", eta="s1 - 2*s2")
    g = morph(F, H, z="y^3", zeta="y*eta")
    expected = morph(Q, H, z="27 + 27*s1*s2", zeta="3*s1 - 6*s2")
    assert compose(g, f) == expected == compose_oracle(g, f)


def test_parity_incoherent_component_rejected():
    with pytest.raises(InvariantError):
        SpolMorphism(E, E, {(0,): {"x": P(1, {(0,): 1})}})
    with pytest.raises(InvariantError):
        morph(E, F, y="xi")


def test_product_laws():
    f, g = example_pair()
    fg = product_morphism(f, g)
    src, tgt = fg.source, fg.target
    assert product_morphism(identity(E), identity(F)) == identity(product_space([E, F]))
    assert compose(projection([F, H], tgt, 0), fg) == compose(f, projection([E, F], src, 0))
    assert compose(projection([F, H], tgt, 1), fg) == compose(g, projection([E, F], src, 1))


def test_tuple_morphism_projects_back():
    f, g = example_pair()
    gf = compose(g, f)
    target = product_space([F, H])
    t = tuple_morphism(target, [F, H], f, gf)
    assert compose(projection([F, H], target, 0), t) == f
    assert compose(projection([F, H], target, 1), t) == gf


def test_product_interchange_random():
    rng = random.Random(11)
    A = SuperVectorSpace(("a",), ("s",))
    B = SuperVectorSpace(("b",), ("t",))
    C = SuperVectorSpace(("c1", "c2"), ("u",))
    D = SuperVectorSpace(("d",), ("v1", "v2"))
    for _ in range(5):
        h, f = random_morphism(rng, A, B, 2, 2), random_morphism(rng, B, A, 2, 2)
        k, g = random_morphism(rng, C, D, 2, 2), random_morphism(rng, D, C, 2, 2)
        lhs = compose(product_morphism(f, g), product_morphism(h, k))
        assert lhs == product_morphism(compose(f, h), compose(g, k))
        assert lhs == compose_oracle(product_morphism(f, g), product_morphism(h, k))


def test_underlying():
    R = SuperVectorSpace(("x",), ())
    R22 = SuperVectorSpace(("a", "b"), ("s", "t"))
    assert underlying(identity(R22)) == identity(SuperVectorSpace(("a", "b"), ()))
    f, g = example_pair()
    assert underlying(f) == morph(R, SuperVectorSpace(("y",), ()), y="x^2")


def test_underlying_is_functorial():
    rng = random.Random(5)
    A = SuperVectorSpace(("a1", "a2"), ("s1", "s2"))
    B = SuperVectorSpace(("b1",), ("t1", "t2"))
    C = SuperVectorSpace(("c1", "c2"), ("u1",))
    for _ in range(10):
        f, g = random_morphism(rng, A, B, 3, 2), random_morphism(rng, B, C, 3, 2)
        assert underlying(compose(g, f)) == compose(underlying(g), underlying(f))


def test_check_domain_examples():
    R = SuperVectorSpace(("x",), ())
    U = Box(((Fraction(-1), Fraction(1)),))
    sq = SpolMorphism.from_pullbacks(R, R, {"x": parse_superpoly(R, "x^2")}, U)
    assert check_domain(sq, Box(((Fraction(-1), Fraction(2)),))) == ("pass", None)
    shift = SpolMorphism.from_pullbacks(R, R, {"x": parse_superpoly(R, "x + 1")}, Box(((Fraction(0), Fraction(1)),)))
    status, witness = check_domain(shift, Box(((Fraction(0), Fraction(1)),)))
    assert status == "fail"
    assert witness == (Fraction(1, 2),)
    assert check_domain(shift, Box.unbounded(R)) == ("pass", None)


def test_compose_refuses_out_of_domain():
    R = SuperVectorSpace(("x",), ())
    box = Box(((Fraction(0), Fraction(1)),))
    shift = SpolMorphism.from_pullbacks(R, R, {"x": parse_superpoly(R, "x + 1")}, box)
    g = SpolMorphism.from_pullbacks(R, R, {"x": parse_superpoly(R, "x")}, box, box)
    with pytest.raises(DomainError):
        compose(g, shift)


def test_fiberwise_degree_examples():
    S = SuperVectorSpace(("s", "v1", "v2"), ())
    V = SuperVectorSpace(("w1", "w2"), ())
    lin = morph(S, V, w1="s^2*v1 + v2", w2="3*s*v2")
    assert fiberwise_degree_check(lin, ["v1", "v2"], 1)[0]
    R = SuperVectorSpace(("v",), ())
    sq = morph(R, R, v="v^2")
    assert not fiberwise_degree_check(sq, ["v"], 1)[0]
    assert fiberwise_degree_check(sq, ["v"], 2)[0]


def test_fiberwise_multilinear_symmetric():
    S = SuperVectorSpace(("a", "b"), ())
    T = SuperVectorSpace(("w",), ())
    assert fiberwise_degree_check(morph(S, T, w="a*b"), [["a"], ["b"]], 2)[0]
    ok, reason = fiberwise_degree_check(morph(S, T, w="a*b + a^2"), [["a"], ["b"]], 2)
    assert not ok


def test_compose_on_word_is_linear_over_even_part():
    rng = random.Random(3)
    A = SuperVectorSpace(("a1", "a2"), ("s1", "s2"))
    B = SuperVectorSpace(("b1",), ("t1", "t2"))
    C = SuperVectorSpace(("c1",), ("u1",))
    for _ in range(5):
        f, g = random_morphism(rng, A, B, 3, 2), random_morphism(rng, B, C, 3, 2)
        gf = compose(g, f)
        for word in [("a1", "s1"), ("a1", "a2", "s1", "s2"), ("a2", "a2"), ("s2", "s1")]:
            assert compose_on_word(g, f, word) == apply_to_word(gf, word).result


def test_three_methods_agree_random():
    rng = random.Random(17)
    A = SuperVectorSpace(("a1",), ("s1", "s2", "s3"))
    B = SuperVectorSpace(("b1", "b2"), ("t1", "t2"))
    C = SuperVectorSpace(("c1",), ("u1", "u2"))
    for _ in range(10):
        f, g = random_morphism(rng, A, B, 3, 2), random_morphism(rng, B, C, 3, 2)
        fast = compose(g, f)
        assert fast == compose_literal(g, f)
        assert fast == compose_oracle(g, f)


def test_compose_rejects_mismatched_spaces():
    f, g = example_pair()
    with pytest.raises(PreconditionError):
        compose(f, g)
