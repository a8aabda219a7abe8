import random
from fractions import Fraction

import pytest

from supergeom.algebra import SuperVectorSpace, parse_superpoly
from supergeom.groups import (
    Distribution,
    PairRepresentation,
    berezin_pair,
    check_action,
    check_pair,
    check_representation,
    convolution_pairing,
    convolve,
    density_convolution_pairing,
    evaluate_on,
    evaluate_on_pair,
    group_on_TG,
    heisenberg_pair,
    identity_distribution,
    koszul_build,
    make_pair,
    morphism_to_rep,
    pair_corpus,
    pullback_function,
    rep_to_morphism,
    test_functions as make_test_functions,
    underlying_law_matches,
    verify_group,
)
from supergeom.lie import LieSuperalgebra, UEnvElement, parse_uenv, u_mul
from supergeom.morphisms import InvariantError, SpolMorphism, fiberwise_degree_check

CORPUS = pair_corpus()
IDS = [p.name for p in CORPUS]


@pytest.fixture(scope="module")
def groups():
    return {p.name: koszul_build(p) for p in CORPUS}


def pull(kg, name):
    return kg.mult.pullbacks()[name]


def sp(space, text):
    return parse_superpoly(space, text)


@pytest.mark.parametrize("pair", CORPUS, ids=IDS)
def test_corpus_pairs_are_valid(pair):
    ok, why = check_pair(pair)
    assert ok, why


def corrupted_heisenberg(ad_y1="e1", law_e3="1.e3 + 2.e3 + 1/2*1.e1*2.e2 - 1/2*1.e2*2.e1"):
    h = heisenberg_pair()
    law = {"e1": "1.e1 + 2.e1", "e2": "1.e2 + 2.e2", "e3": law_e3}
    ad = {
        "e1": {"e1": "1", "e3": "-e2"},
        "e2": {"e2": "1", "e3": "e1"},
        "e3": {"e3": "1"},
        "y1": {"y1": "1", "y2": ad_y1},
        "y2": {"y2": "1"},
    }
    return make_pair(h.g, law, {n: f"-{n}" for n in ("e1", "e2", "e3")}, ad, "corrupted")


def test_pair_with_bad_ad_fails_with_witness():
    # Ad(t) = 1 + t N is a homomorphism, but moves y1 to y1 + t y2 while [y2, y2] = x
    g = LieSuperalgebra([("x", 0), ("y1", 1), ("y2", 1)], {("y1", "y1"): {"x": 1}, ("y2", "y2"): {"x": 1}})
    pair = make_pair(g, {"x": "1.x + 2.x"}, {"x": "-x"}, {"x": {"x": "1"}, "y1": {"y1": "1", "y2": "x"}, "y2": {"y2": "1"}})
    ok, (label, witness) = check_pair(pair)
    assert not ok
    assert label == "ad-bracket"
    assert witness == ("y1", "y1")


def test_pair_with_wrong_ad_derivative_fails():
    ok, (label, _) = check_pair(corrupted_heisenberg(ad_y1="2*e1"))
    assert not ok and label == "ad-derivative"


def test_pair_with_wrong_bracket_sign_fails():
    ok, (label, _) = check_pair(corrupted_heisenberg(law_e3="1.e3 + 2.e3 - 1/2*1.e1*2.e2 + 1/2*1.e2*2.e1"))
    assert not ok


def test_abelian_odd_line_multiplication(groups):
    kg = groups["abelian 0|1"]
    assert pull(kg, "y1") == sp(kg.GxG, "1.y1 + 2.y1")


@pytest.mark.parametrize("p,q", [(1, 1), (2, 2), (0, 2), (2, 0)])
def test_abelian_laws_are_addition(groups, p, q):
    kg = groups[f"abelian {p}|{q}"]
    for n in kg.G.names:
        assert pull(kg, n) == sp(kg.GxG, f"1.{n} + 2.{n}")
        assert kg.inv.pullbacks()[n] == sp(kg.G, f"-{n}")


def test_odd_square_multiplication(groups):
    kg = groups["x=[y,y]"]
    assert pull(kg, "y") == sp(kg.GxG, "1.y + 2.y")
    assert pull(kg, "x") == sp(kg.GxG, "1.x + 2.x - 1/2*1.y*2.y")
    # <m^* x, y (x) y> = <x, y y> = 1/2 <x, x>, and <x, x at 0> = dx/dx = 1
    y = UEnvElement.generator(kg.g, "y")
    assert evaluate_on_pair(kg, pull(kg, "x"), y, y, [0], [0]) == Fraction(1, 2)


@pytest.mark.parametrize("name", IDS)
def test_verify_group_corpus(groups, name):
    kg = groups[name]
    ok, why = verify_group(kg)
    assert ok, why
    assert underlying_law_matches(kg)


def test_corrupted_multiplication_fails_associativity(groups):
    kg = groups["x=[y,y]"]
    pulls = kg.mult.pullbacks()
    pulls["x"] = pulls["x"] + sp(kg.GxG, "1.x*2.x")
    bad = SpolMorphism.from_pullbacks(kg.GxG, kg.G, pulls)
    ok, (label, witness) = verify_group(kg, mult=bad)
    assert not ok
    assert label == "associativity"
    assert witness is not None


@pytest.mark.parametrize("name", IDS)
def test_tangent_group_law(groups, name):
    report = group_on_TG(groups[name])
    assert report.law_matches
    assert report.ad_restricts
    assert report.bracket_matches


def test_tangent_group_detects_wrong_bracket():
    pair = corrupted_heisenberg(law_e3="1.e3 + 2.e3 - 1/2*1.e1*2.e2 + 1/2*1.e2*2.e1")
    kg = koszul_build(pair, check=False)
    assert verify_group(kg)[0]
    assert not group_on_TG(kg).ok


def test_convolution_odd_square(groups):
    kg = groups["x=[y,y]"]
    g = kg.g
    y = identity_distribution(kg, UEnvElement.generator(g, "y"))
    out = convolve(y, y, kg)
    assert out == identity_distribution(kg, parse_uenv(g, "1/2*x"))
    for f in make_test_functions(kg.G, 2):
        assert convolution_pairing(kg, f, y, y) == out.pair_with(kg, f)


def test_convolution_unit(groups):
    for kg in groups.values():
        g = kg.g
        delta = identity_distribution(kg, UEnvElement.one(g))
        for name in g.names:
            u = identity_distribution(kg, UEnvElement.generator(g, name))
            assert convolve(delta, u, kg) == u
            assert convolve(u, delta, kg) == u


def test_abelian_odd_square_vanishes(groups):
    kg = groups["abelian 0|1"]
    y = identity_distribution(kg, UEnvElement.generator(kg.g, "y1"))
    out = convolve(y, y, kg)
    assert not out.u
    for f in make_test_functions(kg.G, 2):
        assert convolution_pairing(kg, f, y, y) == 0


def _random_u(rng, g, max_len=2):
    out = UEnvElement(g)
    for _ in range(2):
        word = [rng.choice(g.names) for _ in range(rng.randint(0, max_len))]
        out = out + UEnvElement.from_word(g, word).scale(Fraction(rng.randint(-3, 3)))
    return out


@pytest.mark.parametrize("name", ["x=[y,y]", "heisenberg + odd module", "abelian 1|2"])
def test_identity_convolution_is_enveloping_product(groups, name):
    kg = groups[name]
    rng = random.Random(4)
    fs = make_test_functions(kg.G, 2)
    for _ in range(3):
        u, v = _random_u(rng, kg.g), _random_u(rng, kg.g)
        du, dv = identity_distribution(kg, u), identity_distribution(kg, v)
        prod = identity_distribution(kg, u_mul(u, v))
        for f in fs:
            assert convolution_pairing(kg, f, du, dv) == prod.pair_with(kg, f)


def test_convolution_away_from_identity(groups):
    kg = groups["heisenberg + odd module"]
    g = kg.g
    a = Distribution((Fraction(1), Fraction(0), Fraction(2)), parse_uenv(g, "e1*y1"))
    b = Distribution((Fraction(0), Fraction(1, 2), Fraction(0)), parse_uenv(g, "y1*y2 + e2"))
    out = convolve(a, b, kg)
    assert out.base == (Fraction(1), Fraction(1, 2), Fraction(9, 4))
    for f in make_test_functions(kg.G, 1):
        assert convolution_pairing(kg, f, a, b) == out.pair_with(kg, f)


def test_pairing_with_points(groups):
    kg = groups["x=[y,y]"]
    f = sp(kg.G, "x^2 + 3*x*y")
    one = UEnvElement.one(kg.g)
    assert evaluate_on(kg, f, one, [Fraction(2)]) == 4
    assert evaluate_on(kg, f, UEnvElement.generator(kg.g, "x"), [Fraction(2)]) == 4


T1 = SuperVectorSpace((), ("tau",))


def test_berezin_examples():
    f = sp(T1, "2 + 5*tau")
    assert berezin_pair(f, sp(T1, "tau")) == 2
    assert berezin_pair(f, sp(T1, "1")) == 5
    Q = SuperVectorSpace((), ("xi1", "xi2"))
    assert berezin_pair(sp(Q, "1"), sp(Q, "xi1*xi2")) == 1


def test_delta_density_is_convolution_unit():
    delta = sp(T1, "tau")
    basis = [sp(T1, "1"), sp(T1, "tau")]
    for f in basis:
        for w in basis + [sp(T1, "3 - 2*tau")]:
            assert density_convolution_pairing(f, delta, w) == berezin_pair(f, w)
            assert density_convolution_pairing(f, w, delta) == berezin_pair(f, w)


def test_density_convolution_two_odd():
    Q = SuperVectorSpace((), ("a", "b"))
    delta = sp(Q, "a*b")
    w = sp(Q, "1 + 2*a - b + 5*a*b")
    for f in [sp(Q, "1"), sp(Q, "a"), sp(Q, "b"), sp(Q, "a*b")]:
        assert density_convolution_pairing(f, delta, w) == berezin_pair(f, w)


# representations -----------------------------------------------------------

V3 = SuperVectorSpace(("v1", "v2"), ("w",))


def odd_square_rep(pair):
    return PairRepresentation(
        pair,
        V3,
        {"v1": {"v1": "1", "v2": parse_poly(pair, "x")}, "v2": {"v2": 1}, "w": {"w": 1}},
        {"y": {"v1": {"w": 1}, "w": {"v2": Fraction(1, 2)}}, "x": {"v1": {"v2": 1}}},
    )


def parse_poly(pair, text):
    return sp(pair.G0, text).odd_coefficient(())


def test_odd_square_representation(groups):
    kg = groups["x=[y,y]"]
    rep = odd_square_rep(kg.pair)
    assert check_representation(rep)[0]
    alpha = rep_to_morphism(rep, kg)
    src = alpha.source
    assert alpha.pullbacks() == {
        "v1": sp(src, "v1"),
        "v2": sp(src, "v2 + x*v1 - 1/2*y*w"),
        "w": sp(src, "w + v1*y"),
    }
    assert check_action(kg, alpha, V3)[0]
    assert fiberwise_degree_check(alpha, list(V3.names), 1)[0]
    assert morphism_to_rep(alpha, kg.pair, V3, kg) == rep


def test_odd_square_rep_needs_twice_square(groups):
    # with [y, y] = x the bracket axiom forces d alpha(x) = 2 d alpha(y)^2
    kg = groups["x=[y,y]"]
    pair = kg.pair
    half = PairRepresentation(
        pair,
        V3,
        {"v1": {"v1": "1", "v2": parse_poly(pair, "1/2*x")}, "v2": {"v2": 1}, "w": {"w": 1}},
        {"y": {"v1": {"w": 1}, "w": {"v2": Fraction(1, 2)}}, "x": {"v1": {"v2": Fraction(1, 2)}}},
    )
    ok, (label, _) = check_representation(half)
    assert not ok and label == "dalpha-bracket"


def test_odd_square_on_one_one(groups):
    kg = groups["x=[y,y]"]
    V = SuperVectorSpace(("v",), ("w",))
    rep = PairRepresentation(kg.pair, V, {"v": {"v": 1}, "w": {"w": 1}}, {"y": {"v": {"w": 1}}})
    assert check_representation(rep)[0]
    alpha = rep_to_morphism(rep, kg)
    assert alpha.pullbacks()["w"] == sp(alpha.source, "w + v*y")
    assert alpha.pullbacks()["v"] == sp(alpha.source, "v")
    assert check_action(kg, alpha, V)[0]
    assert morphism_to_rep(alpha, kg.pair, V, kg) == rep


@pytest.mark.parametrize("name", IDS)
def test_trivial_rep_is_projection(groups, name):
    kg = groups[name]
    V = SuperVectorSpace(("r",), ("s",))
    rep = PairRepresentation(kg.pair, V, {"r": {"r": 1}, "s": {"s": 1}}, {})
    alpha = rep_to_morphism(rep, kg)
    assert alpha.pullbacks() == {"r": sp(alpha.source, "r"), "s": sp(alpha.source, "s")}
    back = morphism_to_rep(alpha, kg.pair, V, kg)
    assert back.dalpha == {}
    assert back == rep


def heisenberg_reps(pair):
    W = SuperVectorSpace(("f1", "f2"), ("u",))
    first = PairRepresentation(
        pair, W, {"f1": {"f1": 1, "f2": parse_poly(pair, "e1")}, "f2": {"f2": 1}, "u": {"u": 1}}, {"e1": {"f1": {"f2": 1}}}
    )
    return W, [first]


def test_heisenberg_representation_round_trip(groups):
    kg = groups["heisenberg + odd module"]
    W, reps = heisenberg_reps(kg.pair)
    for rep in reps:
        assert check_representation(rep)[0]
        alpha = rep_to_morphism(rep, kg)
        assert check_action(kg, alpha, W)[0]
        assert fiberwise_degree_check(alpha, list(W.names), 1)[0]
        assert morphism_to_rep(alpha, kg.pair, W, kg) == rep
        assert rep_to_morphism(morphism_to_rep(alpha, kg.pair, W, kg), kg) == alpha


def test_non_linear_morphism_rejected(groups):
    kg = groups["x=[y,y]"]
    alpha = rep_to_morphism(odd_square_rep(kg.pair), kg)
    pulls = alpha.pullbacks()
    pulls["v1"] = pulls["v1"] + sp(alpha.source, "v1^2")
    bad = SpolMorphism.from_pullbacks(alpha.source, alpha.target, pulls)
    with pytest.raises(InvariantError):
        morphism_to_rep(bad, kg.pair, V3, kg)


def test_non_equivariant_morphism_rejected(groups):
    kg = groups["x=[y,y]"]
    alpha = rep_to_morphism(odd_square_rep(kg.pair), kg)
    pulls = alpha.pullbacks()
    # drop the odd correction: still linear, no longer an action
    pulls["v2"] = sp(alpha.source, "v2 + x*v1")
    bad = SpolMorphism.from_pullbacks(alpha.source, alpha.target, pulls)
    assert not check_action(kg, bad, V3)[0]
    with pytest.raises(InvariantError):
        morphism_to_rep(bad, kg.pair, V3, kg)


def test_pullback_function_is_multiplication(groups):
    kg = groups["x=[y,y]"]
    assert pullback_function(kg, sp(kg.G, "x")) == pull(kg, "x")
