import random
from fractions import Fraction

import pytest
import sympy

from helpers import fiber_coordinates, products_preserved, tensor_lift_matches, weil_algebras, weil_copies
from supergeom.algebra import PreconditionError, SuperPolynomial, SuperVectorSpace, parse_superpoly
from supergeom.morphisms import InvariantError, SpolMorphism, compose, fiberwise_degree_check, identity, random_morphism
from supergeom.weil import (
    WeilAlgebra,
    WeilMorphism,
    augmentation,
    dual_numbers,
    identity_weil,
    natural_transform,
    odd_line,
    projection_section,
    real_line_algebra,
    truncated_line,
    unit_map,
    vector_field,
    vector_field_apply,
    vector_field_apply_literal,
    vector_field_bracket,
    weil_apply,
    weil_space,
    weil_tensor,
)

E = SuperVectorSpace(("x",), ("xi",))
R = SuperVectorSpace(("x",), ())


def morph(source, target, **pull):
    return SpolMorphism.from_pullbacks(source, target, {k: parse_superpoly(source, v) for k, v in pull.items()})


def test_dual_numbers():
    D = dual_numbers()
    assert D.basis_names == ("1", "eps")
    assert D.height == 1
    assert D.width == (1, 0)


def test_odd_line():
    Th = odd_line()
    assert Th.basis_names == ("1", "theta")
    assert Th.height == 1
    assert Th.width == (0, 1)


def test_dual_tensor_odd():
    A = weil_tensor(dual_numbers(), odd_line())
    assert sorted(A.basis_names) == ["1", "eps", "eps*theta", "theta"]
    assert A.height == 2
    assert A.width == (1, 1)


def test_tensor_with_reals_is_same_algebra():
    D = dual_numbers()
    assert weil_tensor(D, real_line_algebra()) == D


def test_odd_generators_anticommute_in_tensor():
    A = weil_tensor(odd_line("t1"), odd_line("t2"))
    t1, t2 = A.generator("t1"), A.generator("t2")
    assert A.mul(t2, t1) == {k: -c for k, c in A.mul(t1, t2).items()}
    assert A.mul(t1, t1) == {}


def test_tensor_heights_add():
    algs = list(weil_algebras().values())
    copies = list(weil_copies().values())
    for A in algs:
        for B in copies:
            assert weil_tensor(A, B).height == A.height + B.height


def test_non_nilpotent_generator_rejected():
    with pytest.raises(PreconditionError):
        WeilAlgebra([("x", 0)])


def test_tangent_lift_of_square():
    Tf = weil_apply(dual_numbers(), morph(R, SuperVectorSpace(("y",), ()), y="x^2"))
    src = Tf.source
    assert Tf.pullbacks()["1:y"] == parse_superpoly(src, "1:x^2")
    assert Tf.pullbacks()["eps:y"] == parse_superpoly(src, "2*1:x*eps:x")


def test_odd_tangent_lift_matches_hand_expansion():
    # f(x + theta u, xi + theta s) with u = theta:x odd and s = theta:xi even:
    # (x + theta u)^2 = x^2 + theta 2xu and (x + theta u)(xi + theta s) = x xi + theta (x s + u xi)
    f = morph(E, SuperVectorSpace(("y",), ("eta",)), y="x^2", eta="x*xi")
    Tf = weil_apply(odd_line(), f)
    S = Tf.source
    pull = Tf.pullbacks()
    assert pull["1:y"] == parse_superpoly(S, "1:x^2")
    assert pull["theta:y"] == parse_superpoly(S, "2*1:x*theta:x")
    assert pull["1:eta"] == parse_superpoly(S, "1:x*1:xi")
    assert pull["theta:eta"] == parse_superpoly(S, "1:x*theta:xi + theta:x*1:xi")


def test_trivial_algebra_lift_is_identity_functor():
    rng = random.Random(1)
    for _ in range(5):
        f = random_morphism(rng, E, E, 3, 2)
        assert weil_apply(real_line_algebra(), f) == f


def _sympy_jet(poly_text, order):
    x = sympy.symbols("x")
    t = sympy.symbols("t")
    u = sympy.symbols(f"u0:{order + 1}")
    point = sum(u[k] * t**k for k in range(order + 1))
    value = sympy.expand(sympy.sympify(poly_text.replace("^", "**")).subs(x, point))
    return [sympy.Poly(value.coeff(t, k), *u) for k in range(order + 1)], u


def test_truncated_line_lift_against_sympy():
    T3 = truncated_line("t", 4)
    text = "3*x^4 - 2*x^3 + x - 7"
    Tf = weil_apply(T3, morph(R, SuperVectorSpace(("y",), ()), y=text))
    jets, u = _sympy_jet(text, 3)
    names = ["1:x", "t:x", "t^2:x", "t^3:x"]
    targets = ["1:y", "t:y", "t^2:y", "t^3:y"]
    for k, name in enumerate(targets):
        got = Tf.pullbacks()[name]
        expected = {}
        for monom, c in jets[k].terms():
            exp = [0] * 4
            for var, e in zip(names, monom):
                exp[Tf.source.index(var)] = e
            expected[((), tuple(exp))] = Fraction(int(c.p), int(c.q))
        assert got.terms == expected


@pytest.mark.parametrize("key", ["D", "Th", "T3", "DTh"])
def test_functor_laws_random(key):
    A = weil_algebras()[key]
    rng = random.Random(hash(key) % 1000)
    X = SuperVectorSpace(("a",), ("s",))
    Y = SuperVectorSpace(("b",), ("t",))
    Z = SuperVectorSpace(("c",), ("u",))
    assert weil_apply(A, identity(X)) == identity(weil_space(A, X))
    for _ in range(20):
        f, g = random_morphism(rng, X, Y, 3, 2), random_morphism(rng, Y, Z, 3, 2)
        assert weil_apply(A, compose(g, f)) == compose(weil_apply(A, g), weil_apply(A, f))
        assert weil_apply(A, f, A.height + 1) == weil_apply(A, f)


@pytest.mark.parametrize("key", ["D", "Th", "T3", "DTh"])
def test_products_preserved(key):
    A = weil_algebras()[key]
    rng = random.Random(7)
    X, Y = SuperVectorSpace(("a",), ("s",)), SuperVectorSpace(("b",), ("t",))
    U, V = SuperVectorSpace(("c",), ()), SuperVectorSpace(("d",), ("w",))
    for _ in range(5):
        assert products_preserved(A, random_morphism(rng, X, Y, 2, 2), random_morphism(rng, U, V, 2, 2))


@pytest.mark.parametrize("pair", [("D", "Th"), ("Th", "Th"), ("D", "D"), ("Th", "D"), ("T3", "Th")])
def test_tensor_lift_identification(pair):
    A, B = weil_algebras()[pair[0]], weil_copies()[pair[1]]
    rng = random.Random(3)
    X = SuperVectorSpace(("a",), ("s",))
    Y = SuperVectorSpace(("b",), ("t",))
    for _ in range(3):
        assert tensor_lift_matches(A, B, random_morphism(rng, X, Y, 2, 2))


def test_natural_transformations():
    rng = random.Random(2)
    A = weil_algebras()["DTh"]
    D = dual_numbers("d")
    to_dual = WeilMorphism(A, D, {"d": {"d": 1}})
    phis = [augmentation(A), unit_map(A), identity_weil(A), to_dual, WeilMorphism(truncated_line("t", 3), dual_numbers(), {"t": {"eps": 1}})]
    for phi in phis:
        for _ in range(3):
            f = random_morphism(rng, E, E, 2, 2)
            lhs = compose(natural_transform(phi, E), weil_apply(phi.source, f))
            rhs = compose(weil_apply(phi.target, f), natural_transform(phi, E))
            assert lhs == rhs


def test_projection_and_zero_section():
    A = dual_numbers()
    pi, zero = projection_section(A, E)
    assert compose(pi, zero) == identity(E)
    assert natural_transform(identity_weil(A), E) == identity(weil_space(A, E))
    assert pi.pullbacks()["x"] == parse_superpoly(pi.source, "1:x")


def test_weil_morphism_must_respect_relations():
    with pytest.raises(InvariantError):
        WeilMorphism(dual_numbers(), truncated_line("t", 3), {"eps": {"t": 1}})


@pytest.mark.parametrize("key", ["D", "Th"])
def test_square_zero_lifts_are_fiberwise_linear(key):
    A = weil_algebras()[key]
    rng = random.Random(9)
    for _ in range(10):
        Tf = weil_apply(A, random_morphism(rng, E, E, 3, 2))
        fiber = fiber_coordinates(A, Tf.source)
        ok, why = fiberwise_degree_check(Tf, fiber, 1, fiber_coordinates(A, Tf.target))
        assert ok, why


def test_cube_lift_of_square_is_not_fiberwise_linear():
    T3 = truncated_line("t", 3)
    Tf = weil_apply(T3, morph(R, SuperVectorSpace(("y",), ()), y="x^2"))
    ok, _ = fiberwise_degree_check(Tf, fiber_coordinates(T3, Tf.source), 1, fiber_coordinates(T3, Tf.target))
    assert not ok


def test_vector_field_examples():
    assert vector_field_apply(vector_field(R, {"x": parse_superpoly(R, "1")}), parse_superpoly(R, "x^3")) == parse_superpoly(R, "3*x^2")
    X = vector_field(E, {"x": parse_superpoly(E, "xi"), "xi": parse_superpoly(E, "1")})
    h = parse_superpoly(E, "x*xi")
    assert X.parity == 1
    assert vector_field_apply(X, h) == parse_superpoly(E, "x")
    assert vector_field_apply_literal(X, h) == parse_superpoly(E, "x")
    assert vector_field_apply(X, parse_superpoly(E, "5")) == parse_superpoly(E, "0")


def test_bracket_examples():
    dx = vector_field(R, {"x": parse_superpoly(R, "1")})
    xdx = vector_field(R, {"x": parse_superpoly(R, "x")})
    assert vector_field_bracket(dx, xdx) == dx
    O = SuperVectorSpace((), ("xi",))
    dxi = vector_field(O, {"xi": parse_superpoly(O, "1")})
    assert vector_field_bracket(dxi, dxi).is_zero()


def _random_field(rng, space, parity):
    coeffs = {}
    for e in space.names:
        target = (space.parity(e) + parity) % 2
        terms = {}
        for _ in range(2):
            odd = tuple(j for j in range(space.q) if rng.random() < 0.5)
            if len(odd) % 2 != target:
                continue
            exp = tuple(rng.randint(0, 2) for _ in range(space.p))
            terms[(odd, exp)] = Fraction(rng.randint(-5, 5))
        coeffs[e] = SuperPolynomial(space, terms)
    return vector_field(space, coeffs) if any(coeffs.values()) else None


def _random_function(rng, space):
    terms = {}
    for _ in range(3):
        odd = tuple(j for j in range(space.q) if rng.random() < 0.5)
        exp = tuple(rng.randint(0, 3) for _ in range(space.p))
        terms[(odd, exp)] = Fraction(rng.randint(-5, 5))
    return SuperPolynomial(space, terms)


FIELD_SPACE = SuperVectorSpace(("x", "y"), ("xi", "eta"))


def _fields(seed, n):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        X = _random_field(rng, FIELD_SPACE, rng.randint(0, 1))
        if X is not None:
            out.append(X)
    return rng, out


def test_derivation_and_literal_routes_agree():
    rng, fields = _fields(4, 20)
    for X in fields:
        h = _random_function(rng, FIELD_SPACE)
        assert vector_field_apply(X, h) == vector_field_apply_literal(X, h)


def test_leibniz_rule():
    rng, fields = _fields(5, 20)
    for X in fields:
        f, g = _random_function(rng, FIELD_SPACE), _random_function(rng, FIELD_SPACE)
        for pf, fpart in f.homogeneous_parts().items():
            lhs = vector_field_apply(X, fpart * g)
            rhs = vector_field_apply(X, fpart) * g + fpart * vector_field_apply(X, g) * ((-1) ** (X.parity * pf))
            assert lhs == rhs


def test_bracket_is_commutator():
    rng, fields = _fields(6, 20)
    for X, Y in zip(fields[::2], fields[1::2]):
        h = _random_function(rng, FIELD_SPACE)
        sign = (-1) ** (X.parity * Y.parity)
        expected = vector_field_apply(X, vector_field_apply(Y, h)) - sign * vector_field_apply(Y, vector_field_apply(X, h))
        assert vector_field_apply(vector_field_bracket(X, Y), h) == expected


def test_bracket_jacobi():
    _, fields = _fields(8, 24)
    br = vector_field_bracket
    for X, Y, Z in zip(fields[::3], fields[1::3], fields[2::3]):
        a, b, c = X.parity, Y.parity, Z.parity
        terms = [
            ((-1) ** (a * c), br(X, br(Y, Z))),
            ((-1) ** (b * a), br(Y, br(Z, X))),
            ((-1) ** (c * b), br(Z, br(X, Y))),
        ]
        for e in FIELD_SPACE.names:
            total = sum((s * V.coefficient(e) for s, V in terms), SuperPolynomial.zero(FIELD_SPACE))
            assert not total


def test_vector_field_parity_checked():
    with pytest.raises(InvariantError):
        vector_field(E, {"x": parse_superpoly(E, "1"), "xi": parse_superpoly(E, "1")})
