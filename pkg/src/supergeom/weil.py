"""Weil superalgebras, the functors T^A and vector fields on superdomains.

A Weil algebra is presented by named generators and a monomial ideal.  Basis
elements are the surviving monomials, written with generators in declaration
order; products pick up a Koszul sign when odd generators are reordered.

T^A acts on a superdomain with coordinates ``E`` by the superdomain with
coordinates ``"a:e"`` (basis monomial ``a`` of A, coordinate ``e``), parity
``|a| + |e|``.  A morphism is lifted by evaluating its pullbacks at the
universal A-point ``z_e = sum_a a (x) X_{a:e}``: the even body is expanded as
a Taylor sum in the nilpotent directions, the odd part multiplies out.  For
the trivial algebra R the coordinate names are left untouched, so T^R f = f.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import (
    ONE,
    ZERO,
    Poly,
    PreconditionError,
    SuperPolynomial,
    SuperVectorSpace,
    frac,
    partial_derivative,
)
from .morphisms import (
    Box,
    InvariantError,
    SpolMorphism,
    compose,
)


# ---------------------------------------------------------------------------
# Weil algebras
# ---------------------------------------------------------------------------


class WeilAlgebra:
    """Local superalgebra R[x|theta]/(monomials)."""

    def __init__(self, generators: Sequence[tuple], ideal: Sequence[Mapping[str, int]] = ()):
        gens = []
        for g in generators:
            name, parity = g[0], int(g[1])
            order = g[2] if len(g) > 2 else None
            gens.append((name, parity, order))
        names = [g[0] for g in gens]
        if len(set(names)) != len(names):
            raise PreconditionError("duplicate generator names")
        self.generators = tuple(gens)
        self.names = tuple(names)
        self.parities = tuple(g[1] for g in gens)
        self._pos = {n: i for i, n in enumerate(names)}
        forbidden = []
        for mono in ideal:
            exp = [0] * len(gens)
            for n, e in mono.items():
                if n not in self._pos:
                    raise PreconditionError(f"ideal mentions unknown generator {n!r}")
                if not isinstance(e, int) or e < 0:
                    raise PreconditionError("ideal entries must be monomials with natural exponents")
                exp[self._pos[n]] = e
            if not any(exp):
                raise PreconditionError("the unit monomial cannot lie in the ideal")
            forbidden.append(tuple(exp))
        # bound on the exponent of each generator
        bounds = []
        for i, (name, parity, order) in enumerate(gens):
            if parity:
                bounds.append(1)
                continue
            pure = [f[i] for f in forbidden if sum(f) == f[i]]
            if order is not None:
                pure.append(int(order))
            if not pure:
                raise PreconditionError(f"even generator {name!r} is not nilpotent: infinite-dimensional")
            bounds.append(min(pure) - 1)
        self.ideal = tuple(forbidden)
        self.bounds = tuple(bounds)
        basis = []
        for exp in itertools.product(*[range(b + 1) for b in bounds]):
            if not self._killed(exp):
                basis.append(exp)
        basis.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
        self.basis = tuple(basis)
        self._index = {b: i for i, b in enumerate(basis)}
        self.basis_names = tuple(self.monomial_name(b) for b in basis)
        self._name_index = {n: i for i, n in enumerate(self.basis_names)}
        self.height = max(sum(b) for b in basis)
        self.width = (
            sum(1 for b in basis if sum(b) == 1 and not self.monomial_parity(b)),
            sum(1 for b in basis if sum(b) == 1 and self.monomial_parity(b)),
        )
        self._table = {}
        for i, a in enumerate(basis):
            for j, b in enumerate(basis):
                sign, k = self._mono_mul(a, b)
                if sign:
                    self._table[(i, j)] = (sign, k)
        self._validate()

    # ------------------------------------------------------------------
    def _killed(self, exp) -> bool:
        if any(e > b for e, b in zip(exp, self.bounds)):
            return True
        return any(all(e >= f for e, f in zip(exp, forb)) for forb in self.ideal)

    def _mono_mul(self, a, b):
        c = tuple(x + y for x, y in zip(a, b))
        if self._killed(c):
            return 0, None
        inv = 0
        for j, eb in enumerate(b):
            if eb and self.parities[j]:
                inv += sum(a[i] for i in range(j + 1, len(a)) if self.parities[i])
        return (-1 if inv % 2 else 1), self._index[c]

    def _validate(self):
        n = len(self.basis)
        for i in range(n):
            for j in range(n):
                sij = self._table.get((i, j))
                sji = self._table.get((j, i))
                pi, pj = self.basis_parity(i), self.basis_parity(j)
                expect = None if sji is None else ((-1) ** (pi * pj) * sji[0], sji[1])
                if sij != expect:
                    raise InvariantError("multiplication table is not supercommutative")

    # ------------------------------------------------------------------
    def monomial_name(self, exp) -> str:
        parts = []
        for n, e in zip(self.names, exp):
            if e == 1:
                parts.append(n)
            elif e > 1:
                parts.append(f"{n}^{e}")
        return "*".join(parts) if parts else "1"

    def monomial_parity(self, exp) -> int:
        return sum(e for e, p in zip(exp, self.parities) if p) % 2

    def basis_parity(self, i: int) -> int:
        return self.monomial_parity(self.basis[i])

    def basis_index(self, name: str) -> int:
        return self._name_index[name]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def mul_basis(self, i: int, j: int):
        """(sign, k) with b_i b_j = sign * b_k, or None when the product is 0."""
        return self._table.get((i, j))

    # elements are dicts basis index -> Fraction
    def element(self, data: Mapping[str, object]) -> dict:
        return {self.basis_index(n): frac(c) for n, c in data.items() if frac(c)}

    def generator(self, name: str) -> dict:
        exp = [0] * len(self.names)
        exp[self._pos[name]] = 1
        exp = tuple(exp)
        return {self._index[exp]: ONE} if exp in self._index else {}

    def mul(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> dict:
        out: dict = {}
        for i, a in u.items():
            for j, b in v.items():
                hit = self._table.get((i, j))
                if hit:
                    s, k = hit
                    out[k] = out.get(k, ZERO) + s * a * b
        return {k: c for k, c in out.items() if c}

    def is_local_nilpotent(self, u: Mapping[int, Fraction]) -> bool:
        return 0 not in u

    def _structure(self):
        return (self.names, self.parities, self.basis, tuple(sorted(self._table.items())))

    def __eq__(self, other):
        # equal as algebras on the same generators, whatever the presentation
        return isinstance(other, WeilAlgebra) and self._structure() == other._structure()

    def __hash__(self):
        return hash(self._structure())

    def __repr__(self):
        return f"WeilAlgebra(basis={list(self.basis_names)})"


def make_weil(generators: Sequence[tuple], ideal: Sequence[Mapping[str, int]] = ()) -> WeilAlgebra:
    """``generators`` are ``(name, parity)`` or ``(name, 0, order)`` with x^order = 0."""
    return WeilAlgebra(generators, ideal)


def real_line_algebra() -> WeilAlgebra:
    return WeilAlgebra([])


def dual_numbers(name: str = "eps") -> WeilAlgebra:
    return WeilAlgebra([(name, 0, 2)])


def odd_line(name: str = "theta") -> WeilAlgebra:
    return WeilAlgebra([(name, 1)])


def truncated_line(name: str = "t", order: int = 3) -> WeilAlgebra:
    return WeilAlgebra([(name, 0, order)])


def weil_tensor(A: WeilAlgebra, B: WeilAlgebra) -> WeilAlgebra:
    """Graded tensor product; generator names must be disjoint."""
    if set(A.names) & set(B.names):
        raise PreconditionError("tensor factors share generator names")
    gens = [(n, p, None) for n, p, _ in A.generators] + [(n, p, None) for n, p, _ in B.generators]
    ideal = []
    for alg, offset in ((A, 0), (B, len(A.names))):
        for i, (n, p, _) in enumerate(alg.generators):
            if not p:
                ideal.append({n: alg.bounds[i] + 1})
        for forb in alg.ideal:
            ideal.append({alg.names[i]: e for i, e in enumerate(forb) if e})
    return WeilAlgebra(gens, ideal)


# ---------------------------------------------------------------------------
# Weil morphisms
# ---------------------------------------------------------------------------


class WeilMorphism:
    """Even unital algebra map given on generators."""

    def __init__(self, source: WeilAlgebra, target: WeilAlgebra, images: Mapping[str, Mapping[str, object]]):
        self.source, self.target = source, target
        imgs = {}
        for n, p, _ in source.generators:
            u = target.element(images.get(n, {}))
            if 0 in u:
                raise InvariantError(f"image of {n!r} is not in the maximal ideal")
            if any(target.basis_parity(k) != p for k in u):
                raise InvariantError(f"image of {n!r} has the wrong parity")
            imgs[n] = u
        self.images = imgs
        self.matrix = [self._image(b) for b in source.basis]
        for forb in source.ideal:
            if self._image(forb, check=False):
                raise InvariantError("images do not satisfy the ideal relations")
        for i, (n, p, _) in enumerate(source.generators):
            if not p:
                exp = [0] * len(source.names)
                exp[i] = source.bounds[i] + 1
                if self._image(tuple(exp), check=False):
                    raise InvariantError(f"image of {n!r} is not nilpotent of the right order")

    def _image(self, exp, check=True) -> dict:
        out = {0: ONE}
        for n, e in zip(self.source.names, exp):
            for _ in range(e):
                out = self.target.mul(out, self.images[n])
        return out

    def apply(self, u: Mapping[int, Fraction]) -> dict:
        out: dict = {}
        for i, c in u.items():
            for k, v in self.matrix[i].items():
                out[k] = out.get(k, ZERO) + c * v
        return {k: v for k, v in out.items() if v}


def augmentation(A: WeilAlgebra) -> WeilMorphism:
    return WeilMorphism(A, real_line_algebra(), {})


def unit_map(A: WeilAlgebra) -> WeilMorphism:
    return WeilMorphism(real_line_algebra(), A, {})


def identity_weil(A: WeilAlgebra) -> WeilMorphism:
    return WeilMorphism(A, A, {n: {n: 1} for n in A.names})


# ---------------------------------------------------------------------------
# the space A (x) E and the universal point
# ---------------------------------------------------------------------------


def weil_coordinate(A: WeilAlgebra, a: int, e: str) -> str:
    return e if A.dim == 1 else f"{A.basis_names[a]}:{e}"


def weil_space(A: WeilAlgebra, E: SuperVectorSpace) -> SuperVectorSpace:
    even, odd = [], []
    for a in range(A.dim):
        pa = A.basis_parity(a)
        for e in E.names:
            (odd if (pa + E.parity(e)) % 2 else even).append(weil_coordinate(A, a, e))
    return SuperVectorSpace(tuple(even), tuple(odd))


def weil_box(A: WeilAlgebra, E: SuperVectorSpace, box: Box) -> Box:
    space = weil_space(A, E)
    base = dict(zip(E.even, box.bounds))
    bounds = []
    for n in space.even:
        if A.dim == 1:
            bounds.append(base[n])
        elif n.startswith("1:"):
            bounds.append(base[n[2:]])
        else:
            bounds.append(None)
    return Box(tuple(bounds))


class WeilTensor:
    """Element of A (x) SF(S): basis index of A -> superpolynomial on S.

    (a (x) p)(b (x) q) = (-1)^{|p||b|} ab (x) pq.
    """

    __slots__ = ("A", "space", "parts")

    def __init__(self, A: WeilAlgebra, space: SuperVectorSpace, parts: Mapping[int, SuperPolynomial]):
        self.A, self.space = A, space
        self.parts = {a: p for a, p in parts.items() if p}

    def unit(self):
        return WeilTensor(self.A, self.space, {0: SuperPolynomial.const(self.space, 1)})

    def __add__(self, other):
        out = dict(self.parts)
        for a, p in other.parts.items():
            out[a] = out[a] + p if a in out else p
        return WeilTensor(self.A, self.space, out)

    def __neg__(self):
        return WeilTensor(self.A, self.space, {a: -p for a, p in self.parts.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return WeilTensor(self.A, self.space, {a: p * other for a, p in self.parts.items()})
        out: dict = {}
        for a, p in self.parts.items():
            split = p.homogeneous_parts()
            for b, q in other.parts.items():
                hit = self.A.mul_basis(a, b)
                if not hit:
                    continue
                s, k = hit
                if self.A.basis_parity(b) and 1 in split:
                    pq = split.get(0, SuperPolynomial.zero(self.space)) * q - split[1] * q
                else:
                    pq = p * q
                term = pq * s if s != 1 else pq
                out[k] = out[k] + term if k in out else term
        return WeilTensor(self.A, self.space, out)


def universal_point(A: WeilAlgebra, E: SuperVectorSpace) -> tuple[SuperVectorSpace, dict]:
    space = weil_space(A, E)
    z = {}
    for e in E.names:
        z[e] = WeilTensor(
            A, space, {a: SuperPolynomial.coordinate(space, weil_coordinate(A, a, e)) for a in range(A.dim)}
        )
    return space, z


def _taylor_evaluate(sp: SuperPolynomial, A: WeilAlgebra, space: SuperVectorSpace, z: Mapping[str, WeilTensor], terms: int):
    """sp(z) with the even body expanded to order ``terms`` in the nilpotent directions."""
    E = sp.space
    one = WeilTensor(A, space, {0: SuperPolynomial.const(space, 1)})
    body = [z[e].parts.get(0, SuperPolynomial.zero(space)) for e in E.even]
    nil = [WeilTensor(A, space, {a: p for a, p in z[e].parts.items() if a}) for e in E.even]
    odd_vals = [z[e] for e in E.odd]
    body_one = SuperPolynomial.const(space, 1)

    nil_powers: dict = {}

    def nil_monomial(alpha):
        if alpha not in nil_powers:
            if not any(alpha):
                nil_powers[alpha] = one
            else:
                i = max(k for k, a in enumerate(alpha) if a)
                prev = list(alpha)
                prev[i] -= 1
                nil_powers[alpha] = nil_monomial(tuple(prev)) * nil[i]
        return nil_powers[alpha]

    odd_products: dict = {(): one}

    def odd_product(I):
        if I not in odd_products:
            odd_products[I] = odd_product(I[:-1]) * odd_vals[I[-1]]
        return odd_products[I]

    alphas = [a for a in itertools.product(range(terms + 1), repeat=E.p) if sum(a) <= terms]
    grouped: dict = {}
    for (odd, exp), v in sp.terms.items():
        grouped.setdefault(odd, {})[exp] = v
    total = WeilTensor(A, space, {})
    for odd, coeffs in grouped.items():
        c = Poly(E.p, coeffs)
        even_part = WeilTensor(A, space, {})
        for alpha in alphas:
            d = c.diff_multi(alpha)
            if not d:
                continue
            weight = Fraction(1, math.prod(math.factorial(a) for a in alpha))
            value = d.substitute(body, body_one) * weight
            if not value:
                continue
            nm = nil_monomial(alpha)
            if not nm.parts:
                continue
            even_part = even_part + WeilTensor(A, space, {0: value}) * nm
        total = total + odd_product(odd) * even_part
    return total


def weil_apply(A: WeilAlgebra, f: SpolMorphism, terms: int | None = None) -> SpolMorphism:
    """T^A f.  ``terms`` caps the Taylor order (default: height of A)."""
    terms = A.height if terms is None else terms
    space, z = universal_point(A, f.source)
    target = weil_space(A, f.target)
    pull = {}
    for name, sp in f.pullbacks().items():
        value = _taylor_evaluate(sp, A, space, z, terms)
        for a in range(A.dim):
            pull[weil_coordinate(A, a, name)] = value.parts.get(a, SuperPolynomial.zero(space))
    return SpolMorphism.from_pullbacks(
        space,
        target,
        pull,
        weil_box(A, f.source, f.source_box),
        weil_box(A, f.target, f.target_box),
    )


def natural_transform(phi: WeilMorphism, E: SuperVectorSpace, box: Box | None = None) -> SpolMorphism:
    """T^phi: T^A E -> T^B E, pulling back (b:e) to sum_a phi_ab X_{a:e}."""
    A, B = phi.source, phi.target
    src, tgt = weil_space(A, E), weil_space(B, E)
    pull = {}
    for e in E.names:
        for b in range(B.dim):
            p = SuperPolynomial.zero(src)
            for a in range(A.dim):
                c = phi.matrix[a].get(b)
                if c:
                    p = p + SuperPolynomial.coordinate(src, weil_coordinate(A, a, e)) * c
            pull[weil_coordinate(B, b, e)] = p
    box = box or Box.unbounded(E)
    return SpolMorphism.from_pullbacks(src, tgt, pull, weil_box(A, E, box), weil_box(B, E, box))


def projection_section(A: WeilAlgebra, E: SuperVectorSpace, box: Box | None = None):
    """(pi, zero section) for T^A E."""
    return natural_transform(augmentation(A), E, box), natural_transform(unit_map(A), E, box)


def tensor_identification(A: WeilAlgebra, B: WeilAlgebra, E: SuperVectorSpace) -> dict[str, tuple[str, int]]:
    """Coordinates of T^{A(x)B}E in terms of those of T^A T^B E.

    ``result[c] = (c', sign)`` means coordinate ``c`` equals ``sign * c'``,
    where the basis monomial ab of A (x) B corresponds to a (x) b.
    """
    AB = weil_tensor(A, B)
    inner = weil_space(B, E)
    out = {}
    na = len(A.names)
    for k, exp in enumerate(AB.basis):
        a_exp, b_exp = exp[:na], exp[na:]
        a, b = A.basis.index(a_exp), B.basis.index(b_exp)
        sign = -1 if A.basis_parity(a) * B.basis_parity(b) else 1
        for e in E.names:
            nested = weil_coordinate(A, a, weil_coordinate(B, b, e))
            assert nested in weil_space(A, inner)
            out[weil_coordinate(AB, k, e)] = (nested, sign)
    return out


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorField:
    """Homogeneous vector field sum_e a_e d_e on a superdomain."""

    space: SuperVectorSpace
    coefficients: Mapping[str, SuperPolynomial]
    parity: int = 0

    def __post_init__(self):
        for e, a in self.coefficients.items():
            if e not in self.space or a.space != self.space:
                raise PreconditionError(f"coefficient {e!r} does not live on the field's space")
            if a and a.parities() != {(self.space.parity(e) + self.parity) % 2}:
                raise InvariantError(f"coefficient of d_{e} has the wrong parity")

    def coefficient(self, e: str) -> SuperPolynomial:
        return self.coefficients.get(e) or SuperPolynomial.zero(self.space)

    def __eq__(self, other):
        return (
            isinstance(other, VectorField)
            and self.space == other.space
            and all(self.coefficient(e) == other.coefficient(e) for e in self.space.names)
            and (self.parity == other.parity or self.is_zero())
        )

    def is_zero(self) -> bool:
        return not any(self.coefficients.values())


def vector_field(space: SuperVectorSpace, coefficients: Mapping[str, SuperPolynomial]) -> VectorField:
    """Infer the parity from the coefficients (zero field: even)."""
    parities = set()
    for e, a in coefficients.items():
        for p in a.parities():
            parities.add((p + space.parity(e)) % 2)
    if len(parities) > 1:
        raise InvariantError("inhomogeneous vector field")
    return VectorField(space, dict(coefficients), parities.pop() if parities else 0)


def vector_field_apply(X: VectorField, h: SuperPolynomial) -> SuperPolynomial:
    """X(h) = sum_e a_e d_e h with left odd derivatives."""
    if h.space != X.space:
        raise PreconditionError("vector field and function live on different spaces")
    out = SuperPolynomial.zero(X.space)
    for e in X.space.names:
        a = X.coefficients.get(e)
        if a:
            out = out + a * partial_derivative(e, h)
    return out


def vector_field_as_morphism(X: VectorField, box: Box | None = None) -> SpolMorphism:
    """The section E -> TE of an even field."""
    if X.parity:
        raise PreconditionError("only even fields are sections of TE")
    T = dual_numbers()
    space = X.space
    pull = {}
    for e in space.names:
        pull[weil_coordinate(T, 0, e)] = SuperPolynomial.coordinate(space, e)
        pull[weil_coordinate(T, 1, e)] = X.coefficient(e)
    box = box or Box.unbounded(space)
    return SpolMorphism.from_pullbacks(space, weil_space(T, space), pull, box, weil_box(T, space, box))


def _function_morphism(h: SuperPolynomial, parity: int) -> SpolMorphism:
    tgt = SuperVectorSpace((), ("h",)) if parity else SuperVectorSpace(("h",), ())
    return SpolMorphism.from_pullbacks(h.space, tgt, {"h": h})


def _apply_even_literal(X: VectorField, h: SuperPolynomial) -> SuperPolynomial:
    out = SuperPolynomial.zero(X.space)
    T = dual_numbers()
    section = vector_field_as_morphism(X)
    for parity, part in h.homogeneous_parts().items():
        lifted = weil_apply(T, _function_morphism(part, parity))
        composite = compose(lifted, section)
        out = out + composite.pullbacks()[weil_coordinate(T, 1, "h")]
    return out


def vector_field_apply_literal(X: VectorField, h: SuperPolynomial) -> SuperPolynomial:
    """X(h) as the fibre part of T h o X.

    Odd fields are first multiplied by an auxiliary odd parameter s, which
    makes them even; the result is then recovered as d_s(sX(h)).
    """
    if h.space != X.space:
        raise PreconditionError("vector field and function live on different spaces")
    if not X.parity:
        return _apply_even_literal(X, h)
    space = X.space
    aux = "s"
    while aux in space:
        aux += "'"
    big = SuperVectorSpace(space.even, (aux,) + space.odd)
    s = SuperPolynomial.coordinate(big, aux)
    lift = lambda p: _embed(p, big)
    sX = VectorField(big, {e: s * lift(a) for e, a in X.coefficients.items()}, 0)
    value = _apply_even_literal(sX, lift(h))
    return _restrict(partial_derivative(aux, value), space)


def _embed(p: SuperPolynomial, big: SuperVectorSpace) -> SuperPolynomial:
    shift = big.q - p.space.q
    return SuperPolynomial(big, {(tuple(j + shift for j in odd), exp): v for (odd, exp), v in p.terms.items()})


def _restrict(p: SuperPolynomial, small: SuperVectorSpace) -> SuperPolynomial:
    shift = p.space.q - small.q
    out = {}
    for (odd, exp), v in p.terms.items():
        if any(j < shift for j in odd):
            raise InvariantError("result still depends on the auxiliary parameter")
        out[(tuple(j - shift for j in odd), exp)] = v
    return SuperPolynomial(small, out)


def vector_field_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]_e = X(b_e) - (-1)^{|X||Y|} Y(a_e)."""
    if X.space != Y.space:
        raise PreconditionError("fields on different spaces")
    sign = -1 if X.parity * Y.parity else 1
    coeffs = {}
    for e in X.space.names:
        c = vector_field_apply(X, Y.coefficient(e)) - vector_field_apply(Y, X.coefficient(e)) * sign
        if c:
            coeffs[e] = c
    return VectorField(X.space, coeffs, (X.parity + Y.parity) % 2)


def split_homogeneous(X: Mapping[str, SuperPolynomial], space: SuperVectorSpace) -> dict[int, VectorField]:
    """Split arbitrary coefficient data into even and odd vector fields."""
    parts: dict = {0: {}, 1: {}}
    for e, a in X.items():
        for p, piece in a.homogeneous_parts().items():
            parts[(p + space.parity(e)) % 2][e] = piece
    return {k: VectorField(space, v, k) for k, v in parts.items() if v}
