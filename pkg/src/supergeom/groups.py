"""Supergroup pairs and the Lie supergroups they determine.

A pair (g, G_0) is given by a Lie superalgebra, a polynomial group law on a
global chart of G_0 (unit at 0, coordinates named after the even basis of g)
and the adjoint action Ad_0 as a matrix of polynomials.  The supergroup lives
on the superdomain with even coordinates = even basis of g and odd
coordinates = odd basis of g.

Superfunctions are identified with U(g_0)-linear maps U(g) -> C(G_0) through
v (x) w -> v beta(w): the chart component f(xi_I; g) is the value on
beta(xi_I), and U(g_0) acts by left-invariant differential operators.  The
structure maps are then

    m(xi_I xi'_J; a, b) = id(Ad(b^-1)(beta xi_I) . beta xi_J; ab)
    i(xi_I; a)          = id(Ad(a)(S(beta xi_I)); a^-1)

where evaluating ``id`` on v_K beta(xi_K) keeps v_emptyset applied to the
even coordinate functions and the scalar part of v_{l} for the odd
coordinate l.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import (
    ONE,
    ZERO,
    Poly,
    PreconditionError,
    SuperPolynomial,
    SuperVectorSpace,
    berezin_fiber,
    berezin_top,
    frac,
    partial_derivative,
)
from .lie import (
    LieSuperalgebra,
    UEnvElement,
    antipode,
    check_lie,
    extend_linear_map,
    symmetrize,
    u_mul,
)
from .morphisms import (
    InvariantError,
    SpolMorphism,
    compose,
    fiberwise_degree_check,
    odd_sign,
    power_space,
    product_space,
    rename_source,
)
from .weil import dual_numbers, weil_apply, weil_coordinate


# ---------------------------------------------------------------------------
# polynomial helpers
# ---------------------------------------------------------------------------


def lift_poly(poly: Poly, nvars: int, offset: int) -> Poly:
    """Re-embed a polynomial so its variables start at ``offset`` of ``nvars``."""
    terms = {}
    for exp, c in poly.terms.items():
        e = [0] * nvars
        e[offset : offset + len(exp)] = exp
        terms[tuple(e)] = c
    return Poly(nvars, terms)


def compose_polys(polys: Sequence[Poly], values: Sequence[Poly]) -> list[Poly]:
    if not values:
        return [Poly(0, p.terms) for p in polys]
    one = Poly.const(values[0].nvars, 1)
    return [p.substitute(values, one) for p in polys]


Matrix = dict  # column index -> {row index: coefficient}


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    out: dict = {}
    for j, col in B.items():
        acc: dict = {}
        for k, b in col.items():
            for i, a in A.get(k, {}).items():
                acc[i] = acc[i] + a * b if i in acc else a * b
        acc = {i: c for i, c in acc.items() if c}
        if acc:
            out[j] = acc
    return out


def mat_apply(A: Matrix, v: Mapping[int, object]) -> dict:
    out: dict = {}
    for j, c in v.items():
        for i, a in A.get(j, {}).items():
            out[i] = out[i] + a * c if i in out else a * c
    return {i: c for i, c in out.items() if c}


def mat_identity(n: int) -> Matrix:
    return {j: {j: ONE} for j in range(n)}


def mat_equal(A: Matrix, B: Matrix) -> bool:
    def clean(M):
        return {j: {i: c for i, c in col.items() if c} for j, col in M.items() if any(col.values())}

    return clean(A) == clean(B)


def mat_map(A: Matrix, fn) -> Matrix:
    return {j: {i: fn(c) for i, c in col.items()} for j, col in A.items()}


# ---------------------------------------------------------------------------
# pairs
# ---------------------------------------------------------------------------


class SupergroupPair:
    """(g, G_0): Lie superalgebra, polynomial group law, inverse and Ad_0."""

    def __init__(
        self,
        g: LieSuperalgebra,
        group_law: Mapping[str, Poly],
        inverse_law: Mapping[str, Poly],
        ad: Mapping[str, Mapping[str, Poly]],
        name: str = "",
    ):
        self.g = g
        self.name = name
        self.even = tuple(n for n, p in zip(g.names, g.parities) if not p)
        self.odd = tuple(n for n, p in zip(g.names, g.parities) if p)
        self.p, self.q = len(self.even), len(self.odd)
        self.G0 = SuperVectorSpace(self.even, ())
        self.G = SuperVectorSpace(self.even, self.odd)
        self.G0xG0 = power_space(self.G0, 2)
        self.law = [self._poly(group_law.get(n), 2 * self.p) for n in self.even]
        self.inverse = [self._poly(inverse_law.get(n), self.p) for n in self.even]
        self.ad = {}
        for j, col in ad.items():
            jj = g.index(j)
            entries = {g.index(k): self._poly(c, self.p) for k, c in col.items()}
            entries = {k: c for k, c in entries.items() if c}
            if entries:
                self.ad[jj] = entries

    @staticmethod
    def _poly(value, nvars):
        if value is None:
            return Poly(nvars)
        if isinstance(value, Poly):
            if value.nvars != nvars:
                raise InvariantError("polynomial over the wrong number of variables")
            return value
        return Poly.const(nvars, value)

    # coordinates of G, G0 as Poly variables ------------------------------
    def coordinate_polys(self, nvars: int = None, offset: int = 0) -> list[Poly]:
        nvars = self.p if nvars is None else nvars
        return [Poly.var(nvars, offset + i) for i in range(self.p)]

    def law_at(self, a: Sequence[Poly], b: Sequence[Poly]) -> list[Poly]:
        return compose_polys(self.law, list(a) + list(b))

    def inverse_at(self, a: Sequence[Poly]) -> list[Poly]:
        return compose_polys(self.inverse, a)

    def ad_at(self, point: Sequence[Poly]) -> Matrix:
        """Ad_0 at a (polynomial) point of G_0."""
        if not point:
            return {j: dict(col) for j, col in self.ad.items()}
        one = Poly.const(point[0].nvars, 1)
        return {j: {k: c.substitute(point, one) for k, c in col.items()} for j, col in self.ad.items()}

    def group_law_morphism(self) -> SpolMorphism:
        return SpolMorphism(self.G0xG0, self.G0, {(): dict(zip(self.even, self.law))})

    def inverse_morphism(self) -> SpolMorphism:
        return SpolMorphism(self.G0, self.G0, {(): dict(zip(self.even, self.inverse))})

    def __repr__(self):
        return f"SupergroupPair({self.name or self.g!r})"


def check_pair(pair: SupergroupPair):
    """Exact check of every pair axiom.  Returns ``(ok, failure or None)``."""
    g = pair.g
    ok, why = check_lie(g)
    if not ok:
        return False, ("lie", why)
    p = pair.p
    n = len(g.names)
    x = pair.coordinate_polys(3 * p, 0)
    y = pair.coordinate_polys(3 * p, p)
    z = pair.coordinate_polys(3 * p, 2 * p)
    if pair.law_at(pair.law_at(x, y), z) != pair.law_at(x, pair.law_at(y, z)):
        return False, ("associativity", None)
    a = pair.coordinate_polys()
    zero = [Poly(p)] * p
    if pair.law_at(a, zero) != a or pair.law_at(zero, a) != a:
        return False, ("unit", None)
    if pair.law_at(a, pair.inverse_at(a)) != zero or pair.law_at(pair.inverse_at(a), a) != zero:
        return False, ("inverse", None)
    # Ad_0 is even and linear with Ad_0(0) = id, Ad_0(gh) = Ad_0(g) Ad_0(h)
    for j, col in pair.ad.items():
        for k in col:
            if g.parities[j] != g.parities[k]:
                return False, ("ad-parity", (g.names[j], g.names[k]))
    at_zero = mat_map(pair.ad_at([Poly(0)] * p) if p else pair.ad, lambda c: c.constant_term())
    if not mat_equal(at_zero, mat_identity(n)):
        return False, ("ad-unit", None)
    two = 2 * p
    lhs = pair.ad_at(pair.law_at(pair.coordinate_polys(two, 0), pair.coordinate_polys(two, p)))
    rhs = mat_mul(pair.ad_at(pair.coordinate_polys(two, 0)), pair.ad_at(pair.coordinate_polys(two, p)))
    if not mat_equal(lhs, rhs):
        return False, ("ad-action", None)
    # Ad_0(g) preserves brackets
    M = pair.ad_at(a)
    for i, j in itertools.product(range(n), repeat=2):
        left = mat_apply(M, g.bracket({i: ONE}, {j: ONE}))
        right = g.bracket(M.get(i, {}), M.get(j, {}))
        if {k: c for k, c in left.items() if c} != {k: c for k, c in right.items() if c}:
            return False, ("ad-bracket", (g.names[i], g.names[j]))
    # d Ad_0 at the identity is ad on g_0 x g
    for i, name in enumerate(pair.even):
        e = g.index(name)
        for j in range(n):
            deriv = {k: c.diff(i).constant_term() for k, c in M.get(j, {}).items()}
            deriv = {k: c for k, c in deriv.items() if c}
            if deriv != g.bracket({e: ONE}, {j: ONE}):
                return False, ("ad-derivative", (name, g.names[j]))
    # Ad_0 on g_0 is the derivative of conjugation
    conj = pair.law_at(pair.law_at(pair.coordinate_polys(two, 0), pair.coordinate_polys(two, p)),
                       pair.inverse_at(pair.coordinate_polys(two, 0)))
    back = [Poly.var(p, i) for i in range(p)] + [Poly(p)] * p
    for jj, name in enumerate(pair.even):
        j = g.index(name)
        image = {}
        for kk, kname in enumerate(pair.even):
            d = compose_polys([conj[kk].diff(p + jj)], back)[0]
            if d:
                image[g.index(kname)] = d
        if image != {k: c for k, c in M.get(j, {}).items() if c}:
            return False, ("ad-conjugation", name)
    # the group law reproduces the even structure constants
    for (ii, ni), (jj, nj) in itertools.product(list(enumerate(pair.even)), repeat=2):
        got = {}
        for kk, nk in enumerate(pair.even):
            c = pair.law[kk].diff(ii).diff(p + jj) - pair.law[kk].diff(jj).diff(p + ii)
            c = c.constant_term()
            if c:
                got[g.index(nk)] = c
        if got != g.bracket({g.index(ni): ONE}, {g.index(nj): ONE}):
            return False, ("structure-constants", (ni, nj))
    return True, None


# ---------------------------------------------------------------------------
# the Koszul construction
# ---------------------------------------------------------------------------


class _LeftInvariant:
    """Left-invariant operators of U(g_0) acting on polynomials on G_0."""

    def __init__(self, pair: SupergroupPair):
        self.pair = pair
        p = pair.p
        a = pair.coordinate_polys(p, 0)
        zeros = [Poly(p)] * p
        # L[k][j] = d m_k / d b_j at (g, 0)
        self.L = [[compose_polys([pair.law[k].diff(p + j)], a + zeros)[0] for j in range(p)] for k in range(p)]
        self._even_pos = {pair.g.index(n): i for i, n in enumerate(pair.even)}
        self._cache: dict = {}

    def field(self, j: int, phi: Poly, nvars: int, offset: int) -> Poly:
        p = self.pair.p
        out = Poly(nvars)
        for k in range(p):
            d = phi.diff(offset + k)
            if d:
                out = out + lift_poly(self.L[k][j], nvars, offset) * d
        return out

    def apply(self, word: Sequence[int], phi: Poly, nvars: int = None, offset: int = 0) -> Poly:
        """(e_w1 ~ o ... o e_wn ~)(phi); ``word`` lists basis indices of g."""
        nvars = phi.nvars if nvars is None else nvars
        key = (tuple(word), phi, nvars, offset)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        result = phi
        for letter in reversed(word):
            result = self.field(self._even_pos[letter], result, nvars, offset)
        self._cache[key] = result
        return result


class KoszulGroup:
    """Structure morphisms of the Lie supergroup attached to a pair."""

    def __init__(self, pair: SupergroupPair):
        self.pair = pair
        self.g = pair.g
        self.G = pair.G
        self.GxG = power_space(pair.G, 2)
        self.point = SuperVectorSpace((), ())
        self.left = _LeftInvariant(pair)
        self._beta: dict = {}
        self._odd_pos = {self.g.index(n): i for i, n in enumerate(pair.odd)}
        self.mult = self._build_mult()
        self.inv = self._build_inv()
        self.unit = SpolMorphism(self.point, self.G, {(): {n: Poly(0) for n in pair.even}})

    # ------------------------------------------------------------------
    def beta(self, K: tuple[int, ...]) -> UEnvElement:
        """beta(xi_K) for a sorted tuple of odd positions."""
        if K not in self._beta:
            self._beta[K] = symmetrize(self.g, [self.pair.odd[k] for k in K])
        return self._beta[K]

    def decompose(self, u: UEnvElement) -> dict[tuple[int, ...], dict[tuple[int, ...], object]]:
        """u = sum_K v_K beta(xi_K) with v_K in U(g_0), as {K: {even word: coeff}}."""
        par = self.g.parities
        residual = u
        out: dict = {}
        while residual.terms:
            top = max(sum(par[i] for i in w) for w in residual.terms)
            layer: dict = {}
            for w, c in residual.terms.items():
                if sum(par[i] for i in w) != top:
                    continue
                ev = tuple(i for i in w if not par[i])
                K = tuple(self._odd_pos[i] for i in w if par[i])
                layer.setdefault(K, {})[ev] = c
            for K, coeffs in layer.items():
                bucket = out.setdefault(K, {})
                for ev, c in coeffs.items():
                    bucket[ev] = bucket[ev] + c if ev in bucket else c
                residual = residual - u_mul(UEnvElement(self.g, coeffs), self.beta(K))
        return {K: {w: c for w, c in v.items() if c} for K, v in out.items()}

    def _identity_values(self, u: UEnvElement, base: Sequence[Poly], nvars: int) -> dict[str, Poly]:
        """Values of the identity morphism on u at the point ``base``."""
        pair = self.pair
        out: dict = {}
        one = Poly.const(nvars, 1)
        for K, coeffs in self.decompose(u).items():
            if not K:
                for kk, name in enumerate(pair.even):
                    total = Poly(nvars)
                    phi = Poly.var(pair.p, kk)
                    for w, c in coeffs.items():
                        d = self.left.apply(w, phi)
                        if d:
                            total = total + c * d.substitute(base, one)
                    if total:
                        out[name] = total
            elif len(K) == 1:
                c = coeffs.get(())
                if c:
                    out[pair.odd[K[0]]] = c if isinstance(c, Poly) else Poly.const(nvars, c)
        return out

    def _build_mult(self) -> SpolMorphism:
        pair, g = self.pair, self.g
        p, q = pair.p, pair.q
        n = 2 * p
        a = pair.coordinate_polys(n, 0)
        b = pair.coordinate_polys(n, p)
        ad_binv = pair.ad_at(pair.inverse_at(b))
        base = pair.law_at(a, b) if p else []
        comps = {}
        for r1 in range(q + 1):
            for I in itertools.combinations(range(q), r1):
                moved = extend_linear_map(g, ad_binv, self.beta(I))
                for r2 in range(q + 1):
                    for J in itertools.combinations(range(q), r2):
                        w = u_mul(moved, self.beta(J))
                        vals = self._identity_values(w, base, n)
                        if vals:
                            comps[I + tuple(q + j for j in J)] = vals
        return SpolMorphism(self.GxG, self.G, comps)

    def _build_inv(self) -> SpolMorphism:
        pair, g = self.pair, self.g
        p, q = pair.p, pair.q
        a = pair.coordinate_polys(p, 0)
        ad_a = pair.ad_at(a)
        base = pair.inverse_at(a) if p else []
        comps = {}
        for r in range(q + 1):
            for I in itertools.combinations(range(q), r):
                w = extend_linear_map(g, ad_a, antipode(self.beta(I)))
                vals = self._identity_values(w, base, p)
                if vals:
                    comps[I] = vals
        return SpolMorphism(self.G, self.G, comps)

    def __repr__(self):
        return f"KoszulGroup({self.pair!r})"


def koszul_build(pair: SupergroupPair, check: bool = True) -> KoszulGroup:
    if check:
        ok, why = check_pair(pair)
        if not ok:
            raise PreconditionError(f"pair check failed: {why}")
    return KoszulGroup(pair)


# ---------------------------------------------------------------------------
# group axioms
# ---------------------------------------------------------------------------


def _renamed_pullbacks(f: SpolMorphism, space: SuperVectorSpace, mapping: Mapping[str, str]) -> dict:
    return {n: rename_source(sp, space, mapping) for n, sp in f.pullbacks().items()}


def _coords(space: SuperVectorSpace, prefix: str, names: Sequence[str]) -> dict:
    return {n: SuperPolynomial.coordinate(space, prefix + n) for n in names}


def _copy_map(names: Sequence[str], src_prefix: str, dst_prefix: str) -> dict:
    return {src_prefix + n: dst_prefix + n for n in names}


def verify_group(kg: KoszulGroup, mult: SpolMorphism | None = None, inv: SpolMorphism | None = None):
    """Group-object axioms by exact composition.  Returns ``(ok, failure)``."""
    m = mult or kg.mult
    i = inv or kg.inv
    G, GxG = kg.G, kg.GxG
    names = G.names
    G3 = power_space(G, 3)
    left = {}
    for n, sp in _renamed_pullbacks(m, G3, {**_copy_map(names, "1.", "1."), **_copy_map(names, "2.", "2.")}).items():
        left["1." + n] = sp
    for n, sp in _coords(G3, "3.", names).items():
        left["2." + n] = sp
    right = {}
    for n, sp in _coords(G3, "1.", names).items():
        right["1." + n] = sp
    for n, sp in _renamed_pullbacks(m, G3, {**_copy_map(names, "1.", "2."), **_copy_map(names, "2.", "3.")}).items():
        right["2." + n] = sp
    lhs = compose(m, SpolMorphism.from_pullbacks(G3, GxG, left))
    rhs = compose(m, SpolMorphism.from_pullbacks(G3, GxG, right))
    diff = lhs.difference(rhs)
    if diff is not None:
        return False, ("associativity", diff)
    ident = {n: SuperPolynomial.coordinate(G, n) for n in names}
    zero = {n: SuperPolynomial.zero(G) for n in names}
    idm = SpolMorphism.from_pullbacks(G, G, ident)
    for label, first, second in (("left unit", zero, ident), ("right unit", ident, zero)):
        pull = {"1." + n: first[n] for n in names} | {"2." + n: second[n] for n in names}
        got = compose(m, SpolMorphism.from_pullbacks(G, GxG, pull))
        d = got.difference(idm)
        if d is not None:
            return False, (label, d)
    ipull = i.pullbacks()
    const = SpolMorphism.from_pullbacks(G, G, zero)
    for label, first, second in (("right inverse", ident, ipull), ("left inverse", ipull, ident)):
        pull = {"1." + n: first[n] for n in names} | {"2." + n: second[n] for n in names}
        got = compose(m, SpolMorphism.from_pullbacks(G, GxG, pull))
        d = got.difference(const)
        if d is not None:
            return False, (label, d)
    return True, None


def underlying_law_matches(kg: KoszulGroup) -> bool:
    """The body of the Koszul multiplication is the pair's group law."""
    return [kg.mult.component((), n) for n in kg.pair.even] == kg.pair.law


# ---------------------------------------------------------------------------
# the tangent group
# ---------------------------------------------------------------------------


@dataclass
class TangentGroupReport:
    law_matches: bool
    ad_restricts: bool
    bracket_matches: bool
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.law_matches and self.ad_restricts and self.bracket_matches


def _through(h: SpolMorphism, source: SuperVectorSpace, values: Mapping[str, SuperPolynomial]) -> dict:
    """Pullbacks of h o (morphism into h.source given by ``values``)."""
    full = {n: values.get(n) or SuperPolynomial.zero(source) for n in h.source.names}
    return compose(h, SpolMorphism.from_pullbacks(source, h.source, full), check_domains=False).pullbacks()


def group_on_TG(kg: KoszulGroup) -> TangentGroupReport:
    """Compare the tangent group law in the left trivialization TG = G x g.

    Expected: (g, x)(h, y) = (gh, Ad(h^-1) x + y) with Ad the derivative of
    conjugation; Ad restricted to G_0 must be the pair's Ad_0 and its
    derivative at the identity must reproduce the bracket of g.
    """
    pair, g = kg.pair, kg.g
    D = dual_numbers()
    G = kg.G
    names = G.names
    Tm = weil_apply(D, kg.mult)
    one = lambda n: weil_coordinate(D, 0, n)
    eps = lambda n: weil_coordinate(D, 1, n)
    Gg = product_space([G, G], ["", "d."])

    # psi: G x g -> TG, (g, x) -> g . x
    psi = _through(Tm, Gg, {one("1." + n): SuperPolynomial.coordinate(Gg, n) for n in names}
                   | {eps("2." + n): SuperPolynomial.coordinate(Gg, "d." + n) for n in names})
    # Ad: G x g -> g by differentiating conjugation
    ivals = _renamed_pullbacks(kg.inv, Gg, {n: n for n in names})
    conj = _through(Tm, Gg, {one("1." + n): psi[one(n)] for n in names}
                    | {eps("1." + n): psi[eps(n)] for n in names}
                    | {one("2." + n): ivals[n] for n in names})
    ad = {"d." + n: conj[eps(n)] for n in names}
    for n in names:
        if conj[one(n)]:
            raise InvariantError("conjugation does not fix the identity")

    # mu = psi^-1 o Tm o (psi x psi) on (G x g)^2
    GG2 = power_space(Gg, 2)
    vals = {}
    for c in ("1.", "2."):
        mapping = {n: c + n for n in Gg.names}
        for n in names:
            vals[one(c + n)] = rename_source(psi[one(n)], GG2, mapping)
            vals[eps(c + n)] = rename_source(psi[eps(n)], GG2, mapping)
    prod = _through(Tm, GG2, vals)
    base = {n: prod[one(n)] for n in names}
    inv_base = _through(kg.inv, GG2, base)
    back = _through(Tm, GG2, {one("1." + n): inv_base[n] for n in names}
                    | {one("2." + n): prod[one(n)] for n in names}
                    | {eps("2." + n): prod[eps(n)] for n in names})
    mu = {n: base[n] for n in names} | {"d." + n: back[eps(n)] for n in names}

    # expected law
    gh = _renamed_pullbacks(kg.mult, GG2, {**_copy_map(names, "1.", "1."), **_copy_map(names, "2.", "2.")})
    hinv = _through(kg.inv, GG2, {n: SuperPolynomial.coordinate(GG2, "2." + n) for n in names})
    ad_vals = {n: hinv[n] for n in names} | {"d." + n: SuperPolynomial.coordinate(GG2, "1.d." + n) for n in names}
    ad_m = SpolMorphism.from_pullbacks(Gg, G, {n[2:]: sp for n, sp in ad.items()})
    moved = _through(ad_m, GG2, ad_vals)
    expected = {n: gh[n] for n in names} | {
        "d." + n: moved[n] + SuperPolynomial.coordinate(GG2, "2.d." + n) for n in names
    }
    law_ok = all(mu[k] == expected[k] for k in expected)

    # Ad restricted to the body and to g_0 directions of G
    ad_ok = True
    M = pair.ad_at(pair.coordinate_polys())
    for j, nj in enumerate(g.names):
        for k, nk in enumerate(g.names):
            sp = partial_derivative("d." + nj, ad["d." + nk])
            body = Poly(pair.p, {exp: c for (odd, exp), c in sp.terms.items() if not odd and not any(exp[pair.p:])})
            body = Poly(pair.p, {exp[: pair.p]: c for exp, c in body.terms.items()})
            want = M.get(j, {}).get(k) or Poly(pair.p)
            if body != want:
                ad_ok = False

    # bracket from the bilinear part of Ad at the identity
    bracket_ok = True
    bad = []
    for c, nc in enumerate(g.names):
        for d, nd in enumerate(g.names):
            want = g.bracket_basis(c, d)
            sign = -1 if g.parities[c] * g.parities[d] else 1
            for k, nk in enumerate(g.names):
                coeff = partial_derivative("d." + nd, partial_derivative(nc, ad["d." + nk]))
                coeff = coeff.terms.get(((), (0,) * Gg.p), ZERO)
                if coeff != sign * want.get(k, ZERO):
                    bracket_ok = False
                    bad.append((nc, nd, nk))
    return TangentGroupReport(law_ok, ad_ok, bracket_ok, {"bracket_mismatch": bad})


# ---------------------------------------------------------------------------
# evaluation of superfunctions on U(g)
# ---------------------------------------------------------------------------


def function_components(f: SuperPolynomial) -> dict[tuple[int, ...], Poly]:
    """Chart components f(xi_K; x) of a scalar superfunction."""
    out: dict = {}
    for (odd, exp), c in f.terms.items():
        out.setdefault(odd, {})[exp] = odd_sign(len(odd)) * c
    return {K: Poly(f.space.p, t) for K, t in out.items()}


def evaluate_on(kg: KoszulGroup, f: SuperPolynomial, u: UEnvElement, point: Sequence) -> Fraction:
    """f(u; point) for a superfunction f on G and u in U(g)."""
    if f.space != kg.G:
        raise PreconditionError("function does not live on the group")
    comps = function_components(f)
    total = ZERO
    for K, coeffs in kg.decompose(u).items():
        c = comps.get(K)
        if c is None:
            continue
        for w, coef in coeffs.items():
            total += frac(coef) * kg.left.apply(w, c).evaluate(point)
    return total


def evaluate_on_pair(kg: KoszulGroup, F: SuperPolynomial, u: UEnvElement, v: UEnvElement, g, h) -> Fraction:
    """F(u (x) v; g, h) for a superfunction F on G x G."""
    p, q = kg.pair.p, kg.pair.q
    comps = function_components(F)
    du, dv = kg.decompose(u), kg.decompose(v)
    total = ZERO
    point = list(g) + list(h)
    for K, cu in du.items():
        for L, cv in dv.items():
            c = comps.get(K + tuple(q + l for l in L))
            if c is None:
                continue
            for w1, a in cu.items():
                for w2, b in cv.items():
                    d = kg.left.apply(w2, c, 2 * p, p)
                    d = kg.left.apply(w1, d, 2 * p, 0)
                    total += frac(a) * frac(b) * d.evaluate(point)
    return total


# ---------------------------------------------------------------------------
# distributions and convolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """The functional f -> f(u; base) on superfunctions of G."""

    base: tuple
    u: UEnvElement

    def pair_with(self, kg: KoszulGroup, f: SuperPolynomial) -> Fraction:
        return evaluate_on(kg, f, self.u, self.base)


def identity_distribution(kg: KoszulGroup, u: UEnvElement) -> Distribution:
    return Distribution((ZERO,) * kg.pair.p, u)


def convolve(d1: Distribution, d2: Distribution, kg: KoszulGroup) -> Distribution:
    """(u@g) * (v@h) = (Ad(h^-1)(u) v) @ gh, with rational base points."""
    pair = kg.pair
    hinv = [c.evaluate(d2.base) for c in pair.inverse]
    M = {j: {k: c.evaluate(hinv) for k, c in col.items()} for j, col in pair.ad.items()}
    gh = [c.evaluate(tuple(d1.base) + tuple(d2.base)) for c in pair.law]
    moved = extend_linear_map(kg.g, M, d1.u)
    return Distribution(tuple(gh), u_mul(moved, d2.u))


def pullback_function(kg: KoszulGroup, f: SuperPolynomial) -> SuperPolynomial:
    """m^* f as a superfunction on G x G."""
    out = SuperPolynomial.zero(kg.GxG)
    for parity, part in f.homogeneous_parts().items():
        tgt = SuperVectorSpace((), ("f",)) if parity else SuperVectorSpace(("f",), ())
        fm = SpolMorphism.from_pullbacks(kg.G, tgt, {"f": part})
        out = out + compose(fm, kg.mult).pullbacks()["f"]
    return out


def convolution_pairing(kg: KoszulGroup, f: SuperPolynomial, d1: Distribution, d2: Distribution) -> Fraction:
    """<m^* f, d1 (x) d2>: the defining pairing of the convolution."""
    return evaluate_on_pair(kg, pullback_function(kg, f), d1.u, d2.u, d1.base, d2.base)


def test_functions(G: SuperVectorSpace, degree: int = 2) -> list[SuperPolynomial]:
    """Monomials x^a xi_K with |a| <= degree: enough to separate U(g) up to that order."""
    out = []
    for K in itertools.chain.from_iterable(itertools.combinations(range(G.q), r) for r in range(G.q + 1)):
        for exp in itertools.product(range(degree + 1), repeat=G.p):
            if sum(exp) <= degree:
                out.append(SuperPolynomial(G, {(K, exp): ONE}))
    return out


def berezin_pair(f: SuperPolynomial, omega: SuperPolynomial) -> Fraction:
    """<f, omega D(xi)> = top coefficient of f * omega."""
    if f.space != omega.space:
        raise PreconditionError("function and density on different spaces")
    return berezin_top(f * omega)


def density_convolution_pairing(f: SuperPolynomial, w1: SuperPolynomial, w2: SuperPolynomial) -> Fraction:
    """<f, w1 * w2> on the additive group R^{0|q}.

    Computed as int_2 (int_1 f(t1 + t2) w1(t1) Dt1) w2(t2) Dt2.
    """
    R = f.space
    if R.p:
        raise PreconditionError("density convolution needs a purely odd group")
    R2 = power_space(R, 2)
    shift = lambda p, c: rename_source(p, R2, {n: f"{c}.{n}" for n in R.names})
    sums = {n: SuperPolynomial.coordinate(R2, "1." + n) + SuperPolynomial.coordinate(R2, "2." + n) for n in R.names}
    from .morphisms import substitute_superpoly

    F = substitute_superpoly(f, sums, SuperPolynomial.const(R2, 1)) * shift(w1, "1")
    inner = berezin_fiber(F, ["1." + n for n in R.names])
    outer = inner * shift(w2, "2")
    outer = berezin_fiber(outer, ["2." + n for n in R.names])
    return outer.terms.get(((), ()), ZERO)


# ---------------------------------------------------------------------------
# representations
# ---------------------------------------------------------------------------


class PairRepresentation:
    """Representation of a pair on V: alpha_0(g) as a polynomial matrix, d alpha on g."""

    def __init__(self, pair: SupergroupPair, V: SuperVectorSpace, alpha0: Mapping[str, Mapping[str, Poly]],
                 dalpha: Mapping[str, Mapping[str, Mapping[str, object]]]):
        self.pair, self.V = pair, V
        idx = {n: i for i, n in enumerate(V.names)}
        self._idx = idx
        self.alpha0 = {}
        for j, col in alpha0.items():
            entries = {idx[k]: SupergroupPair._poly(c, pair.p) for k, c in col.items()}
            entries = {k: c for k, c in entries.items() if c}
            if entries:
                self.alpha0[idx[j]] = entries
        self.dalpha = {}
        for x, M in dalpha.items():
            mat = {}
            for j, col in M.items():
                entries = {idx[k]: frac(c) for k, c in col.items() if frac(c)}
                if entries:
                    mat[idx[j]] = entries
            if mat:
                self.dalpha[pair.g.index(x)] = mat

    def vparity(self, i: int) -> int:
        return self.V.parity(self.V.names[i])

    def dalpha_of(self, u: UEnvElement) -> Matrix:
        """d alpha extended to U(g) (coefficients may be rational or polynomial)."""
        n = len(self.V.names)
        out: dict = {}
        for w, c in u.terms.items():
            M = mat_identity(n)
            for letter in w:
                M = mat_mul(M, self.dalpha.get(letter, {}))
            for j, col in M.items():
                for i, v in col.items():
                    cur = out.setdefault(j, {})
                    cur[i] = cur[i] + c * v if i in cur else c * v
        return {j: {i: v for i, v in col.items() if v} for j, col in out.items()}

    def __eq__(self, other):
        return (
            isinstance(other, PairRepresentation)
            and self.V == other.V
            and mat_equal(self.alpha0, other.alpha0)
            and {k: v for k, v in self.dalpha.items() if v} == {k: v for k, v in other.dalpha.items() if v}
        )

    def __repr__(self):
        return f"PairRepresentation(V={self.V})"


def check_representation(rep: PairRepresentation):
    """Exact axiom check.  Returns ``(ok, failure)``."""
    pair, g = rep.pair, rep.pair.g
    n = len(rep.V.names)
    p = pair.p
    for j, col in rep.alpha0.items():
        for i in col:
            if rep.vparity(i) != rep.vparity(j):
                return False, ("alpha0-parity", None)
    for x, M in rep.dalpha.items():
        for j, col in M.items():
            for i in col:
                if rep.vparity(i) != (rep.vparity(j) + g.parities[x]) % 2:
                    return False, ("dalpha-parity", g.names[x])
    at0 = mat_map(_poly_matrix_at(rep.alpha0, [Poly(0)] * p), lambda c: c.constant_term())
    if not mat_equal(at0, mat_identity(n)):
        return False, ("alpha0-unit", None)
    two = 2 * p
    a, b = pair.coordinate_polys(two, 0), pair.coordinate_polys(two, p)
    if not mat_equal(_poly_matrix_at(rep.alpha0, pair.law_at(a, b)),
                     mat_mul(_poly_matrix_at(rep.alpha0, a), _poly_matrix_at(rep.alpha0, b))):
        return False, ("alpha0-action", None)
    for x, y in itertools.product(range(len(g.names)), repeat=2):
        s = -1 if g.parities[x] * g.parities[y] else 1
        lhs = rep.dalpha_of(UEnvElement(g, {(k,): c for k, c in g.bracket_basis(x, y).items()}))
        A, B = rep.dalpha.get(x, {}), rep.dalpha.get(y, {})
        rhs = mat_mul(A, B)
        for j, col in mat_mul(B, A).items():
            for i, v in col.items():
                cur = rhs.setdefault(j, {})
                cur[i] = cur.get(i, ZERO) - s * v
        if not mat_equal(lhs, rhs):
            return False, ("dalpha-bracket", (g.names[x], g.names[y]))
    gpt = pair.coordinate_polys()
    A0 = _poly_matrix_at(rep.alpha0, gpt)
    M = pair.ad_at(gpt)
    for x in range(len(g.names)):
        lhs = mat_mul(A0, _lift_matrix(rep.dalpha.get(x, {}), p))
        image = UEnvElement(g, {(k,): c for k, c in M.get(x, {}).items()})
        rhs = mat_mul(rep.dalpha_of(image), A0)
        if not mat_equal(lhs, rhs):
            return False, ("equivariance", g.names[x])
    for i, name in enumerate(pair.even):
        x = g.index(name)
        deriv = mat_map(A0, lambda c: c.diff(i).constant_term())
        if not mat_equal(deriv, rep.dalpha.get(x, {})):
            return False, ("derivative", name)
    return True, None


def _poly_matrix_at(M: Matrix, point: Sequence[Poly]) -> Matrix:
    if not point:
        return M
    one = Poly.const(point[0].nvars, 1)
    return {j: {i: c.substitute(point, one) for i, c in col.items()} for j, col in M.items()}


def _lift_matrix(M: Matrix, nvars: int) -> Matrix:
    return {j: {i: Poly.const(nvars, c) for i, c in col.items()} for j, col in M.items()}


def action_space(pair: SupergroupPair, V: SuperVectorSpace) -> SuperVectorSpace:
    return product_space([pair.G, V])


def rep_to_morphism(rep: PairRepresentation, kg: KoszulGroup | None = None) -> SpolMorphism:
    """alpha(xi_I; g, v) = alpha_0(g) d alpha(beta xi_I) v, linear in v."""
    pair, V = rep.pair, rep.V
    kg = kg or KoszulGroup(pair)
    src = action_space(pair, V)
    p, q = pair.p, pair.q
    nv = src.p
    gpt = pair.coordinate_polys(nv, 0)
    A0 = _poly_matrix_at(rep.alpha0, gpt) if p else _lift_matrix(mat_map(rep.alpha0, lambda c: c.constant_term()), nv)
    veven = [i for i, n in enumerate(V.names) if not V.parity(n)]
    vodd = [i for i, n in enumerate(V.names) if V.parity(n)]
    # positions of V's even coordinates among the product's even variables
    vvar = {i: src.index(_prefixed(src, V, V.names[i])) for i in veven}
    voddpos = {i: src.index(_prefixed(src, V, V.names[i])) for i in vodd}
    comps: dict = {}
    for r in range(q + 1):
        for I in itertools.combinations(range(q), r):
            M = mat_mul(A0, _lift_matrix(rep.dalpha_of(kg.beta(I)), nv))
            vals: dict = {}
            for i_out, name in enumerate(V.names):
                total = Poly(nv)
                for j in veven:
                    c = M.get(j, {}).get(i_out)
                    if c:
                        total = total + c * Poly.var(nv, vvar[j])
                if total:
                    vals[name] = total
            if vals:
                comps[I] = vals
            for j in vodd:
                vals = {}
                for i_out, name in enumerate(V.names):
                    c = M.get(j, {}).get(i_out)
                    if c:
                        vals[name] = c
                if vals:
                    comps[I + (voddpos[j],)] = vals
    return SpolMorphism(src, V, comps)


def _prefixed(src: SuperVectorSpace, V: SuperVectorSpace, name: str) -> str:
    """Name of a V coordinate inside G x V (prefixed only on collisions)."""
    return name if name in src else "2." + name


def _gname(src: SuperVectorSpace, name: str) -> str:
    return name if name in src else "1." + name


def extract_dalpha(alpha: SpolMorphism, pair: SupergroupPair, V: SuperVectorSpace) -> dict:
    """d alpha read off the tangent lift of alpha at the identity.

    The coefficient of (eps:g_c)(1:v_j) in the pullback of eps:v_k equals
    (-1)^{|c||j|} d alpha(b_c)_{kj}.
    """
    D = dual_numbers()
    T = weil_apply(D, alpha)
    src = T.source
    g = pair.g
    out: dict = {}
    zero_point = ((), (0,) * src.p)
    for c, nc in enumerate(g.names):
        gname = weil_coordinate(D, 1, _gname(alpha.source, nc))
        col_out: dict = {}
        for j, nj in enumerate(V.names):
            vname = weil_coordinate(D, 0, _prefixed(alpha.source, V, nj))
            sign = -1 if g.parities[c] * V.parity(nj) else 1
            for k, nk in enumerate(V.names):
                sp = T.pullbacks()[weil_coordinate(D, 1, nk)]
                coeff = partial_derivative(vname, partial_derivative(gname, sp)).terms.get(zero_point, ZERO)
                if coeff:
                    col_out.setdefault(nj, {})[nk] = sign * coeff
        if col_out:
            out[nc] = col_out
    return out


def morphism_to_rep(alpha: SpolMorphism, pair: SupergroupPair, V: SuperVectorSpace, kg: KoszulGroup | None = None) -> PairRepresentation:
    """Inverse of :func:`rep_to_morphism`; raises if alpha is not of that form."""
    kg = kg or KoszulGroup(pair)
    src = action_space(pair, V)
    if alpha.source != src or alpha.target != V:
        raise PreconditionError("morphism is not of the form G x V -> V")
    fiber = [_prefixed(src, V, n) for n in V.names]
    ok, why = fiberwise_degree_check(alpha, fiber, 1)
    if not ok:
        raise InvariantError(f"not linear over G: {why}")
    # alpha_0 from the I = emptyset data
    p = pair.p
    alpha0: dict = {}
    for j, nj in enumerate(V.names):
        vn = _prefixed(src, V, nj)
        for k, nk in enumerate(V.names):
            if V.parity(nj):
                poly = alpha.component((src.index(vn),), nk)
            else:
                poly = alpha.component((), nk).diff(src.index(vn))
            body = Poly(p, {exp[:p]: c for exp, c in poly.terms.items()})
            if body:
                alpha0.setdefault(nj, {})[nk] = body
    rep = PairRepresentation(pair, V, alpha0, extract_dalpha(alpha, pair, V))
    ok, why = check_representation(rep)
    if not ok:
        raise InvariantError(f"extracted data is not a representation: {why}")
    if rep_to_morphism(rep, kg) != alpha:
        raise InvariantError("morphism is not determined by its representation data")
    return rep


def check_action(kg: KoszulGroup, alpha: SpolMorphism, V: SuperVectorSpace):
    """alpha o (m x id) = alpha o (id x alpha) and alpha o (1 x id) = pr_V."""
    G = kg.G
    names = G.names
    src = alpha.source
    vnames = [_prefixed(src, V, n) for n in V.names]
    big = product_space([G, G, V], ["1.", "2.", "3."])
    mv = {n: sp for n, sp in _renamed_pullbacks(kg.mult, big, {**_copy_map(names, "1.", "1."), **_copy_map(names, "2.", "2.")}).items()}
    left_vals = {}
    for n in names:
        left_vals[_gname(src, n)] = mv[n]
    for vn, n in zip(vnames, V.names):
        left_vals[vn] = SuperPolynomial.coordinate(big, "3." + n)
    lhs = compose(alpha, SpolMorphism.from_pullbacks(big, src, left_vals))
    inner_map = {}
    for n in names:
        inner_map[_gname(src, n)] = "2." + n
    for vn, n in zip(vnames, V.names):
        inner_map[vn] = "3." + n
    inner = {n: rename_source(sp, big, inner_map) for n, sp in alpha.pullbacks().items()}
    right_vals = {}
    for n in names:
        right_vals[_gname(src, n)] = SuperPolynomial.coordinate(big, "1." + n)
    for vn, n in zip(vnames, V.names):
        right_vals[vn] = inner[n]
    rhs = compose(alpha, SpolMorphism.from_pullbacks(big, src, right_vals))
    d = lhs.difference(rhs)
    if d is not None:
        return False, ("action", d)
    unit_vals = {vn: SuperPolynomial.coordinate(V, n) for vn, n in zip(vnames, V.names)}
    got = compose(alpha, SpolMorphism.from_pullbacks(V, src, unit_vals))
    if got != SpolMorphism.from_pullbacks(V, V, {n: SuperPolynomial.coordinate(V, n) for n in V.names}):
        return False, ("unit", None)
    return True, None


# ---------------------------------------------------------------------------
# the corpus
# ---------------------------------------------------------------------------


def _parse_poly(text, nvars, names):
    from .algebra import parse_superpoly

    space = SuperVectorSpace(tuple(names), ())
    sp = parse_superpoly(space, text)
    return sp.odd_coefficient(())


def make_pair(g: LieSuperalgebra, law: Mapping[str, str], inverse: Mapping[str, str],
              ad: Mapping[str, Mapping[str, str]], name: str = "") -> SupergroupPair:
    """Build a pair from polynomial strings.

    ``law`` uses variables ``1.e``/``2.e``; ``inverse`` and ``ad`` use the even
    basis names.  ``ad[j][k]`` is the coefficient of b_k in Ad_0(g) b_j.
    """
    evens = [n for n, p in zip(g.names, g.parities) if not p]
    p = len(evens)
    law_names = [f"1.{n}" for n in evens] + [f"2.{n}" for n in evens]
    return SupergroupPair(
        g,
        {n: _parse_poly(law[n], 2 * p, law_names) for n in evens},
        {n: _parse_poly(inverse[n], p, evens) for n in evens},
        {j: {k: _parse_poly(c, p, evens) for k, c in col.items()} for j, col in ad.items()},
        name,
    )


def abelian_pair(p: int, q: int) -> SupergroupPair:
    basis = [(f"x{i + 1}", 0) for i in range(p)] + [(f"y{i + 1}", 1) for i in range(q)]
    g = LieSuperalgebra(basis, {})
    evens = [b[0] for b in basis[:p]]
    return make_pair(
        g,
        {n: f"1.{n} + 2.{n}" for n in evens},
        {n: f"-{n}" for n in evens},
        {b[0]: {b[0]: "1"} for b in basis},
        f"abelian {p}|{q}",
    )


def odd_square_pair() -> SupergroupPair:
    """g = <x | y> with [y, y] = x, G_0 = (R, +), trivial Ad_0."""
    g = LieSuperalgebra([("x", 0), ("y", 1)], {("y", "y"): {"x": 1}})
    return make_pair(g, {"x": "1.x + 2.x"}, {"x": "-x"}, {"x": {"x": "1"}, "y": {"y": "1"}}, "x=[y,y]")


def heisenberg_pair() -> SupergroupPair:
    """Heisenberg g_0 = <e1, e2, e3> with an odd module <y1, y2>.

    [e1, e2] = e3, [e1, y1] = y2, [y1, y1] = e3; law a + b + 1/2 [a, b];
    Ad_0(g) = 1 + ad(g).
    """
    g = LieSuperalgebra(
        [("e1", 0), ("e2", 0), ("e3", 0), ("y1", 1), ("y2", 1)],
        {("e1", "e2"): {"e3": 1}, ("e1", "y1"): {"y2": 1}, ("y1", "y1"): {"e3": 1}},
    )
    law = {
        "e1": "1.e1 + 2.e1",
        "e2": "1.e2 + 2.e2",
        "e3": "1.e3 + 2.e3 + 1/2*1.e1*2.e2 - 1/2*1.e2*2.e1",
    }
    inverse = {n: f"-{n}" for n in ("e1", "e2", "e3")}
    ad = {
        "e1": {"e1": "1", "e3": "-e2"},
        "e2": {"e2": "1", "e3": "e1"},
        "e3": {"e3": "1"},
        "y1": {"y1": "1", "y2": "e1"},
        "y2": {"y2": "1"},
    }
    return make_pair(g, law, inverse, ad, "heisenberg + odd module")


def pair_corpus() -> list[SupergroupPair]:
    out = [abelian_pair(p, q) for p in range(3) for q in range(3)]
    out.append(odd_square_pair())
    out.append(heisenberg_pair())
    return out
