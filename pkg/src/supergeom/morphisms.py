"""Morphisms of superdomains with polynomial data.

A morphism ``f: E_U -> F_V`` is stored by its values on the odd words of
S(E): for each sorted odd subset ``I`` of the source, ``components[I]`` maps a
target coordinate name to the polynomial ``f(xi_I; x)`` in the even source
variables.  Words with even letters are obtained by differentiation
(``f(eP; x) = d_e f(P)(x)``), see :func:`apply_to_word`.

The dictionary with the classical "pullback of target coordinates"
description is

    pullback(y_k) = sum_I s(|I|) * theta_I * f(xi_I; x)_k,   s(n) = (-1)^(n(n-1)/2)

where ``theta_I`` is the ordered product of odd source coordinates.  The sign
comes from expanding ``(sum_i theta_i xi_i)^n`` on Grassmann points.
:func:`compose` implements the graded Faa di Bruno formula; :func:`compose_oracle`
substitutes pullbacks and must agree with it exactly.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .algebra import (
    ZERO,
    Poly,
    PreconditionError,
    SuperPolynomial,
    SuperVectorSpace,
    frac,
    koszul_sign,
    normalize_word,
    reduced_coproduct_iter,
    substitute_monomials,
)


class InvariantError(ValueError):
    """A value violates a structural invariant (parity, shape, ...)."""


class DomainError(ValueError):
    """The image of a morphism is not known to lie in the next domain."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def odd_sign(n: int) -> int:
    return -1 if (n * (n - 1) // 2) % 2 else 1


# ---------------------------------------------------------------------------
# boxes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Axis-aligned open box in the even part; ``None`` marks an unbounded axis."""

    bounds: tuple = ()

    def __post_init__(self):
        clean = []
        for b in self.bounds:
            if b is None:
                clean.append(None)
                continue
            lo, hi = frac(b[0]), frac(b[1])
            if not lo < hi:
                raise InvariantError(f"empty interval ({lo}, {hi})")
            clean.append((lo, hi))
        object.__setattr__(self, "bounds", tuple(clean))

    @classmethod
    def unbounded(cls, space: SuperVectorSpace) -> Box:
        return cls((None,) * space.p)

    def is_unbounded(self) -> bool:
        return all(b is None for b in self.bounds)

    def contains(self, point: Sequence[Fraction]) -> bool:
        return all(b is None or b[0] < x < b[1] for b, x in zip(self.bounds, point))

    def __add__(self, other: Box) -> Box:
        return Box(self.bounds + other.bounds)


# ---------------------------------------------------------------------------
# the morphism type
# ---------------------------------------------------------------------------


Components = Mapping[tuple[int, ...], Mapping[str, Poly]]


class SpolMorphism:
    """A polynomial morphism of superdomains (immutable by convention)."""

    __slots__ = ("source", "target", "components", "source_box", "target_box")

    def __init__(
        self,
        source: SuperVectorSpace,
        target: SuperVectorSpace,
        components: Components,
        source_box: Box | None = None,
        target_box: Box | None = None,
    ):
        self.source = source
        self.target = target
        self.source_box = source_box or Box.unbounded(source)
        self.target_box = target_box or Box.unbounded(target)
        if len(self.source_box.bounds) != source.p or len(self.target_box.bounds) != target.p:
            raise InvariantError("box dimension does not match the even dimension")
        clean: dict[tuple[int, ...], dict[str, Poly]] = {}
        for odd, values in components.items():
            odd = tuple(odd)
            if list(odd) != sorted(set(odd)) or any(not 0 <= j < source.q for j in odd):
                raise InvariantError(f"bad odd subset {odd}")
            vals = {}
            for name, poly in values.items():
                if poly.nvars != source.p:
                    raise InvariantError("component polynomial has the wrong number of variables")
                if poly.is_zero():
                    continue
                if target.parity(name) != len(odd) % 2:
                    raise InvariantError(
                        f"parity-incoherent component: subset {odd} feeds {target.parity(name) and 'odd' or 'even'} coordinate {name!r}"
                    )
                vals[name] = poly
            if vals:
                clean[odd] = vals
        self.components = clean

    # ------------------------------------------------------------------
    def component(self, odd: tuple[int, ...], name: str) -> Poly:
        return self.components.get(tuple(odd), {}).get(name) or Poly(self.source.p)

    def base_map(self) -> list[Poly]:
        """f_0 as a list of polynomials, one per even target coordinate."""
        return [self.component((), n) for n in self.target.even]

    def __eq__(self, other):
        if not isinstance(other, SpolMorphism):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.components == other.components
        )

    def __hash__(self):
        return hash((self.source, self.target, len(self.components)))

    def difference(self, other: SpolMorphism):
        """First differing (odd subset, target name) pair, or None."""
        keys = set(self.components) | set(other.components)
        for odd in sorted(keys, key=lambda k: (len(k), k)):
            for name in self.target.names:
                if self.component(odd, name) != other.component(odd, name):
                    return odd, name
        return None

    def __repr__(self):
        return f"SpolMorphism({self.source} -> {self.target}, {len(self.components)} components)"

    # pullback dictionary ---------------------------------------------
    def pullbacks(self) -> dict[str, SuperPolynomial]:
        out = {}
        for name in self.target.names:
            terms = {}
            for odd, values in self.components.items():
                poly = values.get(name)
                if poly is None:
                    continue
                s = odd_sign(len(odd))
                for exp, v in poly.terms.items():
                    terms[(odd, exp)] = s * v
            out[name] = SuperPolynomial(self.source, terms)
        return out

    @classmethod
    def from_pullbacks(
        cls,
        source: SuperVectorSpace,
        target: SuperVectorSpace,
        pullbacks: Mapping[str, SuperPolynomial],
        source_box: Box | None = None,
        target_box: Box | None = None,
    ) -> SpolMorphism:
        comps: dict[tuple[int, ...], dict[str, dict]] = {}
        for name, sp in pullbacks.items():
            if name not in target:
                raise InvariantError(f"{name!r} is not a target coordinate")
            if sp.space != source:
                raise InvariantError(f"pullback of {name!r} lives on the wrong space")
            for (odd, exp), v in sp.terms.items():
                comps.setdefault(odd, {}).setdefault(name, {})[exp] = odd_sign(len(odd)) * v
        components = {
            odd: {n: Poly(source.p, t) for n, t in vals.items()} for odd, vals in comps.items()
        }
        return cls(source, target, components, source_box, target_box)


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------


def identity(space: SuperVectorSpace, box: Box | None = None) -> SpolMorphism:
    comps: dict = {(): {n: Poly.var(space.p, i) for i, n in enumerate(space.even)}}
    for j, n in enumerate(space.odd):
        comps[(j,)] = {n: Poly.const(space.p, 1)}
    return SpolMorphism(space, space, comps, box, box)


def constant_morphism(source: SuperVectorSpace, target: SuperVectorSpace, point: Sequence) -> SpolMorphism:
    """Constant map to the even point ``point`` of the target."""
    comps = {(): {n: Poly.const(source.p, frac(c)) for n, c in zip(target.even, point)}}
    return SpolMorphism(source, target, comps)


def linear_morphism(
    source: SuperVectorSpace, target: SuperVectorSpace, matrix: Mapping[str, Mapping[str, object]]
) -> SpolMorphism:
    """Even linear map: target coordinate ``t`` pulls back to sum_s matrix[t][s] * s."""
    pull = {}
    for t in target.names:
        sp = SuperPolynomial.zero(source)
        for s, c in matrix.get(t, {}).items():
            if source.parity(s) != target.parity(t):
                raise InvariantError(f"linear map mixes parities ({s} -> {t})")
            sp = sp + SuperPolynomial.coordinate(source, s) * frac(c)
        pull[t] = sp
    return SpolMorphism.from_pullbacks(source, target, pull)


def product_space(
    spaces: Sequence[SuperVectorSpace], prefixes: Sequence[str] | None = None
) -> SuperVectorSpace:
    """Direct sum; names are prefixed when ``prefixes`` is given or names collide."""
    if prefixes is None:
        all_names = [n for s in spaces for n in s.names]
        if len(set(all_names)) != len(all_names):
            prefixes = [f"{i + 1}." for i in range(len(spaces))]
        else:
            prefixes = [""] * len(spaces)
    even = tuple(p + n for s, p in zip(spaces, prefixes) for n in s.even)
    odd = tuple(p + n for s, p in zip(spaces, prefixes) for n in s.odd)
    return SuperVectorSpace(even, odd)


def _block_prefixes(spaces, total: SuperVectorSpace):
    """Recover the prefix used for each block of a product space."""
    prefixes = []
    ei = oi = 0
    for s in spaces:
        if s.even:
            prefixes.append(total.even[ei][: len(total.even[ei]) - len(s.even[0])])
        elif s.odd:
            prefixes.append(total.odd[oi][: len(total.odd[oi]) - len(s.odd[0])])
        else:
            prefixes.append("")
        ei += s.p
        oi += s.q
    return prefixes


def power_space(space: SuperVectorSpace, n: int) -> SuperVectorSpace:
    return product_space([space] * n, [f"{i + 1}." for i in range(n)])


def rename_source(sp: SuperPolynomial, new_space: SuperVectorSpace, mapping: Mapping[str, str]) -> SuperPolynomial:
    """Move a superpolynomial to ``new_space`` renaming coordinates.

    Odd coordinates must keep their relative order (block embeddings do).
    """
    old = sp.space
    even_map = [new_space.index(mapping[n]) for n in old.even]
    odd_map = [new_space.index(mapping[n]) for n in old.odd]
    if odd_map != sorted(odd_map):
        raise PreconditionError("renaming must preserve the order of odd coordinates")
    terms = {}
    for (odd, exp), v in sp.terms.items():
        ne = [0] * new_space.p
        for i, e in enumerate(exp):
            ne[even_map[i]] += e
        terms[(tuple(odd_map[j] for j in odd), tuple(ne))] = v
    return SuperPolynomial(new_space, terms)


def product_morphism(*fs: SpolMorphism) -> SpolMorphism:
    """Blockwise product f_1 x ... x f_n between direct sums."""
    source = product_space([f.source for f in fs])
    target = product_space([f.target for f in fs])
    sprefix = _block_prefixes([f.source for f in fs], source)
    tprefix = _block_prefixes([f.target for f in fs], target)
    pull = {}
    for f, sp, tp in zip(fs, sprefix, tprefix):
        mapping = {n: sp + n for n in f.source.names}
        for name, poly in f.pullbacks().items():
            pull[tp + name] = rename_source(poly, source, mapping)
    sbox = Box(sum((f.source_box.bounds for f in fs), ()))
    tbox = Box(sum((f.target_box.bounds for f in fs), ()))
    return SpolMorphism.from_pullbacks(source, target, pull, sbox, tbox)


def projection(factors: Sequence[SuperVectorSpace], product: SuperVectorSpace, k: int) -> SpolMorphism:
    """Projection of ``product`` (built from ``factors``) onto factor ``k``."""
    prefix = _block_prefixes(factors, product)[k]
    target = factors[k]
    pull = {n: SuperPolynomial.coordinate(product, prefix + n) for n in target.names}
    return SpolMorphism.from_pullbacks(product, target, pull)


def tuple_morphism(target: SuperVectorSpace, factors: Sequence[SuperVectorSpace], *fs: SpolMorphism) -> SpolMorphism:
    """The morphism (f_1, ..., f_n): X -> Y_1 x ... x Y_n into ``target``."""
    source = fs[0].source
    prefixes = _block_prefixes(factors, target)
    pull = {}
    for f, prefix in zip(fs, prefixes):
        if f.source != source:
            raise PreconditionError("tupled morphisms need a common source")
        for name, poly in f.pullbacks().items():
            pull[prefix + name] = poly
    return SpolMorphism.from_pullbacks(source, target, pull, fs[0].source_box)


def rename_coordinates(
    f: SpolMorphism,
    source: SuperVectorSpace,
    target: SuperVectorSpace,
    source_map: Mapping[str, tuple[str, int]],
    target_map: Mapping[str, tuple[str, int]],
) -> SpolMorphism:
    """Conjugate ``f`` by signed coordinate relabelings.

    ``source_map[old] = (new, sign)`` means the old coordinate equals
    ``sign * new``; likewise for the target.
    """
    values = {}
    for n in f.source.names:
        new, sign = source_map[n]
        values[n] = SuperPolynomial.coordinate(source, new) * sign
    pull = {}
    for name, sp in f.pullbacks().items():
        new, sign = target_map[name]
        pull[new] = substitute_superpoly(sp, values) * sign
    return SpolMorphism.from_pullbacks(source, target, pull)


# ---------------------------------------------------------------------------
# evaluation on words
# ---------------------------------------------------------------------------


@dataclass
class WordEvaluation:
    word: tuple[str, ...]
    result: dict[str, Poly] = field(default_factory=dict)


def _apply_normalized(f: SpolMorphism, sign: int, word: tuple[str, ...]) -> dict[str, Poly]:
    space = f.source
    alpha = [0] * space.p
    odd = []
    for n in word:
        if space.parity(n):
            odd.append(space.index(n))
        else:
            alpha[space.index(n)] += 1
    values = f.components.get(tuple(odd))
    if not values:
        return {}
    out = {}
    for name, poly in values.items():
        d = poly.diff_multi(alpha)
        if d:
            out[name] = d * sign if sign != 1 else d
    return out


def apply_to_word(f: SpolMorphism, word: Sequence[str]) -> WordEvaluation:
    """f(P; x) for a word P of S(E), as polynomials in x."""
    sign, w = normalize_word(f.source, word)
    if sign == 0:
        return WordEvaluation(tuple(word), {})
    return WordEvaluation(tuple(word), _apply_normalized(f, sign, w))


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------


def _check_composable(g: SpolMorphism, f: SpolMorphism, check: bool):
    if f.target != g.source:
        raise PreconditionError(f"cannot compose: {f.target} != {g.source}")
    if check and not g.source_box.is_unbounded():
        status, witness = check_domain(f, g.source_box)
        if status != "pass":
            raise DomainError(f"domain check {status} for composition", witness)


class _Composer:
    """Shared caches for evaluating g(Q; f_0(x)) on many words Q of S(F)."""

    def __init__(self, g: SpolMorphism, f: SpolMorphism):
        self.g, self.f = g, f
        self.one = Poly.const(f.source.p, 1)
        self.base = f.base_map()
        self.cache: dict[tuple[str, ...], dict[str, Poly]] = {}

    def g_at_base(self, word: tuple[str, ...]) -> dict[str, Poly]:
        """g(Q; f_0(x)) for a normalized word Q (sign already removed)."""
        hit = self.cache.get(word)
        if hit is None:
            hit = {}
            for name, poly in _apply_normalized(self.g, 1, word).items():
                sub = substitute_monomials(poly.terms, self.base, self.one)
                if sub:
                    hit[name] = sub
            self.cache[word] = hit
        return hit

    def apply_tensor_product(self, values: Sequence[Mapping[str, Poly]], coeff, acc: dict):
        """Accumulate coeff * g(mu(v_0 (x) ... (x) v_n); f_0) into ``acc``."""
        target = self.f.target
        for choice in itertools.product(*[list(v.items()) for v in values]):
            sign, word = normalize_word(target, [c[0] for c in choice])
            if not sign:
                continue
            gvals = self.g_at_base(word)
            if not gvals:
                continue
            poly = choice[0][1]
            for c in choice[1:]:
                poly = poly * c[1]
            poly = poly * (coeff * sign)
            for name, gp in gvals.items():
                acc[name] = acc[name] + poly * gp if name in acc else poly * gp


def compose_on_word(g: SpolMorphism, f: SpolMorphism, word: Sequence[str], composer: _Composer | None = None) -> dict[str, Poly]:
    """(g o f)(P; x) straight from the graded Faa di Bruno sum.

    Uses the literal ordered reduced coproducts and the 1/(n+1)! weights; the
    n-sum stops at len(P) - 1 because longer coproducts vanish.
    """
    c = composer or _Composer(g, f)
    sign, w = normalize_word(f.source, word)
    if not sign:
        return {}
    acc: dict[str, Poly] = {}
    if not w:
        return dict(c.g_at_base(()))
    for n in range(len(w)):
        weight = Fraction(sign, math.factorial(n + 1))
        for blocks, eps in reduced_coproduct_iter(f.source, n, w).items():
            values = [_apply_normalized(f, 1, b) for b in blocks]
            if any(not v for v in values):
                continue
            c.apply_tensor_product(values, weight * eps, acc)
    return {k: v for k, v in acc.items() if v}


def _odd_partitions(f: SpolMorphism):
    """Set partitions of odd subsets into blocks on which f is non-zero.

    Yields (union, blocks) with blocks listed by increasing minimum; each set
    partition appears once.
    """
    support = sorted((I for I in f.components if I), key=lambda I: (I[0], I))
    by_min: dict[int, list] = {}
    for I in support:
        by_min.setdefault(I[0], []).append(I)
    q = f.source.q

    def extend(used: frozenset, blocks: list, start: int):
        yield blocks
        for m in range(start, q):
            if m in used:
                continue
            for I in by_min.get(m, ()):
                if used.isdisjoint(I):
                    yield from extend(used | set(I), blocks + [I], m + 1)

    for blocks in extend(frozenset(), [], 0):
        if blocks:
            yield blocks


def compose(g: SpolMorphism, f: SpolMorphism, check_domains: bool = True) -> SpolMorphism:
    """g o f via the graded Faa di Bruno formula.

    The ordered sum over reduced coproducts is evaluated by unordered set
    partitions (each appearing once): the (n+1)! orderings of a partition
    contribute equally, cancelling the 1/(n+1)! weight.  Only blocks on which
    f is non-zero are enumerated.
    """
    _check_composable(g, f, check_domains)
    c = _Composer(g, f)
    space = f.source
    comps: dict[tuple[int, ...], dict[str, Poly]] = {}
    base = c.g_at_base(())
    if base:
        comps[()] = dict(base)
    for blocks in _odd_partitions(f):
        union = tuple(sorted(j for b in blocks for j in b))
        word = tuple(space.odd[j] for j in union)
        positions = [[union.index(j) for j in b] for b in blocks]
        eps = koszul_sign(space, word, positions)
        values = [f.components[b] for b in blocks]
        acc = comps.setdefault(union, {})
        c.apply_tensor_product(values, Fraction(eps), acc)
    return SpolMorphism(f.source, g.target, comps, f.source_box, g.target_box)


def compose_literal(g: SpolMorphism, f: SpolMorphism) -> SpolMorphism:
    """g o f evaluating every odd word with the literal ordered formula (slow)."""
    _check_composable(g, f, False)
    c = _Composer(g, f)
    comps = {}
    for r in range(f.source.q + 1):
        for I in itertools.combinations(range(f.source.q), r):
            comps[I] = compose_on_word(g, f, [f.source.odd[j] for j in I], c)
    return SpolMorphism(f.source, g.target, comps, f.source_box, g.target_box)


def substitute_superpoly(p: SuperPolynomial, values: Mapping[str, object], one=None):
    """Evaluate a superpolynomial at elements of a supercommutative algebra.

    ``values`` maps every source coordinate to an element; odd generators are
    multiplied in their basis order and even ones by cached powers.
    """
    space = p.space
    even_vals = [values[n] for n in space.even]
    odd_vals = [values[n] for n in space.odd]
    if one is None:
        one = _unit_like(next(iter(values.values())))
    powers: dict = {}

    def power(i, e):
        key = (i, e)
        if key not in powers:
            powers[key] = even_vals[i] if e == 1 else power(i, e - 1) * even_vals[i]
        return powers[key]

    odd_products: dict = {(): one}

    def odd_product(I):
        if I not in odd_products:
            odd_products[I] = odd_product(I[:-1]) * odd_vals[I[-1]]
        return odd_products[I]

    grouped: dict = {}
    for (odd, exp), v in p.terms.items():
        grouped.setdefault(odd, []).append((exp, v))
    total = one * ZERO
    for odd, terms in grouped.items():
        even_part = one * ZERO
        for exp, v in terms:
            term = one * v
            for i, e in enumerate(exp):
                if e:
                    term = term * power(i, e)
            even_part = even_part + term
        total = total + odd_product(odd) * even_part
    return total


def _unit_like(element):
    if isinstance(element, SuperPolynomial):
        return SuperPolynomial.const(element.space, 1)
    return element.unit()


def compose_oracle(g: SpolMorphism, f: SpolMorphism) -> SpolMorphism:
    """g o f by classical Grassmann substitution of pullbacks."""
    _check_composable(g, f, False)
    fpull = f.pullbacks()
    values = {n: fpull[n] for n in f.target.names}
    one = SuperPolynomial.const(f.source, 1)
    pull = {n: substitute_superpoly(sp, values, one) for n, sp in g.pullbacks().items()}
    return SpolMorphism.from_pullbacks(f.source, g.target, pull, f.source_box, g.target_box)


# ---------------------------------------------------------------------------
# the underlying even map
# ---------------------------------------------------------------------------


def underlying(f: SpolMorphism) -> SpolMorphism:
    src = SuperVectorSpace(f.source.even, ())
    tgt = SuperVectorSpace(f.target.even, ())
    comps = {(): {n: p for n, p in f.components.get((), {}).items()}}
    return SpolMorphism(src, tgt, comps, f.source_box, f.target_box)


# ---------------------------------------------------------------------------
# domain checks
# ---------------------------------------------------------------------------


def _interval_mul(a, b):
    prods = [x * y for x in a for y in b]
    return (min(prods), max(prods))


def _interval_pow(a, e):
    lo, hi = a
    if e % 2 == 0 and lo <= 0 <= hi:
        return (Fraction(0), max(lo**e, hi**e))
    vals = [lo**e, hi**e]
    return (min(vals), max(vals))


def _poly_range(poly: Poly, box: Box):
    """Enclosure of poly over the closure of a bounded box (None if unbounded)."""
    lo = hi = Fraction(0)
    for exp, c in poly.terms.items():
        rng = (c, c)
        for i, e in enumerate(exp):
            if not e:
                continue
            b = box.bounds[i]
            if b is None:
                return None
            rng = _interval_mul(rng, _interval_pow(b, e))
        lo += rng[0]
        hi += rng[1]
    return lo, hi


def _sample_points(box: Box, per_axis: int = 5):
    axes = []
    for b in box.bounds:
        if b is None:
            axes.append([Fraction(k) for k in (0, 1, -1, 10, -10, 1000, -1000)])
        else:
            lo, hi = b
            axes.append([lo + (hi - lo) * Fraction(k, per_axis + 1) for k in range(1, per_axis + 1)])
    mids = [a[len(a) // 2] if len(a) % 2 else a[0] for a in axes]
    yield mids
    yield from itertools.product(*axes)


def check_domain(f: SpolMorphism, target_box: Box | None = None):
    """Conservative containment test f_0(U) in V.

    Returns ``("pass", None)``, ``("fail", witness_point)`` or
    ``("indeterminate", None)``.
    """
    box = target_box if target_box is not None else f.target_box
    if box.is_unbounded():
        return "pass", None
    base = f.base_map()
    conclusive = True
    for poly, b in zip(base, box.bounds):
        if b is None:
            continue
        rng = _poly_range(poly, f.source_box)
        if rng is None or not (b[0] < rng[0] and rng[1] < b[1]):
            conclusive = False
            break
    if conclusive:
        return "pass", None
    for point in itertools.islice(_sample_points(f.source_box), 4000):
        if not f.source_box.contains(point):
            continue
        image = [p.evaluate(point) for p in base]
        if not box.contains(image):
            return "fail", tuple(point)
    return "indeterminate", None


# ---------------------------------------------------------------------------
# fibrewise degree
# ---------------------------------------------------------------------------


def fiberwise_degree_check(
    f: SpolMorphism,
    fiber: Sequence[str] | Sequence[Sequence[str]],
    k: int,
    fiber_targets: Iterable[str] | None = None,
):
    """Is f a homogeneous degree-k polynomial morphism in the fibre block?

    ``fiber`` is either one list of source coordinates (one copy of the
    fibre, degree-k homogeneity) or k lists of equal length (k copies,
    multilinear and symmetric).  Target coordinates outside
    ``fiber_targets`` (default: none, i.e. all targets are fibre valued)
    must depend only on the base block.  Returns ``(ok, reason)``.
    """
    src = f.source
    copies = [list(fiber)] if fiber and isinstance(fiber[0], str) else [list(c) for c in fiber]
    if len(copies) not in (1, k) or (len(copies) > 1 and len({len(c) for c in copies}) != 1):
        raise PreconditionError("malformed block split")
    for c in copies:
        for n in c:
            if n not in src:
                raise PreconditionError(f"{n!r} is not a source coordinate")
    fiber_targets = set(f.target.names if fiber_targets is None else fiber_targets)
    copy_of_even = {}
    copy_of_odd = {}
    for ci, c in enumerate(copies):
        for n in c:
            (copy_of_odd if src.parity(n) else copy_of_even)[src.index(n)] = ci
    multi = len(copies) > 1

    def degrees(odd, exp):
        per = [0] * len(copies)
        for j in odd:
            if j in copy_of_odd:
                per[copy_of_odd[j]] += 1
        for i, e in enumerate(exp):
            if e and i in copy_of_even:
                per[copy_of_even[i]] += e
        return per

    pulls = f.pullbacks()
    for name, sp in pulls.items():
        for (odd, exp) in sp.terms:
            per = degrees(odd, exp)
            if name in fiber_targets:
                if multi:
                    if any(d != 1 for d in per):
                        return False, f"{name}: term not multilinear in the fibre copies"
                elif per[0] != k:
                    return False, f"{name}: term of fibre degree {per[0]} != {k}"
            elif sum(per):
                return False, f"{name}: base coordinate depends on the fibre"
    if multi:
        # symmetry under exchanging fibre copies
        for a, b in itertools.combinations(range(len(copies)), 2):
            mapping = {n: n for n in src.names}
            for x, y in zip(copies[a], copies[b]):
                mapping[x], mapping[y] = y, x
            values = {n: SuperPolynomial.coordinate(src, mapping[n]) for n in src.names}
            for name, sp in pulls.items():
                if name in fiber_targets and substitute_superpoly(sp, values) != sp:
                    return False, f"{name}: not symmetric in copies {a} and {b}"
    return True, "ok"


# ---------------------------------------------------------------------------
# random morphisms for property suites
# ---------------------------------------------------------------------------


def random_poly(rng: random.Random, nvars: int, degree: int, nterms: int, coeff_range: int = 10) -> Poly:
    terms = {}
    for _ in range(nterms):
        d = rng.randint(0, degree)
        exp = [0] * nvars
        for _ in range(d):
            if nvars:
                exp[rng.randrange(nvars)] += 1
        c = rng.randint(-coeff_range, coeff_range)
        terms[tuple(exp)] = terms.get(tuple(exp), ZERO) + c
    return Poly(nvars, terms)


def random_morphism(
    rng: random.Random,
    source: SuperVectorSpace,
    target: SuperVectorSpace,
    degree: int = 2,
    nterms: int = 2,
    coeff_range: int = 10,
    max_odd: int | None = None,
) -> SpolMorphism:
    """Random parity-coherent polynomial morphism with unbounded boxes."""
    comps = {}
    max_odd = source.q if max_odd is None else max_odd
    for r in range(min(source.q, max_odd) + 1):
        for I in itertools.combinations(range(source.q), r):
            vals = {}
            for name in target.names:
                if target.parity(name) != r % 2:
                    continue
                if rng.random() < 0.35:
                    continue
                vals[name] = random_poly(rng, source.p, degree, nterms, coeff_range)
            comps[I] = vals
    return SpolMorphism(source, target, comps)
