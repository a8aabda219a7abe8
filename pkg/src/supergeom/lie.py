"""Lie superalgebras by structure constants and their enveloping algebras.

Elements of U(g) are kept in PBW normal form: words in the basis that are
non-decreasing in the PBW order (even generators first, then odd ones, each
in declaration order) with no repeated odd letter.  Arbitrary words are
straightened with

    ab = (-1)^{|a||b|} ba + [a, b]      (a after b in PBW order)
    aa = 1/2 [a, a]                      (a odd)

Coefficients may be Fractions or :class:`~supergeom.algebra.Poly` values;
the rewriting itself only ever produces rationals.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import ONE, ZERO, PreconditionError, frac


class LieSuperalgebra:
    """Finite-dimensional Lie superalgebra with bracket [b_i, b_j] = sum_k c_ij^k b_k."""

    def __init__(self, basis: Sequence[tuple[str, int]], brackets: Mapping[tuple[str, str], Mapping[str, object]], complete: bool = True):
        names = [b[0] for b in basis]
        if len(set(names)) != len(names):
            raise PreconditionError("duplicate basis names")
        self.names = tuple(names)
        self.parities = tuple(int(b[1]) % 2 for b in basis)
        self._index = {n: i for i, n in enumerate(names)}
        table: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (a, b), value in brackets.items():
            i, j = self.index(a), self.index(b)
            row = {self.index(k): frac(c) for k, c in value.items() if frac(c)}
            if row:
                table[(i, j)] = row
        if complete:
            for (i, j), row in list(table.items()):
                if (j, i) not in table and i != j:
                    s = -1 if self.parities[i] * self.parities[j] else 1
                    table[(j, i)] = {k: -s * c for k, c in row.items()}
        self.table = table
        evens = [i for i, p in enumerate(self.parities) if not p]
        odds = [i for i, p in enumerate(self.parities) if p]
        self.pbw_order = tuple(evens + odds)
        self._pbw_pos = {b: k for k, b in enumerate(self.pbw_order)}
        self._cache: dict[str, dict] = {"left": {}, "right": {}}

    # ------------------------------------------------------------------
    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PreconditionError(f"unknown basis element {name!r}") from None

    @property
    def dim(self) -> tuple[int, int]:
        return (self.parities.count(0), self.parities.count(1))

    def bracket_basis(self, i: int, j: int) -> dict[int, Fraction]:
        return self.table.get((i, j), {})

    def bracket(self, u: Mapping[int, object], v: Mapping[int, object]) -> dict:
        """Bracket of vectors given as {basis index: coefficient}."""
        out: dict = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.bracket_basis(i, j).items():
                    out[k] = out.get(k, ZERO) + a * b * c
        return {k: c for k, c in out.items() if c}

    def __eq__(self, other):
        return isinstance(other, LieSuperalgebra) and (self.names, self.parities, self.table) == (
            other.names,
            other.parities,
            other.table,
        )

    def __hash__(self):
        return hash((self.names, self.parities))

    def __repr__(self):
        return f"LieSuperalgebra({list(zip(self.names, self.parities))})"


def check_lie(g: LieSuperalgebra):
    """Exhaustive grading, antisymmetry and Jacobi check.

    Returns ``(True, None)`` or ``(False, (reason, triple))``.
    """
    n = len(g.names)
    par = g.parities
    for (i, j), row in g.table.items():
        for k in row:
            if par[k] != (par[i] + par[j]) % 2:
                return False, ("grading", (g.names[i], g.names[j], g.names[k]))
    for i in range(n):
        for j in range(n):
            s = -1 if par[i] * par[j] else 1
            lhs = g.bracket_basis(i, j)
            rhs = {k: -s * c for k, c in g.bracket_basis(j, i).items()}
            if lhs != rhs:
                return False, ("antisymmetry", (g.names[i], g.names[j]))
    for i, j, k in itertools.product(range(n), repeat=3):
        x, y, z = {i: ONE}, {j: ONE}, {k: ONE}
        lhs = g.bracket(x, g.bracket(y, z))
        rhs = g.bracket(g.bracket(x, y), z)
        s = -1 if par[i] * par[j] else 1
        for key, c in g.bracket(y, g.bracket(x, z)).items():
            rhs[key] = rhs.get(key, ZERO) + s * c
        rhs = {key: c for key, c in rhs.items() if c}
        if lhs != rhs:
            return False, ("jacobi", (g.names[i], g.names[j], g.names[k]))
    return True, None


# ---------------------------------------------------------------------------
# enveloping algebra
# ---------------------------------------------------------------------------


def _is_zero(c) -> bool:
    return not c


class UEnvElement:
    """Element of U(g): {normal-ordered word (tuple of basis indices): coefficient}."""

    __slots__ = ("g", "terms")

    def __init__(self, g: LieSuperalgebra, terms: Mapping[tuple[int, ...], object] | None = None):
        self.g = g
        clean = {}
        for w, c in (terms or {}).items():
            if isinstance(c, int):
                c = Fraction(c)
            if not _is_zero(c):
                clean[tuple(w)] = c
        self.terms = clean

    @classmethod
    def one(cls, g):
        return cls(g, {(): ONE})

    @classmethod
    def generator(cls, g, name: str):
        return cls(g, {(g.index(name),): ONE})

    @classmethod
    def from_word(cls, g, names: Sequence[str], strategy: str = "left"):
        return cls(g, normal_form(g, tuple(g.index(n) for n in names), strategy))

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, UEnvElement) and self.g is other.g and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms))

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out[w] + c if w in out else c
        return UEnvElement(self.g, out)

    def __neg__(self):
        return UEnvElement(self.g, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> UEnvElement:
        return UEnvElement(self.g, {w: c * v for w, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, UEnvElement):
            return u_mul(self, other)
        return self.scale(other)

    def parities(self) -> set[int]:
        return {word_parity(self.g, w) for w in self.terms}

    def parity(self) -> int:
        ps = self.parities()
        if len(ps) > 1:
            raise PreconditionError("inhomogeneous element")
        return ps.pop() if ps else 0

    def filtration_degree(self) -> int:
        return max((len(w) for w in self.terms), default=-1)

    def homogeneous_parts(self) -> dict[int, UEnvElement]:
        parts: dict = {}
        for w, c in self.terms.items():
            parts.setdefault(word_parity(self.g, w), {})[w] = c
        return {p: UEnvElement(self.g, t) for p, t in parts.items()}

    def format(self) -> str:
        return format_uenv(self)

    def __repr__(self):
        return f"UEnvElement({format_uenv(self)!r})"


def word_parity(g: LieSuperalgebra, word: Sequence[int]) -> int:
    return sum(g.parities[i] for i in word) % 2


def is_normal(g: LieSuperalgebra, word: Sequence[int]) -> bool:
    pos = g._pbw_pos
    for a, b in zip(word, word[1:]):
        if pos[a] > pos[b] or (a == b and g.parities[a]):
            return False
    return True


def _disorder(g, word, strategy):
    pos = g._pbw_pos
    rng = range(len(word) - 1)
    if strategy == "right":
        rng = reversed(rng)
    for i in rng:
        a, b = word[i], word[i + 1]
        if pos[a] > pos[b] or (a == b and g.parities[a]):
            return i
    return None


def normal_form(g: LieSuperalgebra, word: tuple[int, ...], strategy: str = "left") -> dict[tuple[int, ...], Fraction]:
    """PBW normal form of a word; ``strategy`` picks the leftmost or rightmost disorder."""
    cache = g._cache[strategy]
    hit = cache.get(word)
    if hit is not None:
        return hit
    i = _disorder(g, word, strategy)
    if i is None:
        result = {word: ONE}
    else:
        a, b = word[i], word[i + 1]
        head, tail = word[:i], word[i + 2 :]
        result: dict = {}

        def add(w, c):
            for k, v in normal_form(g, w, strategy).items():
                result[k] = result.get(k, ZERO) + c * v

        if a == b:
            for k, c in g.bracket_basis(a, a).items():
                add(head + (k,) + tail, c / 2)
        else:
            add(head + (b, a) + tail, Fraction(-1 if g.parities[a] * g.parities[b] else 1))
            for k, c in g.bracket_basis(a, b).items():
                add(head + (k,) + tail, c)
        result = {k: v for k, v in result.items() if v}
    cache[word] = result
    return result


def u_mul(u: UEnvElement, v: UEnvElement, strategy: str = "left") -> UEnvElement:
    if u.g is not v.g:
        raise PreconditionError("elements of different enveloping algebras")
    out: dict = {}
    for w1, c1 in u.terms.items():
        for w2, c2 in v.terms.items():
            c = c1 * c2
            for w, e in normal_form(u.g, w1 + w2, strategy).items():
                out[w] = out[w] + c * e if w in out else c * e
    return UEnvElement(u.g, out)


def u_product(g: LieSuperalgebra, factors: Sequence[UEnvElement]) -> UEnvElement:
    out = UEnvElement.one(g)
    for f in factors:
        out = u_mul(out, f)
    return out


def antipode(u: UEnvElement) -> UEnvElement:
    """Graded anti-automorphism with S(x) = -x on g."""
    g = u.g
    out: dict = {}
    for w, c in u.terms.items():
        k = sum(g.parities[i] for i in w)
        sign = (-1) ** len(w) * (-1 if (k * (k - 1) // 2) % 2 else 1)
        for nw, e in normal_form(g, tuple(reversed(w))).items():
            out[nw] = out[nw] + sign * c * e if nw in out else sign * c * e
    return UEnvElement(g, out)


def antipode_recursion_check(u: UEnvElement, v: UEnvElement):
    """Compare S(uv) with the swapped form (-1)^{|u||v|} S(vu).

    Returns ``(S(uv), (-1)^{|u||v|} S(vu), agree)`` for homogeneous u, v.
    """
    s = -1 if u.parity() * v.parity() else 1
    lhs = antipode(u_mul(u, v))
    rhs = antipode(u_mul(v, u)).scale(s)
    return lhs, rhs, lhs == rhs


def koszul_permutation_sign(parities: Sequence[int], perm: Sequence[int]) -> int:
    """Sign of reordering letters with ``parities`` into ``[letters[p] for p in perm]``."""
    inv = 0
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b] and parities[perm[a]] and parities[perm[b]]:
                inv += 1
    return -1 if inv % 2 else 1


def symmetrize(g: LieSuperalgebra, word: Sequence[str]) -> UEnvElement:
    """beta(e_1...e_n) = 1/n! sum_sigma (Koszul sign) e_sigma(1)...e_sigma(n)."""
    idx = [g.index(n) for n in word]
    par = [g.parities[i] for i in idx]
    n = len(idx)
    out: dict = {}
    weight = Fraction(1, math.factorial(n))
    for perm in itertools.permutations(range(n)):
        s = koszul_permutation_sign(par, perm)
        for w, c in normal_form(g, tuple(idx[p] for p in perm)).items():
            out[w] = out.get(w, ZERO) + s * weight * c
    return UEnvElement(g, out)


def extend_linear_map(g: LieSuperalgebra, matrix: Mapping[int, Mapping[int, object]], u: UEnvElement) -> UEnvElement:
    """Multiplicative extension to U(g) of the even map b_j -> sum_k matrix[j][k] b_k."""
    images = {j: UEnvElement(g, {(k,): c for k, c in row.items()}) for j, row in matrix.items()}
    zero = UEnvElement(g)
    out = zero
    for w, c in u.terms.items():
        prod = UEnvElement.one(g)
        for letter in w:
            prod = u_mul(prod, images.get(letter, zero))
        out = out + prod.scale(c)
    return out


def pbw_monomials(g: LieSuperalgebra, n: int) -> list[tuple[int, ...]]:
    """Normal-ordered words of length <= n."""
    out = []
    order = g.pbw_order
    for length in range(n + 1):
        for w in itertools.combinations_with_replacement(order, length):
            if is_normal(g, w):
                out.append(w)
    return out


def symmetric_dimension(p: int, q: int, n: int) -> int:
    """dim S^{<=n}(R^{p|q})."""
    return sum(math.comb(q, k) * math.comb(p + n - k, p) for k in range(min(q, n) + 1))


def format_uenv(u: UEnvElement) -> str:
    from .algebra import format_coefficient

    if not u.terms:
        return "0"
    g = u.g
    pieces = []
    for w in sorted(u.terms, key=lambda w: (len(w), [g._pbw_pos[i] for i in w])):
        c = u.terms[w]
        body = "*".join(g.names[i] for i in w)
        if isinstance(c, Fraction):
            mag = abs(c)
            coef = format_coefficient(mag)
            text = body if (body and mag == 1) else (f"{coef}*{body}" if body else coef)
            pieces.append(("-" if c < 0 else "+", text))
        else:
            pieces.append(("+", f"({c})*{body}" if body else f"({c})"))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for s, t in pieces[1:]:
        out += f" {s} {t}"
    return out


def parse_uenv(g: LieSuperalgebra, text: str) -> UEnvElement:
    """Parse ``"1/2*x + y*x - 3"``; words are multiplied in U(g) as written."""
    import re

    text = text.strip()
    out = UEnvElement(g)
    if text in ("", "0"):
        return out
    sign = 1
    expect = True
    for tok in re.findall(r"[+-]|[^+-]+", text):
        tok = tok.strip()
        if not tok:
            continue
        if tok in "+-":
            sign = (1 if tok == "+" else -1) * (sign if expect else 1)
            expect = True
            continue
        coef = Fraction(sign)
        letters = []
        for factor in tok.split("*"):
            factor = factor.strip()
            if re.fullmatch(r"\d+(/\d+)?", factor):
                coef *= Fraction(factor)
            else:
                letters.append(g.index(factor))
        out = out + UEnvElement(g, normal_form(g, tuple(letters))).scale(coef)
        sign, expect = 1, False
    if expect:
        raise PreconditionError(f"dangling operator in {text!r}")
    return out


# ---------------------------------------------------------------------------
# the superloop double g + Pi g
# ---------------------------------------------------------------------------


def superloop_algebra(g: LieSuperalgebra, prefix: str = "Pi.") -> LieSuperalgebra:
    """g (+) Pi g with Pi y = y (x) theta.

    [x, Pi y] = Pi [x, y],  [Pi y, x] = (-1)^{|x|} Pi [y, x],  [Pi a, Pi b] = 0.
    """
    ok, why = check_lie(g)
    if not ok:
        raise PreconditionError(f"input is not a Lie superalgebra: {why}")
    names = list(g.names)
    basis = [(n, p) for n, p in zip(names, g.parities)]
    basis += [(prefix + n, 1 - p) for n, p in zip(names, g.parities)]
    brackets = {}
    for (i, j), row in g.table.items():
        a, b = names[i], names[j]
        brackets[(a, b)] = {names[k]: c for k, c in row.items()}
        brackets[(a, prefix + b)] = {prefix + names[k]: c for k, c in row.items()}
        s = -1 if g.parities[j] else 1
        brackets[(prefix + a, b)] = {prefix + names[k]: s * c for k, c in row.items()}
    return LieSuperalgebra(basis, brackets, complete=False)


def superloop_algebra_unsigned(g: LieSuperalgebra, prefix: str = "Pi.") -> LieSuperalgebra:
    """The sign-free variant [x1 + y1, x2 + y2] = [x1, x2] + ([x1, y2] + [y1, x2]).

    Kept for comparison; it is not super-antisymmetric once g has odd elements.
    """
    names = list(g.names)
    basis = [(n, p) for n, p in zip(names, g.parities)]
    basis += [(prefix + n, 1 - p) for n, p in zip(names, g.parities)]
    brackets = {}
    for (i, j), row in g.table.items():
        a, b = names[i], names[j]
        brackets[(a, b)] = {names[k]: c for k, c in row.items()}
        brackets[(a, prefix + b)] = {prefix + names[k]: c for k, c in row.items()}
        brackets[(prefix + a, b)] = {prefix + names[k]: c for k, c in row.items()}
    return LieSuperalgebra(basis, brackets, complete=False)


def loop_ad_experimental(g: LieSuperalgebra, ad: Mapping[int, Mapping[int, Fraction]], x, y, z):
    """Verbatim group-level loop Ad: (Ad(g) y, Ad(g)[x, y] + Ad(g)(z - x)).

    ``ad`` is the matrix of Ad(g) (column j = image of b_j); x, y, z are
    vectors {basis index: coefficient}.  Experimental: mixes a g_1 term with
    a Pi g term and is excluded from every invariant.
    """

    def apply(v):
        out: dict = {}
        for j, c in v.items():
            for k, m in ad.get(j, {}).items():
                out[k] = out.get(k, ZERO) + c * m
        return {k: c for k, c in out.items() if c}

    diff = dict(z)
    for k, c in x.items():
        diff[k] = diff.get(k, ZERO) - c
    second = apply(g.bracket(x, y))
    for k, c in apply(diff).items():
        second[k] = second.get(k, ZERO) + c
    return apply(y), {k: c for k, c in second.items() if c}
