"""Exact graded-linear and Grassmann-polynomial arithmetic.

Everything here is over :class:`fractions.Fraction`.  Three value types carry
the weight of the package:

* :class:`SuperVectorSpace` -- a coordinate space R^{p|q} with named basis.
* :class:`Poly` -- a commutative polynomial in the even coordinates.
* :class:`SuperPolynomial` -- a scalar superfunction, i.e. polynomial
  coefficients attached to sorted subsets of the odd generators.

Tensor words (monomials of the supersymmetric algebra S(E)) are plain tuples
of basis names kept in normal form by :func:`normalize_word`.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class PreconditionError(ValueError):
    """An operation was called outside its domain."""


def frac(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; use exact rationals")
    return Fraction(value)


# ---------------------------------------------------------------------------
# spaces and words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuperVectorSpace:
    even: tuple[str, ...] = ()
    odd: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "even", tuple(self.even))
        object.__setattr__(self, "odd", tuple(self.odd))
        names = self.even + self.odd
        if len(set(names)) != len(names):
            raise PreconditionError(f"duplicate coordinate names in {names}")

    @property
    def p(self) -> int:
        return len(self.even)

    @property
    def q(self) -> int:
        return len(self.odd)

    @property
    def names(self) -> tuple[str, ...]:
        return self.even + self.odd

    def parity(self, name: str) -> int:
        if name in self._even_index:
            return 0
        if name in self._odd_index:
            return 1
        raise PreconditionError(f"{name!r} is not a coordinate of {self}")

    def index(self, name: str) -> int:
        """Position of ``name`` within its parity block."""
        if name in self._even_index:
            return self._even_index[name]
        if name in self._odd_index:
            return self._odd_index[name]
        raise PreconditionError(f"{name!r} is not a coordinate of {self}")

    def __contains__(self, name) -> bool:
        return name in self._even_index or name in self._odd_index

    @property
    def _even_index(self) -> dict[str, int]:
        cached = self.__dict__.get("_ei")
        if cached is None:
            cached = {n: i for i, n in enumerate(self.even)}
            object.__setattr__(self, "_ei", cached)
        return cached

    @property
    def _odd_index(self) -> dict[str, int]:
        cached = self.__dict__.get("_oi")
        if cached is None:
            cached = {n: i for i, n in enumerate(self.odd)}
            object.__setattr__(self, "_oi", cached)
        return cached

    def __str__(self) -> str:
        return f"R^{{{self.p}|{self.q}}}({', '.join(self.even)} | {', '.join(self.odd)})"


def _sort_sign(keys: Sequence[int]) -> int:
    """Sign of the permutation sorting ``keys`` (all distinct)."""
    inversions = sum(1 for i, j in itertools.combinations(range(len(keys)), 2) if keys[i] > keys[j])
    return -1 if inversions % 2 else 1


def normalize_word(space: SuperVectorSpace, letters: Iterable[str]) -> tuple[int, tuple[str, ...]]:
    """Bring a word of S(E) to normal form.

    Even letters come first, sorted by basis position; odd letters follow,
    sorted, with the sign of the sorting permutation.  A repeated odd letter
    gives sign 0.
    """
    evens, odds = [], []
    for name in letters:
        if space.parity(name):
            odds.append(space.index(name))
        else:
            evens.append(space.index(name))
    if len(set(odds)) != len(odds):
        return 0, ()
    sign = _sort_sign(odds)
    word = tuple(space.even[i] for i in sorted(evens)) + tuple(space.odd[i] for i in sorted(odds))
    return sign, word


def word_parity(space: SuperVectorSpace, word: Iterable[str]) -> int:
    return sum(space.parity(n) for n in word) % 2


def koszul_sign(space: SuperVectorSpace, word: Sequence[str], partition: Sequence[Iterable[int]]) -> int:
    """(-1)^N for an ordered partition of the positions of ``word`` (0-based).

    N counts pairs i < j of odd letters with i in a later block than j.
    """
    blocks = [sorted(b) for b in partition]
    seen = [p for b in blocks for p in b]
    if sorted(seen) != list(range(len(word))):
        raise PreconditionError(f"{partition} is not a partition of positions 0..{len(word) - 1}")
    block_of = {}
    for k, b in enumerate(blocks):
        for pos in b:
            block_of[pos] = k
    odd_positions = [i for i, n in enumerate(word) if space.parity(n)]
    n_inv = sum(
        1 for i, j in itertools.combinations(odd_positions, 2) if block_of[i] > block_of[j]
    )
    return -1 if n_inv % 2 else 1


def ordered_set_partitions(n: int, blocks: int, allow_empty: bool = False) -> Iterator[list[list[int]]]:
    """All ordered partitions of ``range(n)`` into ``blocks`` labelled blocks.

    Enumerated by assigning each position a block label, so every block is a
    sorted position list and the order is deterministic.
    """
    for labels in itertools.product(range(blocks), repeat=n):
        if not allow_empty and len(set(labels)) != blocks:
            continue
        parts: list[list[int]] = [[] for _ in range(blocks)]
        for pos, lab in enumerate(labels):
            parts[lab].append(pos)
        yield parts


def _split_word(space, word, k, allow_empty):
    sign, w = normalize_word(space, word)
    out: dict[tuple[tuple[str, ...], ...], Fraction] = {}
    if sign == 0:
        return out
    if k == 0:
        return {(w,): Fraction(sign)}
    for parts in ordered_set_partitions(len(w), k + 1, allow_empty):
        eps = koszul_sign(space, w, parts)
        key = tuple(tuple(w[i] for i in part) for part in parts)
        out[key] = out.get(key, ZERO) + sign * eps
    return {key: c for key, c in out.items() if c}


def reduced_coproduct_iter(space: SuperVectorSpace, k: int, word: Sequence[str]) -> dict:
    """Iterated reduced coproduct: ordered partitions into k+1 non-empty blocks.

    Returns a formal sum ``{(block_0, ..., block_k): coefficient}``.
    """
    if k < 0:
        raise PreconditionError("k must be >= 0")
    return _split_word(space, word, k, allow_empty=False)


def coproduct_iter(space: SuperVectorSpace, k: int, word: Sequence[str]) -> dict:
    """Iterated full coproduct (blocks may be empty)."""
    if k < 0:
        raise PreconditionError("k must be >= 0")
    return _split_word(space, word, k, allow_empty=True)


def product_iter(space: SuperVectorSpace, words: Sequence[Sequence[str]]) -> dict:
    """k-fold product in S(E): concatenate and normalize."""
    sign, w = normalize_word(space, [n for word in words for n in word])
    return {w: Fraction(sign)} if sign else {}


# ---------------------------------------------------------------------------
# commutative polynomials in the even coordinates
# ---------------------------------------------------------------------------


def _add_into(acc: dict, key, value):
    new = acc.get(key, ZERO) + value
    if new:
        acc[key] = new
    else:
        acc.pop(key, None)


class Poly:
    """Polynomial with Fraction coefficients in ``nvars`` commuting variables.

    Stored as ``{exponent tuple: coefficient}`` with no zero coefficients.
    Treat instances as immutable.
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], Fraction] | None = None):
        self.nvars = nvars
        self.terms = {k: frac(v) for k, v in (terms or {}).items() if v}
        self._hash = None

    @classmethod
    def const(cls, nvars: int, c) -> Poly:
        return cls(nvars, {(0,) * nvars: frac(c)})

    @classmethod
    def var(cls, nvars: int, i: int) -> Poly:
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): ONE})

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def _coerce(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise PreconditionError("polynomials over different variable sets")
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        acc = dict(self.terms)
        for k, v in other.terms.items():
            _add_into(acc, k, v)
        return Poly(self.nvars, acc)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = frac(other)
            return Poly(self.nvars, {k: v * other for k, v in self.terms.items()}) if other else Poly(self.nvars)
        other = self._coerce(other)
        acc: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                _add_into(acc, tuple(a + b for a, b in zip(k1, k2)), v1 * v2)
        return Poly(self.nvars, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = Poly.const(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=-1)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, ZERO)

    def diff(self, i: int, times: int = 1) -> Poly:
        out = {}
        for k, v in self.terms.items():
            e = k[i]
            if e < times:
                continue
            c = v
            for t in range(times):
                c *= e - t
            nk = list(k)
            nk[i] = e - times
            out[tuple(nk)] = c
        return Poly(self.nvars, out)

    def diff_multi(self, alpha: Sequence[int]) -> Poly:
        p = self
        for i, a in enumerate(alpha):
            if a:
                p = p.diff(i, a)
        return p

    def depends_on(self, i: int) -> bool:
        return any(k[i] for k in self.terms)

    def evaluate(self, point: Sequence) -> Fraction:
        total = ZERO
        for k, v in self.terms.items():
            term = v
            for x, e in zip(point, k):
                if e:
                    term *= frac(x) ** e
            total += term
        return total

    def substitute(self, values: Sequence, one):
        """Evaluate with ``values[i]`` for variable i in any commutative ring.

        ``one`` is the unit of the target ring; powers are cached.
        """
        return substitute_monomials(self.terms, values, one)

    def __repr__(self):
        return f"Poly({self.nvars}, {self.terms!r})"


def substitute_monomials(terms: Mapping[tuple[int, ...], Fraction], values: Sequence, one):
    powers: dict[tuple[int, int], object] = {}

    def power(i, e):
        key = (i, e)
        if key not in powers:
            powers[key] = values[i] if e == 1 else power(i, e - 1) * values[i]
        return powers[key]

    total = one * ZERO
    for k, v in terms.items():
        term = one * v
        for i, e in enumerate(k):
            if e:
                term = term * power(i, e)
        total = total + term
    return total


# ---------------------------------------------------------------------------
# Grassmann polynomials
# ---------------------------------------------------------------------------


def merge_odd(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Product of sorted odd monomials: (sign, merged) with sign 0 on overlap."""
    if set(a) & set(b):
        return 0, ()
    inv = sum(1 for i in a for j in b if i > j)
    return (-1 if inv % 2 else 1), tuple(sorted(a + b))


class SuperPolynomial:
    """Scalar superfunction on a superdomain, polynomial in the even variables.

    ``terms`` maps ``(odd subset, even exponents)`` to a coefficient; the odd
    subset is a sorted tuple of odd indices and stands for the ordered product
    of those generators.
    """

    __slots__ = ("space", "terms")

    def __init__(self, space: SuperVectorSpace, terms: Mapping | None = None):
        self.space = space
        clean = {}
        for (odd, exp), v in (terms or {}).items():
            v = frac(v)
            if v:
                clean[(tuple(odd), tuple(exp))] = v
        self.terms = clean

    # constructors --------------------------------------------------------
    @classmethod
    def zero(cls, space):
        return cls(space)

    @classmethod
    def const(cls, space, c):
        return cls(space, {((), (0,) * space.p): frac(c)})

    @classmethod
    def coordinate(cls, space, name):
        if space.parity(name):
            return cls(space, {((space.index(name),), (0,) * space.p): ONE})
        exp = [0] * space.p
        exp[space.index(name)] = 1
        return cls(space, {((), tuple(exp)): ONE})

    @classmethod
    def from_poly(cls, space, poly: Poly, odd: tuple[int, ...] = ()):
        return cls(space, {(odd, k): v for k, v in poly.terms.items()})

    # inspection ----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, SuperPolynomial):
            return NotImplemented
        return self.space == other.space and self.terms == other.terms

    def __hash__(self):
        return hash((self.space, frozenset(self.terms.items())))

    def parities(self) -> set[int]:
        return {len(odd) % 2 for odd, _ in self.terms}

    def parity(self) -> int:
        """Parity of a homogeneous element (zero counts as even)."""
        ps = self.parities()
        if len(ps) > 1:
            raise PreconditionError("inhomogeneous superpolynomial has no parity")
        return ps.pop() if ps else 0

    def homogeneous_parts(self) -> dict[int, SuperPolynomial]:
        parts = {0: {}, 1: {}}
        for key, v in self.terms.items():
            parts[len(key[0]) % 2][key] = v
        return {p: SuperPolynomial(self.space, t) for p, t in parts.items() if t}

    def odd_coefficient(self, odd: tuple[int, ...]) -> Poly:
        """Polynomial multiplying the ordered odd monomial ``odd``."""
        return Poly(self.space.p, {exp: v for (o, exp), v in self.terms.items() if o == odd})

    def odd_support(self) -> set[tuple[int, ...]]:
        return {o for o, _ in self.terms}

    # arithmetic ----------------------------------------------------------
    def _check(self, other):
        if other.space != self.space:
            raise PreconditionError("superpolynomials on different spaces")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SuperPolynomial.const(self.space, other)
        self._check(other)
        acc = dict(self.terms)
        for k, v in other.terms.items():
            _add_into(acc, k, v)
        return SuperPolynomial(self.space, acc)

    __radd__ = __add__

    def __neg__(self):
        return SuperPolynomial(self.space, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = frac(other)
            return SuperPolynomial(self.space, {k: v * c for k, v in self.terms.items()})
        self._check(other)
        acc: dict = {}
        for (o1, e1), v1 in self.terms.items():
            for (o2, e2), v2 in other.terms.items():
                sign, o = merge_odd(o1, o2)
                if sign:
                    _add_into(acc, (o, tuple(a + b for a, b in zip(e1, e2))), sign * v1 * v2)
        return SuperPolynomial(self.space, acc)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __repr__(self):
        return f"SuperPolynomial({format_superpoly(self)!r})"

    def __str__(self):
        return format_superpoly(self)


def superpoly_mul(p: SuperPolynomial, q: SuperPolynomial) -> SuperPolynomial:
    """Graded-commutative product; odd generators anticommute and square to 0."""
    if p.space != q.space:
        raise PreconditionError("source mismatch")
    return p * q


def partial_derivative(name: str, p: SuperPolynomial) -> SuperPolynomial:
    """Partial derivative; odd directions use the left derivative."""
    space = p.space
    i = space.index(name)
    out: dict = {}
    if space.parity(name):
        for (odd, exp), v in p.terms.items():
            if i in odd:
                sign = -1 if odd.index(i) % 2 else 1
                _add_into(out, (tuple(j for j in odd if j != i), exp), sign * v)
    else:
        for (odd, exp), v in p.terms.items():
            if exp[i]:
                ne = list(exp)
                ne[i] -= 1
                _add_into(out, (odd, tuple(ne)), v * exp[i])
    return SuperPolynomial(space, out)


def berezin_top(p: SuperPolynomial) -> Fraction:
    """Coefficient of the top monomial xi_1 ... xi_q of a purely odd superfunction."""
    if p.space.p:
        raise PreconditionError("Berezin integral needs a purely odd source")
    top = tuple(range(p.space.q))
    return p.terms.get((top, ()), ZERO)


def berezin_fiber(p: SuperPolynomial, names: Sequence[str]) -> SuperPolynomial:
    """Integrate out the odd variables ``names`` with the measure on the right.

    Each variable is moved to the right end of the monomial before it is
    removed; the result lives on the same space (no dependence on ``names``).
    """
    space = p.space
    idx = sorted(space.index(n) for n in names)
    if any(not space.parity(n) for n in names):
        raise PreconditionError("only odd variables can be integrated")
    out: dict = {}
    for (odd, exp), v in p.terms.items():
        if not all(i in odd for i in idx):
            continue
        rest = [j for j in odd if j not in idx]
        sign = _sort_sign([odd.index(j) for j in rest + idx])
        _add_into(out, (tuple(rest), exp), sign * v)
    return SuperPolynomial(space, out)


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------


def format_coefficient(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _monomial_factors(space: SuperVectorSpace, odd, exp) -> list[str]:
    factors = []
    for i, e in enumerate(exp):
        if e == 1:
            factors.append(space.even[i])
        elif e > 1:
            factors.append(f"{space.even[i]}^{e}")
    factors.extend(space.odd[j] for j in odd)
    return factors


def _term_order(key):
    odd, exp = key
    return (len(odd) + sum(exp), odd, tuple(-e for e in exp))


def format_superpoly(p: SuperPolynomial) -> str:
    if not p.terms:
        return "0"
    pieces = []
    for key in sorted(p.terms, key=_term_order):
        c = p.terms[key]
        factors = _monomial_factors(p.space, *key)
        mag = abs(c)
        body = "*".join(factors)
        if not factors:
            text = format_coefficient(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{format_coefficient(mag)}*{body}"
        pieces.append(("-" if c < 0 else "+", text))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for s, t in pieces[1:]:
        out += f" {s} {t}"
    return out


def format_poly(space: SuperVectorSpace, poly: Poly) -> str:
    return format_superpoly(SuperPolynomial.from_poly(space, poly))


def parse_superpoly(space: SuperVectorSpace, text: str) -> SuperPolynomial:
    """Parse ``"3/2*x^2*xi1*xi2 - x + 1"``.

    Factors are joined by ``*``; odd generators are multiplied in the order
    written, so ``xi2*xi1`` parses to ``-xi1*xi2``.
    """
    text = text.strip()
    if text in ("", "0"):
        return SuperPolynomial.zero(space)
    result = SuperPolynomial.zero(space)
    tokens = re.findall(r"[+-]|[^+-]+", text)
    sign = 1
    expect_term = True
    for tok in tokens:
        tok = tok.strip()
        if not tok:
            continue
        if tok in "+-":
            if not expect_term:
                sign = 1 if tok == "+" else -1
                expect_term = True
            else:
                sign *= 1 if tok == "+" else -1
            continue
        term = SuperPolynomial.const(space, sign)
        for factor in tok.split("*"):
            factor = factor.strip()
            if not factor:
                raise PreconditionError(f"empty factor in {text!r}")
            if factor in space:
                name, power = factor, 1
            elif re.fullmatch(r"\d+(/\d+)?", factor):
                term = term * Fraction(factor)
                continue
            else:
                m = re.fullmatch(r"(.+)\^(\d+)", factor)
                if not m or m.group(1) not in space:
                    raise PreconditionError(f"unknown factor {factor!r} in {text!r}")
                name, power = m.group(1), int(m.group(2))
            coord = SuperPolynomial.coordinate(space, name)
            for _ in range(power):
                term = term * coord
        result = result + term
        sign = 1
        expect_term = False
    if expect_term:
        raise PreconditionError(f"dangling operator in {text!r}")
    return result
