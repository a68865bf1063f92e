"""Brute-force ground truth: sparse polynomials, distribution tables,
identity testing and permanents.

Everything here is deliberately simple and exponential; it exists to check
the circuit transformations, not to be fast.
"""

from __future__ import annotations

import itertools
import re
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from gmpy2 import mpq

from .circuit import (
    FOURIER,
    FOURIER_IND,
    GENERATING,
    LIKELIHOOD,
    LIKELIHOOD_PM,
    MERSENNE61,
    NETWORK,
    Builder,
    Circuit,
    Const,
    Div,
    Prod,
    Semantics,
    Sum,
    Var,
    evaluate_many,
    evaluate_mod,
    rational,
    variable_degree_bounds,
)
from .errors import NotADistribution, SemanticsMismatch, TermBlowupError

DEFAULT_MAX_TERMS = 1 << 20

# A monomial is a sorted tuple of (slot, exponent) pairs with exponent > 0.
# slot 2*(i-1) is x_i and slot 2*(i-1)+1 is ~x_i.
Monomial = tuple


def slot(index: int, bar: bool = False) -> int:
    return 2 * (index - 1) + (1 if bar else 0)


def slot_var(s: int) -> Var:
    return Var(s // 2 + 1, bool(s & 1))


def monomial(xs: Iterable[int] = (), bars: Iterable[int] = ()) -> Monomial:
    """Monomial from variable indices (repeat an index to raise its power)."""
    counts: dict[int, int] = {}
    for i in xs:
        counts[slot(i)] = counts.get(slot(i), 0) + 1
    for i in bars:
        counts[slot(i, True)] = counts.get(slot(i, True), 0) + 1
    return tuple(sorted(counts.items()))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for s, e in b:
        out[s] = out.get(s, 0) + e
    return tuple(sorted(out.items()))


def _mono_divides(a: Monomial, b: Monomial) -> bool:
    bound = dict(b)
    return all(bound.get(s, 0) >= e for s, e in a)


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    parts = []
    for s, e in m:
        name = str(slot_var(s))
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


class SparsePoly:
    """Polynomial over Q in x_1..x_n, ~x_1..~x_n as {monomial: coefficient}."""

    __slots__ = ("n", "terms")

    def __init__(self, terms: Mapping[Monomial, object] | None = None, n: int = 0):
        self.n = n
        self.terms = {m: rational(c) for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def constant(cls, value, n: int = 0) -> "SparsePoly":
        return cls({(): value}, n)

    @classmethod
    def variable(cls, index: int, bar: bool = False, n: int = 0) -> "SparsePoly":
        return cls({((slot(index, bar), 1),): 1}, max(n, index))

    def __repr__(self) -> str:
        return f"SparsePoly({self.dump().strip() or '0'!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return _raw(out, max(self.n, other.n))

    def __neg__(self) -> "SparsePoly":
        return _raw({m: -c for m, c in self.terms.items()}, self.n)

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def scale(self, k) -> "SparsePoly":
        k = rational(k)
        if k == 0:
            return _raw({}, self.n)
        return _raw({m: c * k for m, c in self.terms.items()}, self.n)

    def mul(self, other: "SparsePoly", max_terms: int = DEFAULT_MAX_TERMS,
            bound: Monomial | None = None) -> "SparsePoly":
        out: dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = _mono_mul(ma, mb)
                if bound is not None and not _mono_divides(m, bound):
                    continue
                v = out.get(m, 0) + ca * cb
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
            if len(out) > max_terms:
                raise TermBlowupError(f"expansion exceeds {max_terms} terms")
        return _raw(out, max(self.n, other.n))

    __mul__ = mul

    def coefficient(self, m: Monomial) -> Fraction:
        return self.terms.get(m, Fraction(0))

    @property
    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=-1)

    def variable_degrees(self) -> dict[Var, int]:
        out: dict[Var, int] = {}
        for m in self.terms:
            for s, e in m:
                v = slot_var(s)
                out[v] = max(out.get(v, 0), e)
        return out

    def is_multilinear(self) -> bool:
        return all(e <= 1 for m in self.terms for _, e in m)

    def is_homogeneous(self, d: int) -> bool:
        return all(sum(e for _, e in m) == d for m in self.terms)

    def homogeneous_part(self, d: int) -> "SparsePoly":
        return _raw({m: c for m, c in self.terms.items() if sum(e for _, e in m) == d}, self.n)

    def evaluate(self, x: Sequence = (), xbar: Sequence | None = None) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            term = c
            for s, e in m:
                i = s // 2
                val = rational((xbar if s & 1 else x)[i])
                term *= val ** e
            total += term
        return total

    def substitute(self, images: Mapping[int, "SparsePoly"],
                   max_terms: int = DEFAULT_MAX_TERMS) -> "SparsePoly":
        """Replace slots by polynomials (slots missing from ``images`` stay)."""
        total = _raw({}, self.n)
        powers: dict[tuple[int, int], SparsePoly] = {}
        for m, c in self.terms.items():
            term = SparsePoly.constant(c, self.n)
            for s, e in m:
                if s in images:
                    key = (s, e)
                    if key not in powers:
                        p = SparsePoly.constant(1, self.n)
                        for _ in range(e):
                            p = p.mul(images[s], max_terms)
                        powers[key] = p
                    term = term.mul(powers[key], max_terms)
                else:
                    term = term.mul(_raw({((s, e),): Fraction(1)}, self.n), max_terms)
            total = total + term
        return total

    def dump(self) -> str:
        """Canonical text: one ``<coefficient> <monomial>`` line per term."""
        keys = sorted(self.terms, key=lambda m: (sum(e for _, e in m), m))
        return "".join(f"{self.terms[m]} {mono_str(m)}\n" for m in keys)


def _raw(terms: dict, n: int) -> SparsePoly:
    p = SparsePoly.__new__(SparsePoly)
    p.n = n
    p.terms = terms
    return p


_POLY_TOKEN = re.compile(r"[ \t]*(?:(\d+(?:\.\d*)?(?:/\d+)?)|(~?x(\d+))|(\^)|([-+*])|(\n))")


def parse_poly(text: str, n: int = 0) -> SparsePoly:
    """Parse a polynomial such as ``0.08*x1*x2 + 0.16x1 - 1/2 ~x2^2``.

    Terms are products of rational constants and (possibly barred)
    variables; ``*`` between factors is optional and a line break starts a
    new term, so the output of :meth:`SparsePoly.dump` parses back.
    """
    terms: dict[Monomial, Fraction] = {}
    pos, sign = 0, 1
    coef: Fraction | None = None
    m: Monomial = ()
    text = text.strip()

    def flush():
        nonlocal coef, m, sign
        if coef is not None or m:
            value = sign * (Fraction(1) if coef is None else coef)
            terms[m] = terms.get(m, 0) + value
        coef, m, sign = None, (), 1

    while pos < len(text):
        tok = _POLY_TOKEN.match(text, pos)
        if tok is None or tok.end() == pos:
            raise ValueError(f"cannot parse polynomial near {text[pos:pos + 12]!r}")
        pos = tok.end()
        number, var, index, caret, op, newline = tok.groups()
        if number is not None:
            coef = (coef or 1) * rational(number)
        elif var is not None:
            factor = ((slot(int(index), var.startswith("~")), 1),)
            exp = re.match(r"\s*\^\s*(\d+)", text[pos:])
            if exp:
                factor = ((factor[0][0], int(exp.group(1))),)
                pos += exp.end()
            m = _mono_mul(m, factor)
            n = max(n, int(index))
        elif caret is not None:
            raise ValueError("exponent without a variable")
        elif newline is not None or op in ("+", "-"):
            if coef is not None or m:
                flush()
            if op == "-":
                sign = -sign
    flush()
    return SparsePoly({k: v for k, v in terms.items() if v != 0}, n)


# ---------------------------------------------------------------------------
# Expansion
#
# Internally monomials are packed into one integer: slot s occupies bits
# [s*w, (s+1)*w) with w wide enough for the circuit's syntactic degree bound
# plus a guard bit, so multiplying monomials is integer addition and a
# divisibility test is one subtraction. Coefficients are gmpy2 rationals.


class _Packing:
    def __init__(self, c: Circuit, bound: Monomial | None = None):
        degrees = variable_degree_bounds(c) if not c.has_division else {}
        top = max(degrees.values(), default=1)
        self.width = max(top.bit_length() + 1, 2)
        self.slots = 2 * max(c.n, 1)
        self.field = (1 << (self.width - 1)) - 1
        self.guard = sum(1 << (s * self.width + self.width - 1) for s in range(self.slots))
        self.bound = None
        if bound is not None:
            packed = 0
            for s, e in bound:
                if s >= self.slots:
                    continue
                packed |= min(e, self.field) << (s * self.width)
            self.bound = packed | self.guard

    def var(self, v: Var) -> int:
        return 1 << (slot(v.index, v.bar) * self.width)

    def fits(self, m: int) -> bool:
        return (self.bound - m) & self.guard == self.guard

    def exponent(self, m: int, s: int) -> int:
        return (m >> (s * self.width)) & self.field

    def unpack(self, m: int) -> Monomial:
        out = []
        s = 0
        mask = (1 << self.width) - 1
        while m:
            e = m & mask
            if e:
                out.append((s, e))
            m >>= self.width
            s += 1
        return tuple(out)


def _packed_mul(a: dict, b: dict, pk: _Packing, max_terms: int) -> dict:
    if len(a) < len(b):
        a, b = b, a
    out: dict = {}
    get = out.get
    bounded = pk.bound is not None
    for mb, cb in b.items():
        for ma, ca in a.items():
            m = ma + mb
            if bounded and (pk.bound - m) & pk.guard != pk.guard:
                continue
            v = get(m, 0) + ca * cb
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        if len(out) > max_terms:
            raise TermBlowupError(f"expansion exceeds {max_terms} terms")
    return out


def _expand_packed(c: Circuit, pk: _Packing, max_terms: int, root_factors: bool = False):
    """Packed expansion of the root, or with ``root_factors`` the list of
    expansions of the root's children (the root product is not formed)."""
    if c.has_division:
        raise SemanticsMismatch("expand needs a division-free circuit")
    last_use = _last_use(c)
    if root_factors:
        for ch in _children(c.nodes[c.root]):
            last_use[ch] = len(c.nodes)
    polys: list = [None] * len(c.nodes)
    for k, v in enumerate(c.nodes):
        if root_factors and k == c.root:
            return [polys[ch] for ch in v.children]
        t = type(v)
        if t is Const:
            p = {0: mpq(v.value.numerator, v.value.denominator)} if v.value else {}
        elif t is Var:
            m = pk.var(v)
            p = {m: mpq(1)} if pk.bound is None or pk.fits(m) else {}
        elif t is Sum:
            p = {}
            get = p.get
            for w, ch in v.children:
                wq = mpq(w.numerator, w.denominator)
                for m, coef in polys[ch].items():
                    val = get(m, 0) + wq * coef
                    if val:
                        p[m] = val
                    else:
                        p.pop(m, None)
            if len(p) > max_terms:
                raise TermBlowupError(f"expansion exceeds {max_terms} terms")
        else:
            p = polys[v.children[0]]
            for ch in v.children[1:]:
                p = _packed_mul(p, polys[ch], pk, max_terms)
        polys[k] = p
        for ch in set(_children(v)):
            if last_use[ch] == k and ch != c.root:
                polys[ch] = None
    return polys[c.root]


def _to_sparse(packed: dict, pk: _Packing, n: int) -> SparsePoly:
    return _raw({pk.unpack(m): Fraction(int(q.numerator), int(q.denominator))
                 for m, q in packed.items()}, n)


def expand(c: Circuit, max_terms: int = DEFAULT_MAX_TERMS,
           bound: Monomial | None = None) -> SparsePoly:
    """Exact polynomial computed by a division-free circuit.

    With ``bound`` the expansion is taken modulo every monomial that does not
    divide ``bound`` (a ring homomorphism, so coefficients of divisors of
    ``bound`` are exact).
    """
    pk = _Packing(c, bound)
    return _to_sparse(_expand_packed(c, pk, max_terms), pk, c.n)


def _children(v) -> tuple:
    t = type(v)
    if t is Sum:
        return tuple(ch for _, ch in v.children)
    if t is Prod:
        return v.children
    if t is Div:
        return (v.num, v.den)
    return ()


def _last_use(c: Circuit) -> list[int]:
    last = list(range(len(c.nodes)))
    for k, v in enumerate(c.nodes):
        for ch in _children(v):
            last[ch] = k
    return last


def coefficient(c: Circuit, m: Monomial, max_terms: int = DEFAULT_MAX_TERMS) -> Fraction:
    """Coefficient of one monomial, via expansion truncated to its divisors.

    When the root is a product, factors are multiplied in a greedy order and
    partial products that can no longer reach ``m`` are discarded.
    """
    pk = _Packing(c, m)
    root = c.nodes[c.root]
    if type(root) is not Prod:
        return _to_sparse(_expand_packed(c, pk, max_terms), pk, c.n).coefficient(m)
    factors = _expand_packed(c, pk, max_terms, root_factors=True)
    target = {s: min(e, pk.field) for s, e in m if s < pk.slots}
    if any(e > pk.field for _, e in m) or any(s >= pk.slots for s, _ in m):
        return Fraction(0)
    supports = []
    for f in factors:
        used = set()
        for mono in f:
            used.update(s for s, _ in pk.unpack(mono))
        supports.append(used)
    remaining = list(range(len(factors)))
    acc: dict = {0: mpq(1)}
    touched: set[int] = set()
    while remaining:
        def cost(j):
            others = set().union(*(supports[r] for r in remaining if r != j))
            fresh = len(supports[j] - touched)
            closing = len((touched | supports[j]) - others)
            return (fresh - closing, j)
        j = min(remaining, key=cost)
        remaining.remove(j)
        acc = _packed_mul(acc, factors[j], pk, max_terms)
        touched |= supports[j]
        alive = set().union(*(supports[r] for r in remaining)) if remaining else set()
        closed = [s for s in target if s not in alive]
        if closed:
            acc = {mono: v for mono, v in acc.items()
                   if all(pk.exponent(mono, s) == target[s] for s in closed)}
        if not acc:
            return Fraction(0)
    packed = 0
    for s, e in target.items():
        packed |= e << (s * pk.width)
    q = acc.get(packed, 0)
    return Fraction(int(q.numerator), int(q.denominator)) if q else Fraction(0)


# ---------------------------------------------------------------------------
# Distribution tables


def subsets(n: int) -> Iterator[frozenset[int]]:
    """All subsets of [n] in bitmask order."""
    for mask in range(1 << n):
        yield frozenset(i + 1 for i in range(n) if mask >> i & 1)


@dataclass(frozen=True)
class DistTable:
    """Explicit mass function: Pr(x_S) for every S ⊆ [n]."""

    n: int
    probs: Mapping[frozenset[int], Fraction]

    def __post_init__(self):
        full = {S: rational(self.probs.get(S, 0)) for S in subsets(self.n)}
        extra = set(self.probs) - set(full)
        if extra:
            raise ValueError(f"subsets outside [{self.n}]: {sorted(map(sorted, extra))}")
        object.__setattr__(self, "probs", full)

    def __getitem__(self, S) -> Fraction:
        return self.probs[frozenset(S)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DistTable):
            return NotImplemented
        return self.n == other.n and self.probs == other.probs

    def __hash__(self):
        return hash((self.n, frozenset(self.probs.items())))

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def validate(self) -> None:
        for S, p in self.probs.items():
            if p < 0:
                raise NotADistribution(f"negative mass {p} at {sorted(S)}", witness=S)
        total = self.total()
        if total != 1:
            raise NotADistribution(f"masses sum to {total}, not 1", witness=None)

    def is_distribution(self) -> bool:
        try:
            self.validate()
        except NotADistribution:
            return False
        return True

    def marginal(self, ones: Iterable[int] = (), zeros: Iterable[int] = ()) -> Fraction:
        ones, zeros = set(ones), set(zeros)
        return sum((p for S, p in self.probs.items() if ones <= S and not zeros & S),
                   Fraction(0))

    @classmethod
    def random(cls, n: int, rng: random.Random, zero_prob: float = 0.15,
               max_weight: int = 20) -> "DistTable":
        weights = {}
        for S in subsets(n):
            weights[S] = 0 if rng.random() < zero_prob else rng.randint(1, max_weight)
        if not any(weights.values()):
            weights[frozenset()] = 1
        total = sum(weights.values())
        return cls(n, {S: Fraction(w, total) for S, w in weights.items()})

    @classmethod
    def point_mass(cls, n: int, S: Iterable[int]) -> "DistTable":
        return cls(n, {frozenset(S): Fraction(1)})

    @classmethod
    def uniform(cls, n: int) -> "DistTable":
        return cls(n, {S: Fraction(1, 1 << n) for S in subsets(n)})


def _parity(S: frozenset, T: frozenset) -> int:
    return -1 if len(S & T) % 2 else 1


def _mask(S: Iterable[int]) -> int:
    return sum(1 << (i - 1) for i in S)


def _as_list(n: int, values: Mapping[frozenset, Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (1 << n)
    for S, v in values.items():
        out[_mask(S)] = Fraction(v)
    return out


def _as_dict(n: int, values: list[Fraction]) -> dict[frozenset[int], Fraction]:
    return {S: values[_mask(S)] for S in subsets(n)}


def _walsh(values: list[Fraction], n: int) -> list[Fraction]:
    """In-place fast Walsh-Hadamard transform: out[S] = Σ_T (-1)^|S∩T| in[T]."""
    for i in range(n):
        bit = 1 << i
        for m in range(1 << n):
            if m & bit:
                a, b = values[m ^ bit], values[m]
                values[m ^ bit], values[m] = a + b, a - b
    return values


def _subset_sums(values: list[Fraction], n: int, sign: int = 1) -> list[Fraction]:
    """out[T] = Σ_{S ⊆ T} sign^|T - S| in[S] (zeta, or Möbius with sign -1)."""
    for i in range(n):
        bit = 1 << i
        for m in range(1 << n):
            if m & bit:
                values[m] += sign * values[m ^ bit]
    return values


def _superset_sums(values: list[Fraction], n: int) -> list[Fraction]:
    """out[T] = Σ_{S ⊇ T} in[S]."""
    for i in range(n):
        bit = 1 << i
        for m in range(1 << n):
            if not m & bit:
                values[m] += values[m | bit]
    return values


def spectrum(d: DistTable) -> dict[frozenset[int], Fraction]:
    """Fourier coefficients p̂(v_S) = 2^-n Σ_v p(v) (-1)^<v, v_S>."""
    scale = Fraction(1, 1 << d.n)
    values = _walsh(_as_list(d.n, d.probs), d.n)
    return _as_dict(d.n, [v * scale for v in values])


def from_spectrum(n: int, coeffs: Mapping[frozenset, Fraction]) -> DistTable:
    """Invert :func:`spectrum`: p(v_T) = Σ_S p̂(v_S) (-1)^|S∩T|."""
    return DistTable(n, _as_dict(n, _walsh(_as_list(n, coeffs), n)))


def _multilinear(n: int, coefs: list[Fraction]) -> SparsePoly:
    terms = {}
    for S in subsets(n):
        c = coefs[_mask(S)]
        if c:
            terms[monomial(sorted(S))] = c
    return SparsePoly(terms, n)


def fourier_of(d: DistTable) -> SparsePoly:
    """p̂(x) = 2^-n Σ_S p(v_S) Π_{i∈S} (1 - 2 x_i), expanded.

    The x_T coefficient is 2^-n (-2)^|T| Σ_{S ⊇ T} p(v_S).
    """
    n = d.n
    sums = _superset_sums(_as_list(n, d.probs), n)
    scale = Fraction(1, 1 << n)
    return _multilinear(n, [scale * (-2) ** bin(m).count("1") * v for m, v in enumerate(sums)])


def tagged_poly(d: DistTable, semantics: Semantics) -> SparsePoly:
    """The polynomial of ``d`` under one of the six distribution semantics.

    Coefficients come from subset transforms of the table rather than from
    multiplying out the defining products, e.g. the likelihood polynomial
    Σ_S p(S) Π_{i∈S} x_i Π_{i∉S} (1 - x_i) has x_T coefficient
    Σ_{S ⊆ T} (-1)^|T - S| p(S).
    """
    n = d.n
    if semantics == NETWORK:
        return SparsePoly({monomial(sorted(S), sorted(set(range(1, n + 1)) - S)): p
                           for S, p in d.probs.items()}, n)
    if semantics == GENERATING:
        return SparsePoly({monomial(sorted(S)): p for S, p in d.probs.items()}, n)
    if semantics == LIKELIHOOD:
        return _multilinear(n, _subset_sums(_as_list(n, d.probs), n, sign=-1))
    if semantics == LIKELIHOOD_PM:
        # x_i -> (1 - x_i)/2 in the likelihood polynomial: the x_U coefficient
        # is (-1)^|U| Σ_{T ⊇ U} 2^-|T| c_T.
        c = _subset_sums(_as_list(n, d.probs), n, sign=-1)
        c = [v / (1 << bin(m).count("1")) for m, v in enumerate(c)]
        c = _superset_sums(c, n)
        return _multilinear(n, [(-1) ** bin(m).count("1") * v for m, v in enumerate(c)])
    if semantics == FOURIER:
        return fourier_of(d)
    if semantics == FOURIER_IND:
        coeffs = spectrum(d)
        return SparsePoly({monomial(sorted(S), sorted(set(range(1, n + 1)) - S)): c
                           for S, c in coeffs.items()}, n)
    raise SemanticsMismatch(f"{semantics} is not a distribution semantics")


def to_circuit(p: SparsePoly, semantics: Semantics, n: int | None = None) -> Circuit:
    """Flat sum-of-monomials circuit for ``p``."""
    n = p.n if n is None else n
    b = Builder()
    terms = []
    for m in sorted(p.terms, key=lambda m: (sum(e for _, e in m), m)):
        leaves = []
        for s, e in m:
            v = slot_var(s)
            leaves.extend([b.var(v.index, v.bar)] * e)
        if not leaves:
            node = b.const(1)
        elif len(leaves) == 1:
            node = leaves[0]
        else:
            node = b.mul(leaves)
        terms.append((p.terms[m], node))
    root = b.sum(terms) if terms else b.const(0)
    return b.build(root, n, semantics)


def encode(d: DistTable, semantics: Semantics) -> Circuit:
    """Flat circuit for the tagged polynomial of ``d``."""
    return to_circuit(tagged_poly(d, semantics), semantics, d.n)


def _indicator_points(n: int):
    xs, xbars, keys = [], [], []
    for S in subsets(n):
        xs.append([1 if i in S else 0 for i in range(1, n + 1)])
        xbars.append([0 if i in S else 1 for i in range(1, n + 1)])
        keys.append(S)
    return xs, xbars, keys


def _read_table(c: Circuit) -> DistTable:
    n, tag = c.n, c.semantics
    xs, xbars, keys = _indicator_points(n)
    if tag == NETWORK or tag == FOURIER_IND:
        vals = evaluate_many(c, xs, xbars)
        values = dict(zip(keys, vals))
        if tag == NETWORK:
            return DistTable(n, values)
        return from_spectrum(n, values)
    if tag == LIKELIHOOD:
        return DistTable(n, dict(zip(keys, evaluate_many(c, xs))))
    if tag == LIKELIHOOD_PM:
        pm = [[1 - 2 * v for v in x] for x in xs]
        return DistTable(n, dict(zip(keys, evaluate_many(c, pm))))
    if tag == FOURIER:
        return from_spectrum(n, dict(zip(keys, evaluate_many(c, xs))))
    if tag == GENERATING:
        at = dict(zip(keys, evaluate_many(c, xs)))
        # Möbius inversion of g(1_T) = Σ_{S ⊆ T} Pr(x_S)
        probs = {}
        for S in keys:
            total = Fraction(0)
            members = sorted(S)
            for r in range(len(members) + 1):
                sign = -1 if (len(members) - r) % 2 else 1
                for T in itertools.combinations(members, r):
                    total += sign * at[frozenset(T)]
            probs[S] = total
        return DistTable(n, probs)
    raise SemanticsMismatch(f"{tag} is not a distribution semantics")


def _read_table_expanded(c: Circuit, max_terms: int) -> tuple[DistTable, SparsePoly]:
    n, tag = c.n, c.semantics
    p = expand(c, max_terms)
    everything = set(range(1, n + 1))
    if tag == NETWORK:
        return DistTable(n, {S: p.coefficient(monomial(sorted(S), sorted(everything - S)))
                             for S in subsets(n)}), p
    if tag == FOURIER_IND:
        coeffs = {S: p.coefficient(monomial(sorted(S), sorted(everything - S)))
                for S in subsets(n)}
        return from_spectrum(n, coeffs), p
    if tag == GENERATING:
        return DistTable(n, {S: p.coefficient(monomial(sorted(S))) for S in subsets(n)}), p
    if tag == LIKELIHOOD:
        return DistTable(n, {S: p.evaluate([int(i in S) for i in range(1, n + 1)])
                             for S in subsets(n)}), p
    if tag == LIKELIHOOD_PM:
        return DistTable(n, {S: p.evaluate([1 - 2 * int(i in S) for i in range(1, n + 1)])
                             for S in subsets(n)}), p
    if tag == FOURIER:
        coeffs = {S: p.evaluate([int(i in S) for i in range(1, n + 1)]) for S in subsets(n)}
        return from_spectrum(n, coeffs), p
    raise SemanticsMismatch(f"{tag} is not a distribution semantics")


def dist_from(c: Circuit, method: str = "evaluate", strict: bool = True,
              max_terms: int = DEFAULT_MAX_TERMS, seed: int = 0) -> DistTable:
    """Recover the distribution a tagged circuit encodes.

    ``method="expand"`` reads the table off the exact expansion and compares
    polynomials exactly. ``method="evaluate"`` reads it from 2^n exact
    evaluations and confirms the circuit equals the tagged polynomial of that
    table with the randomized identity test (8 points mod 2^61-1).
    """
    if c.semantics not in (LIKELIHOOD, NETWORK, GENERATING, LIKELIHOOD_PM, FOURIER, FOURIER_IND):
        raise SemanticsMismatch(f"{c.semantics} circuits do not encode a binary distribution")
    if c.has_division:
        raise SemanticsMismatch("dist_from needs a division-free circuit")
    if method == "expand":
        table, p = _read_table_expanded(c, max_terms)
        if p != tagged_poly(table, c.semantics):
            raise SemanticsMismatch(f"circuit is not a {c.semantics} polynomial")
    elif method == "evaluate":
        table = _read_table(c)
        same, witness = identical(c, encode(table, c.semantics), mode="probabilistic",
                                  seed=seed)
        if not same:
            raise SemanticsMismatch(f"circuit is not a {c.semantics} polynomial "
                                    f"(differs at residue point {witness})")
    else:
        raise ValueError(f"unknown method {method!r}")
    if strict:
        table.validate()
    return table


# ---------------------------------------------------------------------------
# Identity testing


def _witness(diff: SparsePoly, n: int, cap: int = 200_000):
    """A small integer point where ``diff`` is nonzero."""
    used = sorted({s for m in diff.terms for s, _ in m})
    degree = max((e for m in diff.terms for _, e in m), default=0)
    for count, values in enumerate(itertools.product(range(degree + 1), repeat=len(used))):
        if count >= cap:
            break
        x = [Fraction(0)] * n
        xb = [Fraction(0)] * n
        for s, val in zip(used, values):
            (xb if s & 1 else x)[s // 2] = Fraction(val)
        if diff.evaluate(x, xb) != 0:
            return x, xb
    return None


def identical(a: Circuit, b: Circuit, mode: str = "exact", trials: int = 8,
              seed: int | None = 0, prime: int = MERSENNE61,
              max_terms: int = DEFAULT_MAX_TERMS):
    """Decide whether two division-free circuits compute the same polynomial.

    Returns ``(equal, witness)``. In exact mode the witness is a small integer
    point ``(x, xbar)`` where the polynomials differ; in probabilistic mode it
    is the residue point mod ``prime`` that separated them.
    """
    if a.has_division or b.has_division:
        raise SemanticsMismatch("identity testing needs division-free circuits")
    n = max(a.n, b.n)
    if mode == "exact":
        pa, pb = expand(a, max_terms), expand(b, max_terms)
        if pa == pb:
            return True, None
        return False, _witness(pa - pb, n)
    if mode == "probabilistic":
        rng = random.Random(seed)
        for _ in range(trials):
            x = [rng.randrange(prime) for _ in range(n)]
            xb = [rng.randrange(prime) for _ in range(n)]
            va = evaluate_mod(a, x[:a.n] + x[a.n:], xb, prime)
            vb = evaluate_mod(b, x[:b.n] + x[b.n:], xb, prime)
            if va != vb:
                return False, (x, xb)
        return True, None
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Permanents


def as_matrix(M) -> tuple[tuple[int, ...], ...]:
    rows = tuple(tuple(int(v) for v in row) for row in M)
    if any(len(r) != len(rows) for r in rows):
        raise ValueError("matrix must be square")
    return rows


def permanent(M, method: str = "auto") -> int:
    """Exact permanent of a square integer matrix.

    ``enumerate`` sums over permutations in lexicographic order (n <= 12),
    ``ryser`` uses Ryser's formula with Gray-code subset order (n <= 20) and
    ``frontier`` is a column-by-column dynamic program over used rows that
    stays small on column-sparse matrices of any order.
    """
    A = as_matrix(M)
    n = len(A)
    if n == 0:
        return 1
    if method == "auto":
        method = "enumerate" if n <= 8 else "frontier"
    if method == "enumerate":
        return _perm_enumerate(A)
    if method == "ryser":
        return _perm_ryser(A)
    if method == "frontier":
        return _perm_frontier(A)
    raise ValueError(f"unknown method {method!r}")


def contributing_permutations(M) -> list[tuple[int, ...]]:
    """Permutations σ (0-based, lexicographic) with Π M[i][σ(i)] ≠ 0."""
    A = as_matrix(M)
    n = len(A)
    out: list[tuple[int, ...]] = []
    nonzero = [[j for j in range(n) if A[i][j]] for i in range(n)]

    def walk(i: int, used: int, prefix: list[int]):
        if i == n:
            out.append(tuple(prefix))
            return
        for j in nonzero[i]:
            if not used >> j & 1:
                prefix.append(j)
                walk(i + 1, used | 1 << j, prefix)
                prefix.pop()

    walk(0, 0, [])
    return out


def _perm_enumerate(A) -> int:
    total = 0
    for sigma in contributing_permutations(A):
        term = 1
        for i, j in enumerate(sigma):
            term *= A[i][j]
        total += term
    return total


def _perm_ryser(A) -> int:
    n = len(A)
    row_sums = [0] * n
    total = 0
    chosen = 0
    prev_gray = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        j = (gray ^ prev_gray).bit_length() - 1
        sign = 1 if gray >> j & 1 else -1
        chosen += sign
        for i in range(n):
            row_sums[i] += sign * A[i][j]
        prod = 1
        for s in row_sums:
            prod *= s
            if not prod:
                break
        total += -prod if chosen % 2 else prod
        prev_gray = gray
    return total * (-1 if n % 2 else 1)


def _perm_frontier(A) -> int:
    n = len(A)
    col_rows = [[i for i in range(n) if A[i][j]] for j in range(n)]
    row_cols = [{j for j in range(n) if A[i][j]} for i in range(n)]
    if any(not rc for rc in row_cols) or any(not cr for cr in col_rows):
        return 0
    pending = [len(rc) for rc in row_cols]
    remaining = set(range(n))
    active: set[int] = set()
    states: dict[int, int] = {0: 1}
    while remaining:
        def cost(j):
            fresh = sum(1 for i in col_rows[j] if i not in active)
            closing = sum(1 for i in col_rows[j] if pending[i] == 1)
            return (fresh - closing, j)
        j = min(remaining, key=cost)
        remaining.remove(j)
        nxt: dict[int, int] = {}
        for mask, count in states.items():
            for i in col_rows[j]:
                if not mask >> i & 1:
                    key = mask | 1 << i
                    nxt[key] = nxt.get(key, 0) + count * A[i][j]
        active.update(col_rows[j])
        for i in col_rows[j]:
            pending[i] -= 1
        retired = [i for i in col_rows[j] if pending[i] == 0]
        if retired:
            need = 0
            for i in retired:
                need |= 1 << i
                active.discard(i)
            nxt = {mask & ~need: v for mask, v in nxt.items() if mask & need == need and v}
        states = nxt
        if not states:
            return 0
    return states.get(0, 0)
