"""Arithmetic-circuit IR: node types, construction, validation and evaluation.

A :class:`Circuit` is an immutable DAG stored as a topologically ordered node
table. Children always precede their parents, so every analysis is a single
forward pass. Circuits are normally produced through a :class:`Builder`, which
hash-conses identical node bodies and renumbers the reachable part of the table
into canonical (depth-first post-order) form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from gmpy2 import mpq

from .errors import (
    CircuitError,
    CycleError,
    DanglingChildError,
    DivideByZero,
    EmptyChildrenError,
    NonInvertibleWeight,
    PolarityError,
)

MERSENNE61 = (1 << 61) - 1


def rational(value) -> Fraction:
    """Coerce ``value`` to an exact Fraction.

    Strings may be integers, ``p/q`` or decimal literals; ``"0.08"`` parses
    to ``2/25`` exactly. Floats are rejected because they are not exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a string or Fraction")
    if type(value).__name__ == "mpq":
        return Fraction(int(value.numerator), int(value.denominator))
    return Fraction(value)


# ---------------------------------------------------------------------------
# Semantics tags


@dataclass(frozen=True)
class Semantics:
    name: str
    k: int | None = None

    def __str__(self) -> str:
        if self.k is not None:
            return f"{self.name} k={self.k}"
        return self.name

    @property
    def is_distribution(self) -> bool:
        return self in DISTRIBUTION_TAGS

    @property
    def allows_bar(self) -> bool:
        return self in (NETWORK, FOURIER_IND, RAW)


LIKELIHOOD = Semantics("likelihood")
NETWORK = Semantics("network")
GENERATING = Semantics("generating")
LIKELIHOOD_PM = Semantics("likelihood_pm")
FOURIER = Semantics("fourier")
FOURIER_IND = Semantics("fourier_ind")
RAW = Semantics("raw")

DISTRIBUTION_TAGS = (LIKELIHOOD, NETWORK, GENERATING, LIKELIHOOD_PM, FOURIER, FOURIER_IND)


def categorical_generating(k: int) -> Semantics:
    if k < 2:
        raise ValueError("categorical generating circuits need k >= 2")
    return Semantics("categorical_generating", k)


def parse_semantics(text: str) -> Semantics:
    parts = text.split()
    if not parts:
        raise ValueError("empty semantics tag")
    if parts[0] == "categorical_generating":
        if len(parts) != 2 or not parts[1].startswith("k="):
            raise ValueError("categorical_generating needs k=<int>")
        return categorical_generating(int(parts[1][2:]))
    for tag in DISTRIBUTION_TAGS + (RAW,):
        if tag.name == parts[0] and len(parts) == 1:
            return tag
    raise ValueError(f"unknown semantics {text!r}")


# ---------------------------------------------------------------------------
# Nodes


@dataclass(frozen=True, slots=True)
class Const:
    value: Fraction


@dataclass(frozen=True, slots=True)
class Var:
    index: int
    bar: bool = False

    def __str__(self) -> str:
        return f"{'~' if self.bar else ''}x{self.index}"


@dataclass(frozen=True, slots=True)
class Sum:
    children: tuple[tuple[Fraction, int], ...]


@dataclass(frozen=True, slots=True)
class Prod:
    children: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class Div:
    num: int
    den: int


Node = Const | Var | Sum | Prod | Div


def child_ids(node: Node) -> tuple[int, ...]:
    t = type(node)
    if t is Sum:
        return tuple(c for _, c in node.children)
    if t is Prod:
        return node.children
    if t is Div:
        return (node.num, node.den)
    return ()


def _relabel(node: Node, remap) -> Node:
    t = type(node)
    if t is Sum:
        return Sum(tuple((w, remap[c]) for w, c in node.children))
    if t is Prod:
        return Prod(tuple(remap[c] for c in node.children))
    if t is Div:
        return Div(remap[node.num], remap[node.den])
    return node


# ---------------------------------------------------------------------------
# Circuit


class Circuit:
    """Validated, immutable arithmetic circuit.

    Use :func:`build` or :class:`Builder` rather than calling the constructor
    directly; the constructor trusts its input.
    """

    __slots__ = ("n", "nodes", "root", "semantics", "divisions_allowed", "_cache")

    def __init__(self, nodes: tuple, root: int, n: int, semantics: Semantics,
                 divisions_allowed: bool):
        self.nodes = nodes
        self.root = root
        self.n = n
        self.semantics = semantics
        self.divisions_allowed = divisions_allowed
        self._cache: dict = {}

    def __repr__(self) -> str:
        return (f"Circuit(n={self.n}, semantics={self.semantics}, "
                f"nodes={len(self.nodes)}, size={self.size})")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def size(self) -> int:
        """Number of edges."""
        if "size" not in self._cache:
            self._cache["size"] = sum(len(child_ids(v)) for v in self.nodes)
        return self._cache["size"]

    @property
    def has_division(self) -> bool:
        return any(type(v) is Div for v in self.nodes)

    @property
    def has_bar(self) -> bool:
        return any(type(v) is Var and v.bar for v in self.nodes)

    def leaves(self) -> list[int]:
        return [i for i, v in enumerate(self.nodes) if type(v) is Var]

    def with_semantics(self, semantics: Semantics) -> "Circuit":
        """Same DAG under a different tag (polarity rules re-checked)."""
        if not semantics.allows_bar:
            bad = next((v for v in self.nodes if type(v) is Var and v.bar), None)
            if bad is not None:
                raise PolarityError(f"{semantics} circuits cannot use {bad}")
        out = Circuit(self.nodes, self.root, self.n, semantics, self.divisions_allowed)
        out._cache = self._cache
        return out

    def subcircuit(self, node_id: int, semantics: Semantics | None = None) -> "Circuit":
        return build(self.nodes, node_id, self.n, semantics or self.semantics,
                     divisions_allowed=self.divisions_allowed)

    def _compiled(self):
        prog = self._cache.get("prog")
        if prog is None:
            prog = []
            for v in self.nodes:
                t = type(v)
                if t is Const:
                    prog.append((0, mpq(v.value.numerator, v.value.denominator), None))
                elif t is Var:
                    prog.append((1, v.index - 1, v.bar))
                elif t is Sum:
                    prog.append((2, tuple((mpq(w.numerator, w.denominator), c)
                                          for w, c in v.children), None))
                elif t is Prod:
                    prog.append((3, v.children, None))
                else:
                    prog.append((4, v.num, v.den))
            self._cache["prog"] = prog
        return prog


def build(nodes: Sequence[Node], root: int, n: int, semantics: Semantics = RAW,
          divisions_allowed: bool | None = None, dedupe: bool = True) -> Circuit:
    """Validate a node table and return the canonical circuit rooted at ``root``.

    Nodes unreachable from ``root`` are dropped. If ``divisions_allowed`` is
    None it is inferred from the presence of division nodes.
    """
    count = len(nodes)
    if not 0 <= root < count:
        raise DanglingChildError(f"root n{root} out of range")
    for i, v in enumerate(nodes):
        t = type(v)
        if t not in (Const, Var, Sum, Prod, Div):
            raise CircuitError(f"n{i}: unknown node type {t.__name__}")
        if t in (Sum, Prod) and not v.children:
            raise EmptyChildrenError(f"n{i}: {t.__name__.lower()} node without children")
        for c in child_ids(v):
            if not isinstance(c, int) or c < 0 or c >= count:
                raise DanglingChildError(f"n{i}: child n{c} does not exist")
            if c >= i:
                raise CycleError(f"n{i}: child n{c} does not precede its parent")
        if t is Var and not 1 <= v.index <= n:
            raise CircuitError(f"n{i}: variable x{v.index} outside 1..{n}")

    b = Builder(dedupe=dedupe)
    remap: dict[int, int] = {}
    for i in _reachable_postorder(nodes, root):
        v = nodes[i]
        t = type(v)
        if t is Const:
            remap[i] = b._add(Const(rational(v.value)))
        elif t is Sum:
            remap[i] = b._add(Sum(tuple((rational(w), remap[c]) for w, c in v.children)))
        else:
            remap[i] = b._add(_relabel(v, remap))
    return b.build(remap[root], n, semantics, divisions_allowed)


def _reachable_postorder(nodes: Sequence[Node], root: int) -> list[int]:
    order: list[int] = []
    seen: set[int] = set()
    stack = [(root, False)]
    while stack:
        i, expanded = stack.pop()
        if expanded:
            order.append(i)
            continue
        if i in seen:
            continue
        seen.add(i)
        stack.append((i, True))
        for c in reversed(child_ids(nodes[i])):
            if c not in seen:
                stack.append((c, False))
    return order


class Builder:
    """Append-only node table with optional hash-consing.

    The ``lin`` and ``prod`` helpers perform local constant folding and are
    used by the transformation pipelines; ``sum`` and ``mul`` add nodes
    verbatim.
    """

    def __init__(self, dedupe: bool = True):
        self.nodes: list[Node] = []
        self.dedupe = dedupe
        self._index: dict[Node, int] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def _add(self, node: Node) -> int:
        if self.dedupe:
            found = self._index.get(node)
            if found is not None:
                return found
            self._index[node] = len(self.nodes)
        self.nodes.append(node)
        return len(self.nodes) - 1

    def const(self, value) -> int:
        return self._add(Const(rational(value)))

    def var(self, index: int, bar: bool = False) -> int:
        return self._add(Var(index, bar))

    def sum(self, terms: Iterable[tuple]) -> int:
        terms = tuple((rational(w), c) for w, c in terms)
        if not terms:
            raise EmptyChildrenError("sum node without children")
        return self._add(Sum(terms))

    def mul(self, children: Iterable[int]) -> int:
        children = tuple(children)
        if not children:
            raise EmptyChildrenError("product node without children")
        return self._add(Prod(children))

    def div(self, num: int, den: int) -> int:
        return self._add(Div(num, den))

    # -- folding constructors ------------------------------------------------

    def const_value(self, node_id: int) -> Fraction | None:
        v = self.nodes[node_id]
        return v.value if type(v) is Const else None

    def lin(self, terms: Iterable[tuple]) -> int:
        """Weighted sum with zero terms dropped and constants merged."""
        out: list[tuple[Fraction, int]] = []
        constant = Fraction(0)
        for w, c in terms:
            w = rational(w)
            if w == 0:
                continue
            k = self.const_value(c)
            if k is not None:
                constant += w * k
            else:
                out.append((w, c))
        if constant != 0:
            out.append((Fraction(1), self.const(constant)))
        if not out:
            return self.const(0)
        if len(out) == 1 and out[0][0] == 1:
            return out[0][1]
        return self.sum(out)

    def prod(self, children: Iterable[int]) -> int:
        """Product with constants folded into a single leading factor."""
        scale = Fraction(1)
        rest: list[int] = []
        for c in children:
            k = self.const_value(c)
            if k is None:
                rest.append(c)
            else:
                scale *= k
        if scale == 0:
            return self.const(0)
        if not rest:
            return self.const(scale)
        core = rest[0] if len(rest) == 1 else self.mul(rest)
        if scale == 1:
            return core
        return self.sum([(scale, core)])

    def scaled(self, weight, node_id: int) -> int:
        return self.lin([(weight, node_id)])

    def power(self, node_id: int, exponent: int, cache: dict | None = None) -> int:
        """``node ** exponent`` by repeated squaring (hash-consed)."""
        if exponent == 0:
            return self.const(1)
        result = None
        base = node_id
        while exponent:
            if exponent & 1:
                result = base if result is None else self.prod([result, base])
            exponent >>= 1
            if exponent:
                base = self.prod([base, base])
        return result

    # -- import / export -----------------------------------------------------

    def import_circuit(self, c: Circuit,
                       leaf_map: Callable[[Node, "Builder"], int | None] | None = None) -> list[int]:
        """Copy ``c`` into this builder; returns new ids indexed by old id.

        ``leaf_map`` may return a replacement id for a leaf (or None to copy).
        """
        new: list[int] = []
        for v in c.nodes:
            t = type(v)
            if t is Const or t is Var:
                rep = leaf_map(v, self) if leaf_map is not None else None
                new.append(self._add(v) if rep is None else rep)
            else:
                new.append(self._add(_relabel(v, new)))
        return new

    def build(self, root: int, n: int, semantics: Semantics = RAW,
              divisions_allowed: bool | None = None) -> Circuit:
        return self.build_with_map(root, n, semantics, divisions_allowed)[0]

    def build_with_map(self, root: int, n: int, semantics: Semantics = RAW,
                       divisions_allowed: bool | None = None,
                       keep: Iterable[int] = ()) -> tuple[Circuit, dict[int, int]]:
        """Canonicalize the part reachable from ``root`` into a Circuit.

        Returns the circuit and a map from builder ids to circuit ids. ``keep``
        lists extra ids that must be reachable (they raise if not).
        """
        order = _reachable_postorder(self.nodes, root)
        remap: dict[int, int] = {}
        table: list[Node] = []
        seen: dict[Node, int] = {}
        for i in order:
            body = _relabel(self.nodes[i], remap)
            if self.dedupe and body in seen:
                remap[i] = seen[body]
                continue
            remap[i] = len(table)
            seen[body] = len(table)
            table.append(body)
        for k in keep:
            if k not in remap:
                raise CircuitError(f"n{k} is not reachable from the root")
        has_div = any(type(v) is Div for v in table)
        if divisions_allowed is None:
            divisions_allowed = has_div
        if has_div and not divisions_allowed:
            raise CircuitError("division node in a circuit with divisions disallowed")
        if not divisions_allowed and not semantics.allows_bar:
            for i, v in enumerate(table):
                if type(v) is Var and v.bar:
                    raise PolarityError(f"n{i}: bar leaf {v} under {semantics} semantics")
        for v in table:
            if type(v) is Var and not 1 <= v.index <= n:
                raise CircuitError(f"variable {v} outside 1..{n}")
        return Circuit(tuple(table), remap[root], n, semantics, divisions_allowed), remap


# ---------------------------------------------------------------------------
# Structural metadata


def scopes(c: Circuit) -> list[frozenset[int]]:
    """Scope of every node: indices i with x_i or ~x_i among its descendants."""
    cached = c._cache.get("scopes")
    if cached is not None:
        return cached
    out: list[frozenset[int]] = []
    empty = frozenset()
    for v in c.nodes:
        t = type(v)
        if t is Var:
            out.append(frozenset((v.index,)))
        elif t is Const:
            out.append(empty)
        else:
            ids = child_ids(v)
            s = out[ids[0]]
            for ch in ids[1:]:
                if out[ch] is not s:
                    s = s | out[ch]
            out.append(s)
    c._cache["scopes"] = out
    return out


def formal_degrees(c: Circuit) -> list[int]:
    """Upper bound on the total degree at each node (division-free circuits)."""
    out: list[int] = []
    for v in c.nodes:
        t = type(v)
        if t is Var:
            out.append(1)
        elif t is Const:
            out.append(0)
        elif t is Sum:
            out.append(max(out[ch] for _, ch in v.children))
        elif t is Prod:
            out.append(sum(out[ch] for ch in v.children))
        else:
            raise CircuitError("degree bounds are undefined for division nodes")
    return out


def variable_degree_bounds(c: Circuit) -> dict[Var, int]:
    """Per-variable degree upper bound at the root by syntactic analysis."""
    per: list[dict] = []
    for v in c.nodes:
        t = type(v)
        if t is Var:
            per.append({v: 1})
        elif t is Const:
            per.append({})
        elif t is Sum:
            acc: dict = {}
            for _, ch in v.children:
                for key, d in per[ch].items():
                    if d > acc.get(key, 0):
                        acc[key] = d
            per.append(acc)
        elif t is Prod:
            acc = {}
            for ch in v.children:
                for key, d in per[ch].items():
                    acc[key] = acc.get(key, 0) + d
            per.append(acc)
        else:
            raise CircuitError("degree bounds are undefined for division nodes")
    return per[c.root]


# ---------------------------------------------------------------------------
# Evaluation


def _leaf_vectors(c: Circuit, x, xbar, convert):
    xs = [convert(v) for v in x]
    if len(xs) < c.n:
        raise ValueError(f"point supplies {len(xs)} values for {c.n} variables")
    xbs = None
    if xbar is not None:
        xbs = [convert(v) for v in xbar]
        if len(xbs) < c.n:
            raise ValueError(f"point supplies {len(xbs)} bar values for {c.n} variables")
    elif c.has_bar:
        raise ValueError("circuit has bar leaves but no bar values were supplied")
    return xs, xbs


def _to_mpq(v):
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    if isinstance(v, (int, str)):
        return mpq(v)
    if type(v).__name__ == "mpq":
        return v
    return mpq(rational(v).numerator, rational(v).denominator)


def _run(c: Circuit, xs, xbs, is_zero):
    vals: list = [None] * len(c.nodes)
    zero = mpq(0)
    for k, (op, a, b) in enumerate(c._compiled()):
        if op == 2:
            acc = zero
            for w, ch in a:
                acc = acc + w * vals[ch]
            vals[k] = acc
        elif op == 3:
            acc = vals[a[0]]
            for ch in a[1:]:
                acc = acc * vals[ch]
            vals[k] = acc
        elif op == 1:
            vals[k] = xbs[a] if b else xs[a]
        elif op == 0:
            vals[k] = a
        else:
            den = vals[b]
            if is_zero(den):
                raise DivideByZero(k)
            vals[k] = vals[a] / den
    return vals[c.root]


def _mpq_to_fraction(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def evaluate(c: Circuit, x: Sequence = (), xbar: Sequence | None = None) -> Fraction:
    """Exact value of ``c`` at the point (x_1..x_n, ~x_1..~x_n)."""
    xs, xbs = _leaf_vectors(c, x, xbar, _to_mpq)
    return _mpq_to_fraction(_run(c, xs, xbs, lambda d: d == 0))


def evaluate_many(c: Circuit, xs: Sequence[Sequence],
                  xbars: Sequence[Sequence] | None = None) -> list[Fraction]:
    """Evaluate at many points in one vectorized pass.

    ``xs[j]`` (and ``xbars[j]`` when the circuit has bar leaves) give point j.
    Results are exact and identical to calling :func:`evaluate` per point.
    """
    m = len(xs)
    if m == 0:
        return []

    def column(rows, i):
        arr = np.empty(m, dtype=object)
        arr[:] = [_to_mpq(row[i]) for row in rows]
        return arr

    cols = [column(xs, i) for i in range(c.n)]
    bar_cols = None
    if c.has_bar:
        if xbars is None:
            raise ValueError("circuit has bar leaves but no bar values were supplied")
        bar_cols = [column(xbars, i) for i in range(c.n)]
    result = _run(c, cols, bar_cols, lambda d: bool(np.any(d == 0)))
    if not isinstance(result, np.ndarray):
        return [_mpq_to_fraction(result)] * m
    return [_mpq_to_fraction(v) for v in result]


def _mod_inverse(value: int, prime: int) -> int:
    return pow(value, -1, prime)


def to_residue(value, prime: int = MERSENNE61) -> int:
    """Map a rational to Z/p (raises NonInvertibleWeight if p divides the denominator)."""
    q = rational(value) if not isinstance(value, int) else Fraction(value)
    if q.denominator % prime == 0:
        raise NonInvertibleWeight(f"denominator of {q} is divisible by {prime}")
    return q.numerator * _mod_inverse(q.denominator % prime, prime) % prime


def evaluate_mod(c: Circuit, x: Sequence = (), xbar: Sequence | None = None,
                 prime: int = MERSENNE61) -> int:
    """Evaluate ``c`` with all arithmetic in Z/prime."""
    conv = lambda v: v % prime if isinstance(v, int) else to_residue(v, prime)
    xs, xbs = _leaf_vectors(c, x, xbar, conv)
    key = ("modprog", prime)
    prog = c._cache.get(key)
    if prog is None:
        prog = []
        for v in c.nodes:
            t = type(v)
            if t is Const:
                prog.append((0, to_residue(v.value, prime), None))
            elif t is Var:
                prog.append((1, v.index - 1, v.bar))
            elif t is Sum:
                prog.append((2, tuple((to_residue(w, prime), ch) for w, ch in v.children), None))
            elif t is Prod:
                prog.append((3, v.children, None))
            else:
                prog.append((4, v.num, v.den))
        c._cache[key] = prog
    vals: list = [0] * len(prog)
    for k, (op, a, b) in enumerate(prog):
        if op == 2:
            acc = 0
            for w, ch in a:
                acc += w * vals[ch]
            vals[k] = acc % prime
        elif op == 3:
            acc = vals[a[0]]
            for ch in a[1:]:
                acc = acc * vals[ch] % prime
            vals[k] = acc
        elif op == 1:
            vals[k] = xbs[a] if b else xs[a]
        elif op == 0:
            vals[k] = a
        else:
            if vals[b] == 0:
                raise DivideByZero(k)
            vals[k] = vals[a] * _mod_inverse(vals[b], prime) % prime
    return vals[c.root]


def constant_term(c: Circuit) -> Fraction:
    zeros = [0] * c.n
    return evaluate(c, zeros, zeros if c.has_bar else None)


def leaf_assignment(n: int, x: Mapping[int, object] | None = None,
                    xbar: Mapping[int, object] | None = None, default=0):
    """Helper turning sparse {index: value} maps into dense point vectors."""
    xs = [rational((x or {}).get(i, default)) for i in range(1, n + 1)]
    xbs = [rational((xbar or {}).get(i, default)) for i in range(1, n + 1)]
    return xs, xbs
