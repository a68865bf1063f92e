"""Division elimination for the starred edges 1, 4, 7 and 10.

The pipeline is:

1. ``introduce_gadgets`` replaces leaves by division gadgets and multiplies
   the root by the matching prefactor;
2. ``pull_up`` moves every division to a single one at the root, giving A/B;
3. ``eliminate_division`` translates the inputs so that B has constant term
   1, homogenizes A and E = 1 - B, sums the truncated geometric series
   A(1 + E + E^2 + ...) up to the target degree and translates back.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping

from .circuit import (
    FOURIER,
    FOURIER_IND,
    GENERATING,
    LIKELIHOOD,
    LIKELIHOOD_PM,
    NETWORK,
    RAW,
    Builder,
    Circuit,
    Const,
    Prod,
    Sum,
    Var,
    _reachable_postorder,
    evaluate,
)
from .errors import DegreeOverflow, SemanticsMismatch, SingularShift


class GadgetKind(Enum):
    EVIDENCE_COMPLETION = "evidence_completion"      # x -> x/(x + ~x), root * prod(x + ~x)
    COEFFICIENT_EXTRACTION = "coefficient_extraction"  # x -> x/~x, root * prod(~x)


_GADGET_SOURCES = {
    GadgetKind.EVIDENCE_COMPLETION: (LIKELIHOOD, FOURIER),
    GadgetKind.COEFFICIENT_EXTRACTION: (GENERATING, LIKELIHOOD_PM),
}

# edge -> (source, target, gadget)
STARRED_EDGES = {
    1: (GENERATING, NETWORK, GadgetKind.COEFFICIENT_EXTRACTION),
    4: (LIKELIHOOD, NETWORK, GadgetKind.EVIDENCE_COMPLETION),
    7: (LIKELIHOOD_PM, FOURIER_IND, GadgetKind.COEFFICIENT_EXTRACTION),
    10: (FOURIER, FOURIER_IND, GadgetKind.EVIDENCE_COMPLETION),
}


def _gadget_denominator(b: Builder, i: int, kind: GadgetKind) -> int:
    if kind is GadgetKind.EVIDENCE_COMPLETION:
        return b.sum([(1, b.var(i)), (1, b.var(i, True))])
    return b.var(i, True)


def introduce_gadgets(c: Circuit, kind: GadgetKind, check_tag: bool = True) -> Circuit:
    """Rational-function circuit equal (where defined) to the two-polarity form."""
    if c.has_division or c.has_bar:
        raise SemanticsMismatch("gadgets need a division-free single-polarity circuit")
    if check_tag and c.semantics not in _GADGET_SOURCES[kind] and c.semantics != RAW:
        raise SemanticsMismatch(f"{kind.value} gadgets do not apply to {c.semantics}")
    b = Builder()

    def leaf_map(v, builder):
        if type(v) is Var:
            return builder.div(builder.var(v.index), _gadget_denominator(builder, v.index, kind))
        return None

    ids = b.import_circuit(c, leaf_map)
    root = ids[c.root]
    if c.n:
        factors = [_gadget_denominator(b, i, kind) for i in range(1, c.n + 1)]
        root = b.mul([root] + factors)
    return b.build(root, c.n, RAW, divisions_allowed=True)


@dataclass(frozen=True)
class DivisionSplit:
    """A/B inside one host circuit whose root is ``Div(num, den)``."""

    host: Circuit
    num: int
    den: int

    def numerator(self) -> Circuit:
        return self.host.subcircuit(self.num, RAW)

    def denominator(self) -> Circuit:
        return self.host.subcircuit(self.den, RAW)


def pull_up(c: Circuit) -> DivisionSplit:
    """Rewrite ``c`` as a single quotient A/B.

    Each node carries (numerator, denominator) where the denominator is a
    multiset of "atoms" (numerators of divisors seen so far). Products take
    the multiset union; sums bring every child to the least common multiple
    of the children's multisets; a division a/b moves b's atoms into the
    numerator and adds b's numerator as a new atom.
    """
    b = Builder()
    num: list[int] = []
    den: list[Counter] = []
    empty: Counter = Counter()

    def raise_to(node: int, have: Counter, want: Counter) -> int:
        extra = [b.power(a, want[a] - have.get(a, 0)) for a in sorted(want)
                 if want[a] > have.get(a, 0)]
        return b.prod([node] + extra) if extra else node

    for v in c.nodes:
        t = type(v)
        if t is Const:
            num.append(b.const(v.value))
            den.append(empty)
        elif t is Var:
            num.append(b.var(v.index, v.bar))
            den.append(empty)
        elif t is Sum:
            common: Counter = Counter()
            for _, ch in v.children:
                common |= den[ch]
            num.append(b.lin([(w, raise_to(num[ch], den[ch], common)) for w, ch in v.children]))
            den.append(common)
        elif t is Prod:
            total: Counter = Counter()
            for ch in v.children:
                total = total + den[ch]
            num.append(b.prod([num[ch] for ch in v.children]))
            den.append(total)
        else:
            moved = [b.power(a, m) for a, m in sorted(den[v.den].items())]
            num.append(b.prod([num[v.num]] + moved))
            den.append(den[v.num] + Counter({num[v.den]: 1}))

    top = den[c.root]
    B = b.prod([b.power(a, m) for a, m in sorted(top.items())]) if top else b.const(1)
    A = num[c.root]
    root = b.div(A, B)
    host, remap = b.build_with_map(root, c.n, RAW, divisions_allowed=True, keep=(A, B))
    return DivisionSplit(host, remap[A], remap[B])


def _translate_rule(offsets: Mapping[Var, Fraction]):
    def leaf_map(v, builder: Builder):
        if type(v) is Var:
            o = offsets.get(v, 0)
            if o:
                return builder.lin([(1, builder.var(v.index, v.bar)), (o, builder.const(1))])
        return None
    return leaf_map


def translate_inputs(c: Circuit, offsets: Mapping[Var, object]) -> Circuit:
    """Circuit for f(x + offsets): each offset leaf v becomes v + offset."""
    if c.has_division:
        raise SemanticsMismatch("translate_inputs needs a division-free circuit")
    offsets = {v: Fraction(o) for v, o in offsets.items()}
    b = Builder()
    ids = b.import_circuit(c, _translate_rule(offsets))
    return b.build(ids[c.root], c.n, RAW, divisions_allowed=False)


# ---------------------------------------------------------------------------
# Homogenization


def _homogenize_into(b: Builder, root: int, d: int, memo: dict | None = None) -> dict[int, int]:
    """Homogeneous parts {degree: id} of builder node ``root`` up to degree d.

    Only degrees that can be nonzero are materialized; missing keys are zero.
    Degree-0 parts fold to constants through the builder's folding helpers.
    """
    memo = {} if memo is None else memo
    for k in _reachable_postorder(b.nodes, root):
        if k in memo:
            continue
        v = b.nodes[k]
        t = type(v)
        if t is Const:
            memo[k] = {0: k} if v.value != 0 else {}
        elif t is Var:
            memo[k] = {1: k} if d >= 1 else {}
        elif t is Sum:
            by_degree: dict[int, list] = {}
            for w, ch in v.children:
                for deg, part in memo[ch].items():
                    by_degree.setdefault(deg, []).append((w, part))
            parts = {}
            for deg in sorted(by_degree):
                node = b.lin(by_degree[deg])
                if b.const_value(node) != 0:
                    parts[deg] = node
            memo[k] = parts
        elif t is Prod:
            acc = memo[v.children[0]]
            for ch in v.children[1:]:
                acc = _hom_product(b, acc, memo[ch], d)
            memo[k] = acc
        else:
            raise SemanticsMismatch("cannot homogenize through a division node")
    return memo[root]


def _hom_product(b: Builder, f: dict[int, int], g: dict[int, int], d: int,
                 lo: int = 0) -> dict[int, int]:
    terms: dict[int, list] = {}
    for i, fi in f.items():
        for j, gj in g.items():
            if lo <= i + j <= d:
                terms.setdefault(i + j, []).append((1, b.prod([fi, gj])))
    out = {}
    for deg in sorted(terms):
        node = b.lin(terms[deg])
        if b.const_value(node) != 0:
            out[deg] = node
    return out


@dataclass(frozen=True)
class HomStack:
    """Homogeneous parts H_0..H_d of a circuit, sharing one host circuit.

    ``parts[i]`` is a node id in ``host`` or None when H_i is identically
    zero by construction. The host's root is the sum of all parts.
    """

    host: Circuit
    parts: tuple[int | None, ...]

    @property
    def degree(self) -> int:
        return len(self.parts) - 1

    def part(self, i: int) -> Circuit:
        if self.parts[i] is None:
            b = Builder()
            return b.build(b.const(0), self.host.n, RAW)
        return self.host.subcircuit(self.parts[i], RAW)


def homogenize(c: Circuit, d: int) -> HomStack:
    """Split ``c`` into its homogeneous parts of degree 0..d (higher parts dropped)."""
    if c.has_division:
        raise SemanticsMismatch("homogenize needs a division-free circuit")
    b = Builder()
    ids = b.import_circuit(c)
    parts = _homogenize_into(b, ids[c.root], d)
    root = b.lin([(1, parts[k]) for k in sorted(parts)])
    host, remap = b.build_with_map(root, c.n, RAW, divisions_allowed=False,
                                   keep=parts.values())
    return HomStack(host, tuple(remap[parts[k]] if k in parts else None for k in range(d + 1)))


# ---------------------------------------------------------------------------
# Division elimination


def _shift_point(n: int, shift: Mapping[Var, Fraction]):
    x = [shift.get(Var(i), Fraction(0)) for i in range(1, n + 1)]
    xb = [shift.get(Var(i, True), Fraction(0)) for i in range(1, n + 1)]
    return x, xb


def find_shift(split: DivisionSplit, tries: int = 32, seed: int = 0) -> dict[Var, Fraction]:
    """A point where the denominator does not vanish: all ones, then random."""
    B = split.denominator()
    leaves = sorted({B.nodes[i] for i in B.leaves()}, key=lambda v: (v.index, v.bar))
    candidates = [{v: Fraction(1) for v in leaves}]
    rng = random.Random(seed)
    for _ in range(tries):
        candidates.append({v: Fraction(rng.randint(-50, 50), rng.randint(1, 50))
                           for v in leaves})
    for shift in candidates:
        x, xb = _shift_point(B.n, shift)
        if evaluate(B, x, xb) != 0:
            return shift
    raise SingularShift("denominator vanishes at every tried shift point")


def eliminate_division(split: DivisionSplit, target_degree: int,
                       shift: Mapping[Var, object] | None = None,
                       homogeneous_target: bool = False,
                       verify: bool = False) -> Circuit:
    """Division-free circuit for the polynomial quotient A/B.

    ``target_degree`` must bound the degree of the quotient. With
    ``homogeneous_target`` and a zero shift where B(0) = 1, only the degree-d
    parts of the series are summed.
    """
    if shift is None:
        shift = find_shift(split)
    shift = {v: Fraction(o) for v, o in shift.items() if o != 0}
    host, d = split.host, target_degree
    x, xb = _shift_point(host.n, shift)
    b0 = evaluate(host.subcircuit(split.den), x, xb)
    if b0 == 0:
        raise SingularShift(f"denominator vanishes at the shift point {shift}")

    b = Builder()
    ids = b.import_circuit(host, _translate_rule(shift))
    A, B = ids[split.num], ids[split.den]
    memo: dict = {}
    hom_a = _homogenize_into(b, A, d, memo)
    hom_b = _homogenize_into(b, B, d, memo)
    inv = 1 / b0
    # E = 1 - B/b0 has no constant term, so E^j only has degrees >= j
    E = {k: b.scaled(-inv, node) for k, node in hom_b.items() if k >= 1}
    P = {k: b.scaled(inv, node) for k, node in hom_a.items()}
    series = [P]
    for j in range(1, d + 1):
        if not P or not E:
            break
        P = _hom_product(b, P, E, d, lo=j)
        series.append(P)

    shortcut = homogeneous_target and not shift and b0 == 1
    if shortcut:
        terms = [(1, Pj[d]) for Pj in series if d in Pj]
    else:
        terms = [(1, Pj[k]) for Pj in series for k in sorted(Pj)]
    root = b.lin(terms)
    out = b.build(root, host.n, RAW, divisions_allowed=False)
    if shift:
        out = translate_inputs(out, {v: -o for v, o in shift.items()})
    if verify:
        check_quotient(split, out)
    return out


def check_quotient(split: DivisionSplit, quotient: Circuit, seed: int = 0) -> None:
    """Raise DegreeOverflow unless quotient * B == A (randomized identity test)."""
    from .oracle import identical

    b = Builder()
    ids = b.import_circuit(split.host)
    q = b.import_circuit(quotient)
    lhs = b.mul([q[quotient.root], ids[split.den]])
    both = b.sum([(1, lhs), (-1, ids[split.num])])
    diff = b.build(both, max(split.host.n, quotient.n), RAW, divisions_allowed=False)
    zero = Builder()
    same, _ = identical(diff, zero.build(zero.const(0), diff.n, RAW),
                        mode="probabilistic", seed=seed)
    if not same:
        raise DegreeOverflow("quotient times denominator differs from the numerator; "
                             "the target degree is too small or the quotient is not a polynomial")


def builtin_shift(n: int) -> dict[Var, Fraction]:
    """x_i -> 0, ~x_i -> 1: both gadget prefactors evaluate to 1 there."""
    return {Var(i, True): Fraction(1) for i in range(1, n + 1)}


def edge_transform(c: Circuit, edge: int, keep: dict | None = None) -> Circuit:
    """Apply starred edge 1, 4, 7 or 10.

    If ``keep`` is a dict it receives the raw intermediates under the keys
    ``gadgets``, ``numerator`` and ``denominator``.
    """
    if edge not in STARRED_EDGES:
        raise SemanticsMismatch(f"edge {edge} is not a division-elimination edge")
    source, target, kind = STARRED_EDGES[edge]
    if c.semantics != source:
        raise SemanticsMismatch(f"edge {edge} expects a {source} circuit, got {c.semantics}")
    gadgets = introduce_gadgets(c, kind)
    split = pull_up(gadgets)
    if keep is not None:
        keep.update(gadgets=gadgets, numerator=split.numerator(),
                    denominator=split.denominator())
    out = eliminate_division(split, c.n, builtin_shift(c.n), homogeneous_target=True)
    return out.with_semantics(target)
