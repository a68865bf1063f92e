"""Structural properties (decomposability, smoothness) and the cheap
transformations they enable.

For a decomposable circuit the two-polarity polynomial can be obtained by
smoothing with gap gadgets instead of division elimination, and the Fourier
polynomial of a decomposable likelihood circuit only needs new leaves.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction

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
    Div,
    Prod,
    Sum,
    Var,
    child_ids,
    scopes,
)
from .errors import NotDecomposable, NotSmooth, SemanticsMismatch, UnscopedConstant


class Gadget(Enum):
    INDICATOR_PAIR = "indicator_pair"  # x_i + ~x_i
    BAR_ONLY = "bar_only"              # ~x_i


_SMOOTH_TARGETS = {
    Gadget.INDICATOR_PAIR: {LIKELIHOOD: NETWORK, FOURIER: FOURIER_IND},
    Gadget.BAR_ONLY: {GENERATING: NETWORK, LIKELIHOOD_PM: FOURIER_IND},
}


def is_decomposable(c: Circuit):
    """``(True, None)`` or ``(False, (node, index))`` for the first product
    whose children share the variable ``index``."""
    sc = scopes(c)
    for k, v in enumerate(c.nodes):
        if type(v) is not Prod:
            continue
        seen: set[int] = set()
        for ch in v.children:
            shared = seen & sc[ch]
            if shared:
                return False, (k, min(shared))
            seen |= sc[ch]
    return True, None


def is_smooth(c: Circuit):
    """``(True, None)`` or ``(False, (node, index))`` for the first sum with
    a child whose scope misses ``index``."""
    sc = scopes(c)
    for k, v in enumerate(c.nodes):
        if type(v) is not Sum:
            continue
        for _, ch in v.children:
            gap = sc[k] - sc[ch]
            if gap:
                return False, (k, min(gap))
    return True, None


def _require_decomposable(c: Circuit) -> None:
    ok, witness = is_decomposable(c)
    if not ok:
        node, index = witness
        raise NotDecomposable(f"product n{node} has two children over x{index}",
                              node=node, index=index)


def smooth_complete(c: Circuit, gadget: Gadget | str) -> Circuit:
    """Two-polarity circuit of a decomposable circuit by filling scope gaps.

    Every sum edge whose child misses indices of the sum's scope gets the
    gadget for each missing index; indices missing at the root are filled
    there (the root sum, if any, is treated as having scope [n]).
    """
    gadget = Gadget(gadget)
    if c.has_division or c.has_bar:
        raise SemanticsMismatch("smoothing needs a division-free single-polarity circuit")
    targets = _SMOOTH_TARGETS[gadget]
    if c.semantics not in targets:
        raise SemanticsMismatch(f"{gadget.value} smoothing does not apply to {c.semantics}")
    _require_decomposable(c)
    sc = scopes(c)
    everything = frozenset(range(1, c.n + 1))
    b = Builder()
    cache: dict[int, int] = {}

    def gap_node(i: int) -> int:
        if i not in cache:
            if gadget is Gadget.INDICATOR_PAIR:
                cache[i] = b.sum([(1, b.var(i)), (1, b.var(i, True))])
            else:
                cache[i] = b.var(i, True)
        return cache[i]

    ids: list[int] = []
    for k, v in enumerate(c.nodes):
        t = type(v)
        if t is Sum:
            scope = everything if k == c.root else sc[k]
            terms = []
            for w, ch in v.children:
                gap = sorted(scope - sc[ch])
                child = c.nodes[ch]
                if not gap:
                    terms.append((w, ids[ch]))
                elif type(child) is Const:
                    fill = gap_node(gap[0]) if len(gap) == 1 else b.mul(map(gap_node, gap))
                    terms.append((w * child.value, fill))
                else:
                    terms.append((w, b.mul([ids[ch]] + [gap_node(i) for i in gap])))
            ids.append(b.sum(terms))
        elif t is Prod:
            ids.append(b.mul(ids[ch] for ch in v.children))
        else:
            ids.append(b._add(v))
    root = ids[c.root]
    missing = sorted(everything - sc[c.root])
    if missing and type(c.nodes[c.root]) is not Sum:
        if type(c.nodes[c.root]) is Prod:
            root = b.mul([ids[ch] for ch in c.nodes[c.root].children]
                         + [gap_node(i) for i in missing])
        else:
            root = b.mul([root] + [gap_node(i) for i in missing])
    return b.build(root, c.n, targets[c.semantics])


def fourier_leaves(c: Circuit, return_map: bool = False):
    """Fourier polynomial of a decomposable likelihood circuit by leaf rewriting.

    Each node is rewritten relative to a required scope R (R = [n] at the
    root, R = scope for nodes below a product). Leaves map as

    * x_i with R = {i}  ->  (1 - 2x_i)/2,
    * constant k over R ->  k * prod_{i in R} (1 - x_i),

    and the indices of R that no child of a product covers go to its first
    constant child, or else to its first sum/product child that can pass
    them on to constants. Sum and product nodes keep their weights and arity.

    With ``return_map`` the result is ``(circuit, {old internal id: new id})``.
    """
    if c.semantics != LIKELIHOOD and c.semantics != RAW:
        raise SemanticsMismatch(f"fourier_leaves expects a likelihood circuit, got {c.semantics}")
    if c.has_division or c.has_bar:
        raise SemanticsMismatch("fourier_leaves needs a division-free single-polarity circuit")
    _require_decomposable(c)
    sc = scopes(c)
    b = Builder()
    memo: dict[tuple[int, frozenset], int] = {}
    internal: dict[int, int] = {}
    one = None

    def complement(i: int) -> int:
        nonlocal one
        if one is None:
            one = b.const(1)
        return b.sum([(1, one), (-1, b.var(i))])

    def const_leaf(value: Fraction, R: frozenset) -> int:
        if not R:
            return b.const(value)
        factors = [complement(i) for i in sorted(R)]
        if len(factors) == 1:
            return b.sum([(value, b.const(1)), (-value, b.var(min(R)))])
        return b.mul([b.const(value)] + factors)

    carries: dict[int, bool] = {}

    def can_carry(k: int) -> bool:
        # Whether extra indices pushed into node k end up on constants only.
        if k not in carries:
            v = c.nodes[k]
            if type(v) is Const:
                carries[k] = True
            elif type(v) is Sum:
                carries[k] = all(can_carry(ch) for _, ch in v.children)
            elif type(v) is Prod:
                carries[k] = any(not sc[ch] or can_carry(ch) for ch in v.children)
            else:
                carries[k] = False
        return carries[k]

    def rewrite(k: int, R: frozenset) -> int:
        key = (k, R)
        if key in memo:
            return memo[key]
        v = c.nodes[k]
        t = type(v)
        if t is Var:
            if R != {v.index}:
                extra = min(R - {v.index})
                raise NotSmooth(f"leaf x{v.index} must also cover x{extra}", node=k, index=extra)
            out = b.sum([(Fraction(1, 2), b.const(1)), (-1, b.var(v.index))])
        elif t is Const:
            out = const_leaf(v.value, R)
        elif t is Sum:
            out = b.sum([(w, rewrite(ch, R)) for w, ch in v.children])
        else:
            covered = frozenset().union(*(sc[ch] for ch in v.children))
            gap = R - covered
            if not covered <= R:
                raise NotSmooth(f"product n{k} reaches outside its required scope",
                                node=k, index=min(covered - R))
            # The gap goes to the first constant child, or failing that to the
            # first internal child able to pass it down to constants.
            carrier = next((ch for ch in v.children if not sc[ch]), None)
            if gap and carrier is None:
                carrier = next((ch for ch in v.children if can_carry(ch)), None)
            if gap and carrier is None:
                raise UnscopedConstant(f"product n{k} leaves x{min(gap)} uncovered and has "
                                       "no factor to carry it", node=k, index=min(gap))
            children = [rewrite(ch, sc[ch] | gap if ch == carrier else sc[ch])
                        for ch in v.children]
            out = b.mul(children)
        memo[key] = out
        if t is Sum or t is Prod:
            internal.setdefault(k, out)
        return out

    root = rewrite(c.root, frozenset(range(1, c.n + 1)))
    out, remap = b.build_with_map(root, c.n, FOURIER)
    if return_map:
        return out, {k: remap[v] for k, v in internal.items()}
    return out


def skeleton_preserved(before: Circuit, after: Circuit, mapping: dict[int, int]) -> bool:
    """True when every sum/product of ``before`` survives in ``after`` with the
    same kind, arity and weights, and internal children map to internal
    children."""
    for k, m in mapping.items():
        old, new = before.nodes[k], after.nodes[m]
        if type(old) is not type(new) or len(child_ids(old)) != len(child_ids(new)):
            return False
        if type(old) is Sum and [w for w, _ in old.children] != [w for w, _ in new.children]:
            return False
        for oc, nc in zip(child_ids(old), child_ids(new)):
            if type(before.nodes[oc]) in (Sum, Prod):
                if mapping.get(oc) != nc:
                    return False
    internal = sum(1 for v in before.nodes if type(v) in (Sum, Prod))
    return len(mapping) == internal


def internal_count(c: Circuit) -> int:
    return sum(1 for v in c.nodes if type(v) in (Sum, Prod, Div))
