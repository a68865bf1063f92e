"""Leaf-substitution edges between the six distribution semantics, and a
route planner over the full transformation graph.

Edges 2, 3, 5, 6, 8, 9, 11 and 12 only rewrite leaves (plus, for 11 and 12,
one scaling node at the root). The starred edges 1, 4, 7 and 10 go through
division elimination and are dispatched to :mod:`polysem.division_elim`.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

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
    Semantics,
    Var,
)
from .errors import RouteError, SemanticsMismatch


@dataclass(frozen=True)
class Edge:
    number: int
    source: Semantics
    target: Semantics
    starred: bool
    label: str


EDGES: dict[int, Edge] = {
    1: Edge(1, GENERATING, NETWORK, True, "coefficient extraction"),
    2: Edge(2, NETWORK, GENERATING, False, "~x := 1"),
    3: Edge(3, NETWORK, LIKELIHOOD, False, "~x := 1 - x"),
    4: Edge(4, LIKELIHOOD, NETWORK, True, "evidence completion"),
    5: Edge(5, LIKELIHOOD, LIKELIHOOD_PM, False, "x := (1 - x)/2"),
    6: Edge(6, LIKELIHOOD_PM, LIKELIHOOD, False, "x := 1 - 2x"),
    7: Edge(7, LIKELIHOOD_PM, FOURIER_IND, True, "coefficient extraction"),
    8: Edge(8, FOURIER_IND, LIKELIHOOD_PM, False, "~x := 1"),
    9: Edge(9, FOURIER_IND, FOURIER, False, "~x := 1 - x"),
    10: Edge(10, FOURIER, FOURIER_IND, True, "evidence completion"),
    11: Edge(11, FOURIER, GENERATING, False, "x := (1 - x)/2, times 2^n"),
    12: Edge(12, GENERATING, FOURIER, False, "times 2^-n, x := 1 - 2x"),
}


def _require(c: Circuit, tag: Semantics, force: bool = False) -> None:
    if c.semantics == tag or (force and c.semantics == RAW):
        return
    raise SemanticsMismatch(f"expected a {tag} circuit, got {c.semantics}")


def _require_division_free(c: Circuit) -> None:
    if c.has_division:
        raise SemanticsMismatch("leaf transformations need a division-free circuit")


def substitute_leaves(c: Circuit, rule: Callable[[Var, Builder], int | None],
                      semantics: Semantics, scale: Fraction | None = None) -> Circuit:
    """Replace variable leaves by ``rule`` and optionally scale the root.

    ``rule`` returns a builder id for the replacement, or None to keep the
    leaf. The scale is a single constant leaf multiplied onto the old root.
    """
    b = Builder()

    def leaf_map(v, builder):
        if type(v) is Var:
            return rule(v, builder)
        return None

    ids = b.import_circuit(c, leaf_map)
    root = ids[c.root]
    if scale is not None:
        root = b.mul([b.const(scale), root])
    return b.build(root, c.n, semantics)


def _affine(a, k) -> Callable[[Var, Builder], int | None]:
    """Rule x_i -> a + k*x_i on plain leaves."""
    a, k = Fraction(a), Fraction(k)

    def rule(v: Var, b: Builder):
        if v.bar:
            return None
        return b.sum([(a, b.const(1)), (k, b.var(v.index))])

    return rule


def _bar_to_one(v: Var, b: Builder):
    return b.const(1) if v.bar else None


def _bar_to_complement(v: Var, b: Builder):
    if not v.bar:
        return None
    return b.sum([(1, b.const(1)), (-1, b.var(v.index))])


def network_to_generating(c: Circuit, force: bool = False) -> Circuit:
    """Edge 2: every ~x_i leaf becomes the constant 1."""
    _require(c, NETWORK, force)
    _require_division_free(c)
    return substitute_leaves(c, _bar_to_one, GENERATING)


def network_to_likelihood(c: Circuit, force: bool = False) -> Circuit:
    """Edge 3: every ~x_i leaf becomes 1 - x_i."""
    _require(c, NETWORK, force)
    _require_division_free(c)
    return substitute_leaves(c, _bar_to_complement, LIKELIHOOD)


def fourier_ind_collapse(c: Circuit, mode: str, force: bool = False) -> Circuit:
    """Edges 8 (``mode="to_pm"``, ~x := 1) and 9 (``mode="to_fourier"``, ~x := 1 - x)."""
    _require(c, FOURIER_IND, force)
    _require_division_free(c)
    if mode == "to_pm":
        return substitute_leaves(c, _bar_to_one, LIKELIHOOD_PM)
    if mode == "to_fourier":
        return substitute_leaves(c, _bar_to_complement, FOURIER)
    raise ValueError(f"unknown mode {mode!r}")


_SWAP_DIRECTIONS = {
    LIKELIHOOD: ("to_pm", LIKELIHOOD_PM),
    LIKELIHOOD_PM: ("from_pm", LIKELIHOOD),
    FOURIER: ("to_pm", RAW),
}


def domain_swap(c: Circuit, direction: str | None = None,
                target: Semantics | None = None) -> Circuit:
    """Move a function between the {0,1} and {-1,1} domains.

    ``to_pm`` substitutes x_i := (1 - x_i)/2 and ``from_pm`` substitutes
    x_i := 1 - 2x_i; the two compose to the identity. The direction is
    inferred for likelihood, likelihood_pm and fourier inputs and must be
    given for raw circuits.
    """
    if c.has_bar:
        raise SemanticsMismatch("domain swap needs a single-polarity circuit")
    _require_division_free(c)
    if direction is None:
        if c.semantics not in _SWAP_DIRECTIONS:
            raise SemanticsMismatch(f"cannot infer a swap direction for {c.semantics}")
        direction, inferred = _SWAP_DIRECTIONS[c.semantics]
        target = target or inferred
    target = target or RAW
    if direction == "to_pm":
        return substitute_leaves(c, _affine(Fraction(1, 2), Fraction(-1, 2)), target)
    if direction == "from_pm":
        return substitute_leaves(c, _affine(1, -2), target)
    raise ValueError(f"unknown direction {direction!r}")


def likelihood_to_pm(c: Circuit, force: bool = False) -> Circuit:
    """Edge 5."""
    _require(c, LIKELIHOOD, force)
    return domain_swap(c, "to_pm", LIKELIHOOD_PM)


def pm_to_likelihood(c: Circuit, force: bool = False) -> Circuit:
    """Edge 6."""
    _require(c, LIKELIHOOD_PM, force)
    return domain_swap(c, "from_pm", LIKELIHOOD)


def fourier_to_generating(c: Circuit, force: bool = False) -> Circuit:
    """Edge 11: g(x) = 2^n * p̂((1 - x)/2)."""
    _require(c, FOURIER, force)
    _require_division_free(c)
    if c.has_bar:
        raise SemanticsMismatch("fourier circuits have no bar leaves")
    return substitute_leaves(c, _affine(Fraction(1, 2), Fraction(-1, 2)), GENERATING,
                             scale=Fraction(1 << c.n))


def generating_to_fourier(c: Circuit, force: bool = False) -> Circuit:
    """Edge 12: p̂(x) = 2^-n * g(1 - 2x)."""
    _require(c, GENERATING, force)
    _require_division_free(c)
    if c.has_bar:
        raise SemanticsMismatch("generating circuits have no bar leaves")
    return substitute_leaves(c, _affine(1, -2), FOURIER, scale=Fraction(1, 1 << c.n))


_LEAF_EDGES = {
    2: network_to_generating,
    3: network_to_likelihood,
    5: likelihood_to_pm,
    6: pm_to_likelihood,
    8: lambda c, force=False: fourier_ind_collapse(c, "to_pm", force),
    9: lambda c, force=False: fourier_ind_collapse(c, "to_fourier", force),
    11: fourier_to_generating,
    12: generating_to_fourier,
}


def apply_edge(c: Circuit, edge: int, force: bool = False) -> Circuit:
    """Apply one numbered edge; raw inputs are accepted only with ``force``."""
    if edge not in EDGES:
        raise RouteError(f"no edge numbered {edge}")
    if edge in _LEAF_EDGES:
        return _LEAF_EDGES[edge](c, force=force)
    from .division_elim import edge_transform

    _require(c, EDGES[edge].source, force)
    if c.semantics == RAW:
        c = c.with_semantics(EDGES[edge].source)
    return edge_transform(c, edge)


def apply_route(c: Circuit, route: Sequence[int], force: bool = False,
                keep_intermediate: bool = False):
    """Apply edges in order; returns the final circuit, or every stage."""
    route = tuple(route)
    check_route(c.semantics if c.semantics != RAW or not route else EDGES[route[0]].source,
                route)
    stages = [c]
    for k, e in enumerate(route):
        stages.append(apply_edge(stages[-1], e, force=force and k == 0))
    return stages if keep_intermediate else stages[-1]


def check_route(start: Semantics, route: Sequence[int]) -> Semantics:
    """Validate that the edges compose from ``start``; returns the end tag."""
    tag = start
    for e in route:
        if e not in EDGES:
            raise RouteError(f"no edge numbered {e}")
        if EDGES[e].source != tag:
            raise RouteError(f"edge {e} starts at {EDGES[e].source}, not {tag}")
        tag = EDGES[e].target
    return tag


def parse_route(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise RouteError(f"bad route {text!r}; expected e.g. '1,3'") from None


def format_route(route: Sequence[int]) -> str:
    return ",".join(str(e) for e in route)


def plan_route(source: Semantics, target: Semantics, objective: str = "min_edges",
               n: int = 2) -> tuple[int, ...]:
    """Cheapest edge sequence from ``source`` to ``target``.

    ``min_edges`` counts edges. ``min_size`` charges n^2 for a starred edge
    and 1 otherwise. Ties go to fewer edges, then the lexicographically
    smallest route.
    """
    for tag in (source, target):
        if tag not in (LIKELIHOOD, NETWORK, GENERATING, LIKELIHOOD_PM, FOURIER, FOURIER_IND):
            raise RouteError(f"{tag} is not a vertex of the transformation graph")
    if objective == "min_edges":
        weight = lambda e: 1
    elif objective == "min_size":
        heavy = max(n, 2) ** 2
        weight = lambda e: heavy if EDGES[e].starred else 1
    else:
        raise ValueError(f"unknown objective {objective!r}")
    heap = [(0, 0, (), source.name)]
    done: set[str] = set()
    while heap:
        cost, length, route, name = heapq.heappop(heap)
        if name == target.name:
            return route
        if name in done:
            continue
        done.add(name)
        for e in sorted(EDGES):
            edge = EDGES[e]
            if edge.source.name == name and edge.target.name not in done:
                heapq.heappush(heap, (cost + weight(e), length + 1, route + (e,),
                                      edge.target.name))
    raise RouteError(f"no route from {source} to {target}")
