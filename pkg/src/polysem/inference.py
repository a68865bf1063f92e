"""Marginal queries in the network, likelihood, generating and Fourier
semantics.

Every function takes a batch of queries so that all evaluation points are
pushed through the circuit in one vectorized pass; the single-query helpers
wrap the batch versions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Iterable, Iterator, Sequence

from .circuit import (
    FOURIER,
    GENERATING,
    LIKELIHOOD,
    NETWORK,
    Circuit,
    evaluate_many,
)
from .errors import ParseError, SemanticsMismatch


class State(Enum):
    ONE = "1"
    ZERO = "0"
    MARG = "?"


@dataclass(frozen=True)
class Query:
    states: tuple[State, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __str__(self) -> str:
        return " ".join(s.value for s in self.states)

    @property
    def ones(self) -> list[int]:
        return [i + 1 for i, s in enumerate(self.states) if s is State.ONE]

    @property
    def zeros(self) -> list[int]:
        return [i + 1 for i, s in enumerate(self.states) if s is State.ZERO]

    @property
    def marginalized(self) -> list[int]:
        return [i + 1 for i, s in enumerate(self.states) if s is State.MARG]

    def relax(self, i: int) -> "Query":
        """Same query with variable i (1-based) marginalized."""
        states = list(self.states)
        states[i - 1] = State.MARG
        return Query(tuple(states))

    def fix(self, i: int, state: State) -> "Query":
        states = list(self.states)
        states[i - 1] = state
        return Query(tuple(states))


def parse_query(text: str, n: int | None = None) -> Query:
    """Parse ``"1 ? 0"`` style queries; ``n`` checks the length."""
    try:
        states = tuple(State(tok) for tok in text.split())
    except ValueError:
        raise ParseError(f"bad query {text!r}: use 1, 0 or ? per variable") from None
    if n is not None and len(states) != n:
        raise ParseError(f"query {text!r} has {len(states)} entries, circuit has {n} variables")
    return Query(states)


def all_queries(n: int) -> Iterator[Query]:
    """All 3^n queries."""
    for states in product((State.ONE, State.ZERO, State.MARG), repeat=n):
        yield Query(states)


def _check(c: Circuit, tag, queries: Sequence[Query]) -> None:
    if c.semantics != tag:
        raise SemanticsMismatch(f"expected a {tag} circuit, got {c.semantics}")
    if c.has_division:
        raise SemanticsMismatch("inference needs a division-free circuit")
    for q in queries:
        if len(q) != c.n:
            raise SemanticsMismatch(f"query {q} has {len(q)} entries for {c.n} variables")


def network_marginals(c: Circuit, queries: Sequence[Query]) -> list[Fraction]:
    """One pass per query: ONE -> (1, 0), ZERO -> (0, 1), MARG -> (1, 1)."""
    _check(c, NETWORK, queries)
    table = {State.ONE: (1, 0), State.ZERO: (0, 1), State.MARG: (1, 1)}
    xs = [[table[s][0] for s in q.states] for q in queries]
    xbars = [[table[s][1] for s in q.states] for q in queries]
    return evaluate_many(c, xs, xbars)


def likelihood_marginals(c: Circuit, queries: Sequence[Query]) -> list[Fraction]:
    """ONE -> 1, ZERO -> 0, MARG -> 1/2, then scale by 2^(#MARG)."""
    _check(c, LIKELIHOOD, queries)
    half = Fraction(1, 2)
    table = {State.ONE: 1, State.ZERO: 0, State.MARG: half}
    xs = [[table[s] for s in q.states] for q in queries]
    values = evaluate_many(c, xs)
    return [v * (1 << len(q.marginalized)) for v, q in zip(values, queries)]


def generating_marginals(c: Circuit, queries: Sequence[Query]) -> list[Fraction]:
    """Leading coefficient of h(z) = g(z on ONE, 0 on ZERO, 1 on MARG).

    h has degree at most m = #ONE; it is sampled at z = 0..m and its z^m
    coefficient recovered by Lagrange interpolation.
    """
    _check(c, GENERATING, queries)
    points, spans = [], []
    for q in queries:
        m = len(q.ones)
        spans.append((len(points), m))
        for z in range(m + 1):
            points.append([z if s is State.ONE else (0 if s is State.ZERO else 1)
                           for s in q.states])
    values = evaluate_many(c, points) if points else []
    out = []
    for start, m in spans:
        total = Fraction(0)
        for k in range(m + 1):
            weight = Fraction(-1 if (m - k) % 2 else 1, factorial(k) * factorial(m - k))
            total += values[start + k] * weight
        out.append(total)
    return out


def fourier_marginals(c: Circuit, queries: Sequence[Query]) -> list[Fraction]:
    """Rewrite to the generating semantics (edge 11), then interpolate."""
    from .leaf_transforms import fourier_to_generating

    _check(c, FOURIER, queries)
    return generating_marginals(fourier_to_generating(c), queries)


_BY_TAG = {
    NETWORK: network_marginals,
    LIKELIHOOD: likelihood_marginals,
    GENERATING: generating_marginals,
    FOURIER: fourier_marginals,
}


def marginals(c: Circuit, queries: Iterable[Query]) -> list[Fraction]:
    """Dispatch on the circuit's semantics tag."""
    queries = list(queries)
    if c.semantics not in _BY_TAG:
        raise SemanticsMismatch(f"no marginal inference for {c.semantics} circuits")
    return _BY_TAG[c.semantics](c, queries)


def marginal(c: Circuit, q: Query) -> Fraction:
    return marginals(c, [q])[0]


def marginal_network(c: Circuit, q: Query) -> Fraction:
    return network_marginals(c, [q])[0]


def marginal_likelihood(c: Circuit, q: Query) -> Fraction:
    return likelihood_marginals(c, [q])[0]


def marginal_generating(c: Circuit, q: Query) -> Fraction:
    return generating_marginals(c, [q])[0]


def marginal_fourier(c: Circuit, q: Query) -> Fraction:
    return fourier_marginals(c, [q])[0]


def compile_for_queries(c: Circuit) -> Circuit:
    """Pre-transform once for batch workloads: Fourier -> generating (edge
    11), generating -> network (edge 1), likelihood -> network (edge 4)."""
    from .leaf_transforms import apply_edge

    if c.semantics == FOURIER:
        return apply_edge(c, 11)
    if c.semantics == GENERATING:
        return apply_edge(c, 1)
    if c.semantics == LIKELIHOOD:
        return apply_edge(c, 4)
    return c
