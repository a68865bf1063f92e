from fractions import Fraction
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polysem.circuit import (
    DISTRIBUTION_TAGS,
    FOURIER,
    FOURIER_IND,
    GENERATING,
    LIKELIHOOD,
    LIKELIHOOD_PM,
    NETWORK,
    RAW,
)
from polysem.errors import RouteError, SemanticsMismatch
from polysem.leaf_transforms import (
    EDGES,
    apply_edge,
    apply_route,
    check_route,
    domain_swap,
    format_route,
    parse_route,
    plan_route,
)
from polysem.oracle import DistTable, dist_from, encode, expand, parse_poly, tagged_poly

# Polynomials of the two-variable mixture under each semantics (oracle values).
MIXTURE_POLYS = {
    LIKELIHOOD: "9/100 + 4/25 x1 + 3/25 x2 + 2/25 x1 x2",
    NETWORK: "9/20 x1 x2 + 1/4 x1 ~x2 + 21/100 ~x1 x2 + 9/100 ~x1 ~x2",
    GENERATING: "9/100 + 1/4 x1 + 21/100 x2 + 9/20 x1 x2",
    LIKELIHOOD_PM: "1/4 - 1/10 x1 - 2/25 x2 + 1/50 x1 x2",
    FOURIER: "1/4 - 7/20 x1 - 33/100 x2 + 9/20 x1 x2",
    FOURIER_IND: "1/50 x1 x2 - 1/10 x1 ~x2 - 2/25 ~x1 x2 + 1/4 ~x1 ~x2",
}


def test_edge_table_shape():
    assert sorted(EDGES) == list(range(1, 13))
    assert {e for e, info in EDGES.items() if info.starred} == {1, 4, 7, 10}
    for tag in DISTRIBUTION_TAGS:
        assert sum(1 for e in EDGES.values() if e.source == tag) == 2
        assert sum(1 for e in EDGES.values() if e.target == tag) == 2


@pytest.mark.parametrize("edge", sorted(EDGES))
def test_every_edge_on_mixture(mixture, edge):
    d = dist_from(mixture)
    source = encode(d, EDGES[edge].source)
    out = apply_edge(source, edge)
    assert out.semantics == EDGES[edge].target
    assert not out.has_division
    assert expand(out) == parse_poly(MIXTURE_POLYS[EDGES[edge].target], 2)


def test_likelihood_pm_coefficients_are_spectrum(mixture):
    pm = expand(apply_edge(mixture, 5))
    assert pm.coefficient(()) == Fraction(1, 4)
    assert pm.evaluate([1, 1]) == Fraction(9, 100)
    assert pm.evaluate([-1, -1]) == Fraction(9, 20)


def test_wrong_source_tag(mixture):
    with pytest.raises(SemanticsMismatch):
        apply_edge(mixture, 2)


def test_raw_needs_force(mixture):
    raw = mixture.with_semantics(RAW)
    with pytest.raises(SemanticsMismatch):
        apply_edge(raw, 5)
    assert apply_edge(raw, 5, force=True).semantics == LIKELIHOOD_PM


def test_unknown_edge(mixture):
    with pytest.raises(RouteError):
        apply_edge(mixture, 13)


class TestDomainSwap:
    def test_inferred_directions(self, mixture):
        pm = domain_swap(mixture)
        assert pm.semantics == LIKELIHOOD_PM
        assert domain_swap(pm).semantics == LIKELIHOOD

    def test_round_trip_is_identity(self, mixture):
        back = domain_swap(domain_swap(mixture))
        assert expand(back) == expand(mixture)

    def test_fourier_goes_raw(self):
        d = DistTable.random(2, random.Random(3))
        out = domain_swap(encode(d, FOURIER))
        assert out.semantics == RAW

    def test_raw_needs_direction(self, mixture):
        with pytest.raises(SemanticsMismatch):
            domain_swap(mixture.with_semantics(RAW))
        assert domain_swap(mixture.with_semantics(RAW), "from_pm").semantics == RAW

    def test_bars_rejected(self, mixture):
        with pytest.raises(SemanticsMismatch):
            domain_swap(apply_edge(mixture, 4))


class TestRoutes:
    @pytest.mark.parametrize("source, target, route", [
        (GENERATING, LIKELIHOOD, (1, 3)),
        (LIKELIHOOD, GENERATING, (4, 2)),
        (FOURIER, GENERATING, (11,)),
        (LIKELIHOOD, FOURIER_IND, (5, 7)),
        (FOURIER_IND, LIKELIHOOD, (8, 6)),
        (NETWORK, NETWORK, ()),
    ])
    def test_min_edges(self, source, target, route):
        assert plan_route(source, target) == route

    def test_min_size_prefers_leaf_edges(self):
        # two starred edges cost more than three leaf edges plus one starred
        assert plan_route(FOURIER, NETWORK, "min_size", n=4) == (11, 1)
        assert plan_route(FOURIER_IND, GENERATING, "min_size", n=4) == (9, 11)

    def test_check_route(self):
        assert check_route(LIKELIHOOD, (4, 2)) == GENERATING
        with pytest.raises(RouteError):
            check_route(LIKELIHOOD, (2,))

    def test_parse_format(self):
        assert parse_route(" 4,2 ") == (4, 2)
        assert parse_route("") == ()
        assert format_route((1, 3)) == "1,3"
        with pytest.raises(RouteError):
            parse_route("4;2")

    def test_raw_not_a_vertex(self):
        with pytest.raises(RouteError):
            plan_route(RAW, LIKELIHOOD)

    def test_apply_route_stages(self, mixture):
        stages = apply_route(mixture, (4, 2), keep_intermediate=True)
        assert [s.semantics for s in stages] == [LIKELIHOOD, NETWORK, GENERATING]
        assert expand(stages[-1]) == parse_poly(MIXTURE_POLYS[GENERATING], 2)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 3),
       edge=st.sampled_from([2, 3, 5, 6, 8, 9, 11, 12]))
def test_leaf_edges_preserve_distribution(seed, n, edge):
    d = DistTable.random(n, random.Random(seed))
    out = apply_edge(encode(d, EDGES[edge].source), edge)
    assert expand(out) == tagged_poly(d, EDGES[edge].target)


def test_leaf_edge_size_growth(rng):
    from polysem.generators import random_decomposable

    for _ in range(20):
        for edge in (3, 5, 6, 11, 12):
            c = random_decomposable(rng.randint(1, 5), EDGES[edge].source, rng)
            out = apply_edge(c, edge)
            assert out.size <= c.size + 4 * len(c.leaves()) + 4
