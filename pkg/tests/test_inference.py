from fractions import Fraction
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polysem.circuit import FOURIER, GENERATING, LIKELIHOOD, LIKELIHOOD_PM, NETWORK
from polysem.errors import ParseError, SemanticsMismatch
from polysem.inference import (
    Query,
    State,
    all_queries,
    compile_for_queries,
    marginal,
    marginal_fourier,
    marginal_generating,
    marginal_likelihood,
    marginal_network,
    marginals,
    parse_query,
)
from polysem.leaf_transforms import apply_edge
from polysem.oracle import DistTable, dist_from, encode


class TestQuery:
    def test_parse(self):
        q = parse_query("1 ? 0")
        assert q.ones == [1] and q.marginalized == [2] and q.zeros == [3]
        assert str(q) == "1 ? 0"

    def test_bad_token(self):
        with pytest.raises(ParseError):
            parse_query("1 x")

    def test_length_checked(self):
        with pytest.raises(ParseError):
            parse_query("1 ?", 3)

    def test_relax_and_fix(self):
        q = parse_query("1 0")
        assert str(q.relax(1)) == "? 0"
        assert str(q.fix(2, State.ONE)) == "1 1"

    def test_all_queries(self):
        assert len(list(all_queries(3))) == 27


class TestMixture:
    def test_likelihood(self, mixture):
        assert marginal(mixture, parse_query("1 ?")) == Fraction(7, 10)
        assert marginal(mixture, parse_query("? ?")) == 1
        assert marginal(mixture, parse_query("0 0")) == Fraction(9, 100)

    def test_network(self, mixture):
        net = apply_edge(mixture, 4)
        assert marginal_network(net, parse_query("1 ?")) == Fraction(7, 10)
        assert marginal_network(net, parse_query("? 1")) == Fraction(33, 50)

    def test_generating(self, mixture):
        g = apply_edge(apply_edge(mixture, 4), 2)
        assert marginal_generating(g, parse_query("1 1")) == Fraction(9, 20)
        assert marginal_generating(g, parse_query("? 0")) == Fraction(17, 50)

    def test_fourier(self, mixture):
        f = encode(dist_from(mixture), FOURIER)
        assert marginal_fourier(f, parse_query("1 ?")) == Fraction(7, 10)

    def test_semantics_checked(self, mixture):
        with pytest.raises(SemanticsMismatch):
            marginal_network(mixture, parse_query("1 ?"))
        with pytest.raises(SemanticsMismatch):
            marginals(encode(dist_from(mixture), LIKELIHOOD_PM), [parse_query("1 ?")])

    def test_query_length(self, mixture):
        with pytest.raises(SemanticsMismatch):
            marginal_likelihood(mixture, Query((State.ONE,)))


class TestCompile:
    @pytest.mark.parametrize("tag, target", [
        (FOURIER, GENERATING), (GENERATING, NETWORK), (LIKELIHOOD, NETWORK), (NETWORK, NETWORK),
    ], ids=str)
    def test_targets(self, tag, target):
        d = DistTable.random(3, random.Random(1))
        compiled = compile_for_queries(encode(d, tag))
        assert compiled.semantics == target
        queries = list(all_queries(3))
        assert marginals(compiled, queries) == [d.marginal(q.ones, q.zeros) for q in queries]


def test_empty_batch(mixture):
    assert marginals(mixture, []) == []


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(0, 4))
def test_semantics_agree(seed, n):
    d = DistTable.random(n, random.Random(seed))
    queries = list(all_queries(n))
    truth = [d.marginal(q.ones, q.zeros) for q in queries]
    for tag in (NETWORK, LIKELIHOOD, GENERATING, FOURIER):
        assert marginals(encode(d, tag), queries) == truth


def test_generating_with_negative_weights():
    # a circuit with cancelling weights still gives exact marginals
    from polysem.generators import random_decomposable

    rng = random.Random(4)
    c = random_decomposable(4, GENERATING, rng, noise=True)
    d = dist_from(c)
    for q in all_queries(4):
        assert marginal_generating(c, q) == d.marginal(q.ones, q.zeros)
