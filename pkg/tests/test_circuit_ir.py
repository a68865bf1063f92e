from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polysem.circuit import (
    GENERATING,
    LIKELIHOOD,
    MERSENNE61,
    NETWORK,
    RAW,
    Builder,
    Const,
    Div,
    Prod,
    Sum,
    Var,
    build,
    constant_term,
    evaluate,
    evaluate_many,
    evaluate_mod,
    parse_semantics,
    rational,
    scopes,
    to_residue,
    variable_degree_bounds,
)
from polysem.errors import (
    CycleError,
    DanglingChildError,
    DivideByZero,
    EmptyChildrenError,
    NonInvertibleWeight,
    PolarityError,
)
from polysem.generators import random_circuit
from polysem.oracle import expand
from polysem.division_elim import GadgetKind, introduce_gadgets


class TestRational:
    def test_decimal_literal_is_exact(self):
        assert rational("0.08") == Fraction(2, 25)

    def test_reduced(self):
        q = rational("6/8")
        assert (q.numerator, q.denominator) == (3, 4)

    def test_float_rejected(self):
        with pytest.raises(TypeError):
            rational(0.5)


class TestBuild:
    def test_constant_n0(self):
        c = build([Const(Fraction(1))], 0, 0, GENERATING)
        assert c.size == 0
        assert evaluate(c) == 1

    def test_mixture_shape(self, mixture):
        assert mixture.semantics == LIKELIHOOD
        assert mixture.n == 2
        assert mixture.size == 12

    def test_bar_leaf_under_generating(self):
        with pytest.raises(PolarityError):
            build([Var(1, True)], 0, 1, GENERATING)

    def test_bar_leaf_under_network_ok(self):
        c = build([Var(1, True)], 0, 1, NETWORK)
        assert c.has_bar

    def test_forward_reference_is_cycle(self):
        with pytest.raises(CycleError):
            build([Prod((1,)), Var(1)], 0, 1)

    def test_dangling(self):
        with pytest.raises(DanglingChildError):
            build([Var(1), Prod((0, 5))], 1, 1)

    def test_empty_children(self):
        with pytest.raises(EmptyChildrenError):
            build([Sum(())], 0, 0)

    def test_unreachable_nodes_dropped(self):
        c = build([Var(1), Var(2), Prod((0, 0))], 2, 2)
        assert len(c) == 2

    def test_hash_consing(self):
        b = Builder()
        x = b.var(1)
        s1 = b.sum([(1, x), (2, b.const(1))])
        s2 = b.sum([(1, x), (2, b.const(1))])
        assert s1 == s2
        plain = Builder(dedupe=False)
        y = plain.var(1)
        assert plain.var(1) != y

    def test_division_gate(self):
        b = Builder()
        d = b.div(b.var(1), b.var(1, True))
        with pytest.raises(Exception):
            b.build(d, 1, RAW, divisions_allowed=False)
        assert b.build(d, 1, RAW).divisions_allowed


class TestScopes:
    def test_const_empty(self):
        c = build([Const(Fraction(3))], 0, 0)
        assert scopes(c)[c.root] == frozenset()

    def test_product_of_plain_and_bar(self):
        c = build([Var(1), Var(2, True), Prod((0, 1))], 2, 2, NETWORK)
        assert scopes(c)[c.root] == {1, 2}

    def test_mixture_root(self, mixture):
        assert scopes(mixture)[mixture.root] == {1, 2}


class TestEvaluate:
    def test_mixture_at_ones(self, mixture):
        assert evaluate(mixture, [1, 1]) == Fraction(9, 20)

    def test_constant_term(self, mixture):
        assert constant_term(mixture) == Fraction(9, 100)

    def test_gadget_division_by_zero(self, mixture):
        g = introduce_gadgets(mixture.with_semantics(GENERATING), GadgetKind.COEFFICIENT_EXTRACTION)
        with pytest.raises(DivideByZero) as info:
            evaluate(g, [1, 1], [0, 1])
        assert type(g.nodes[info.value.node_id]) is Div

    def test_many_matches_single(self, mixture):
        pts = [[0, 0], [1, 0], ["1/3", 2], [-5, "7/2"]]
        assert evaluate_many(mixture, pts) == [evaluate(mixture, p) for p in pts]

    def test_deterministic(self, mixture):
        assert evaluate(mixture, ["2/7", "3/5"]) == evaluate(mixture, ["2/7", "3/5"])


class TestModular:
    def test_constant(self):
        c = build([Const(Fraction(3, 4))], 0, 0)
        assert evaluate_mod(c) == 3 * pow(4, -1, MERSENNE61) % MERSENNE61

    def test_mixture_residue(self, mixture):
        assert evaluate_mod(mixture, [1, 1]) == to_residue(Fraction(9, 20))

    def test_non_invertible(self):
        with pytest.raises(NonInvertibleWeight):
            to_residue(Fraction(1, MERSENNE61))


class TestDegrees:
    def test_variable_degree_bounds(self):
        b = Builder()
        x = b.var(1)
        s = b.sum([(1, x), (1, b.var(2))])
        c = b.build(b.mul([s, s, x]), 2)
        assert variable_degree_bounds(c) == {Var(1): 3, Var(2): 2}


def test_parse_semantics():
    assert parse_semantics("categorical_generating k=4").k == 4
    assert parse_semantics("likelihood_pm").name == "likelihood_pm"
    with pytest.raises(ValueError):
        parse_semantics("bogus")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 4),
       point=st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5),
                      min_size=8, max_size=8))
def test_evaluate_agrees_with_expansion(seed, n, point):
    import random

    c = random_circuit(n, random.Random(seed), size=10, bars=True)
    x, xb = point[:n], point[4:4 + n]
    assert evaluate(c, x, xb) == expand(c).evaluate(x, xb)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), values=st.lists(st.integers(-50, 50), min_size=6, max_size=6))
def test_mod_agrees_with_exact(seed, values):
    import random

    c = random_circuit(3, random.Random(seed), size=10, bars=True)
    x, xb = values[:3], values[3:]
    assert evaluate_mod(c, x, xb) == to_residue(evaluate(c, x, xb))
