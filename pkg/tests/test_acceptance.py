"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
every criterion again at the end.
"""

import json
import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from polysem.circuit import (
    DISTRIBUTION_TAGS,
    FOURIER,
    GENERATING,
    LIKELIHOOD,
    LIKELIHOOD_PM,
    NETWORK,
    RAW,
    Sum,
    evaluate,
)
from polysem.division_elim import (
    STARRED_EDGES,
    GadgetKind,
    builtin_shift,
    eliminate_division,
    find_shift,
    homogenize,
    introduce_gadgets,
    pull_up,
)
from polysem.errors import DivideByZero
from polysem.fixtures import SINGLE_COLUMN, mixture_example
from polysem.generators import random_circuit, random_decomposable, sized_family
from polysem.hardness import (
    IntMatrix,
    coefficient_of_all_ones,
    sparsify,
    valiant_circuit,
)
from polysem.inference import (
    all_queries,
    fourier_marginals,
    generating_marginals,
    likelihood_marginals,
    network_marginals,
)
from polysem.leaf_transforms import EDGES, apply_edge
from polysem.oracle import (
    DistTable,
    SparsePoly,
    dist_from,
    encode,
    expand,
    fourier_of,
    identical,
    parse_poly,
    permanent,
    tagged_poly,
    to_circuit,
)
from polysem.structured import (
    Gadget,
    fourier_leaves,
    is_decomposable,
    is_smooth,
    skeleton_preserved,
    smooth_complete,
)

GOLDEN = Path(__file__).parent / "golden"
SOURCE_TAGS = {e: (src, tgt) for e, (src, tgt, _) in STARRED_EDGES.items()}
SMOOTHING = {
    LIKELIHOOD: (4, Gadget.INDICATOR_PAIR),
    GENERATING: (1, Gadget.BAR_ONLY),
    LIKELIHOOD_PM: (7, Gadget.BAR_ONLY),
    FOURIER: (10, Gadget.INDICATOR_PAIR),
}


def random_tables(count=200, seed=2024):
    """``count`` random tables cycling through n = 1..6."""
    rng = random.Random(seed)
    return [DistTable.random(1 + k % 6, rng) for k in range(count)]


def test_criterion_1_golden_example(acceptance):
    with acceptance(1, "two-variable golden example"):
        start = time.perf_counter()
        given = parse_poly("0.08x1x2 + 0.16x1 + 0.12x2 + 0.09", 2)
        expected = parse_poly("45/100 x1 x2 + 25/100 x1 ~x2 + 21/100 ~x1 x2 + 9/100 ~x1 ~x2", 2)
        for c in (to_circuit(given, LIKELIHOOD, 2), mixture_example()):
            out = apply_edge(c, 4)
            assert out.semantics == NETWORK
            assert not out.has_division
            assert expand(out) == expected
        took = time.perf_counter() - start
        acceptance.detail = f"edge 4 on both circuits in {took:.3f}s"
        assert took < 1.0


def test_criterion_2_edge_commutation(acceptance):
    with acceptance(2, "twelve-edge commutation"):
        start = time.perf_counter()
        checked = 0
        for d in random_tables():
            for tag in DISTRIBUTION_TAGS:
                c = encode(d, tag)
                for e1, first in EDGES.items():
                    if first.source != tag:
                        continue
                    once = apply_edge(c, e1)
                    assert dist_from(once) == d, (d.n, tag, e1)
                    checked += 1
                    for e2, second in EDGES.items():
                        if second.source != first.target:
                            continue
                        assert dist_from(apply_edge(once, e2)) == d, (d.n, tag, e1, e2)
                        checked += 1
        took = time.perf_counter() - start
        acceptance.detail = f"{checked} transformed circuits"
        assert took < 300


def test_criterion_3_inference_agreement(acceptance):
    with acceptance(3, "four-way inference agreement"):
        queries_checked = 0
        for d in random_tables():
            queries = list(all_queries(d.n))
            brute = [d.marginal(q.ones, q.zeros) for q in queries]
            answers = [
                network_marginals(encode(d, NETWORK), queries),
                likelihood_marginals(encode(d, LIKELIHOOD), queries),
                generating_marginals(encode(d, GENERATING), queries),
                fourier_marginals(encode(d, FOURIER), queries),
            ]
            for got in answers:
                assert got == brute
            everything = queries[-1]
            assert len(everything.marginalized) == d.n
            assert all(a[-1] == 1 for a in answers)
            queries_checked += len(queries)
        acceptance.detail = f"{queries_checked} queries x 4 semantics"


def _gadget_inputs(count, seed):
    rng = random.Random(seed)
    sources = [LIKELIHOOD, GENERATING, LIKELIHOOD_PM, FOURIER]
    for k in range(count):
        n = 1 + k % 4
        tag = sources[k % 4]
        if k % 3 == 0:
            yield tag, encode(DistTable.random(n, rng), tag)
        else:
            yield tag, random_decomposable(n, tag, rng, noise=k % 3 == 1)


def test_criterion_4_strassen_soundness(acceptance):
    edge_of = {src: e for e, (src, _) in SOURCE_TAGS.items()}
    with acceptance(4, "division elimination soundness"):
        count = 0
        for tag, c in _gadget_inputs(120, seed=99):
            n = c.n
            edge = edge_of[tag]
            _, target, kind = STARRED_EDGES[edge]
            split = pull_up(introduce_gadgets(c, kind))
            A, B = expand(split.numerator()), expand(split.denominator())
            quotient = eliminate_division(split, n, builtin_shift(n), homogeneous_target=True)
            assert not quotient.has_division
            Q = expand(quotient)
            assert A == B * Q
            want = tagged_poly(dist_from(c), target)
            assert Q == want
            general = eliminate_division(split, n, find_shift(split, seed=count))
            assert not general.has_division
            assert expand(general) == want
            for f in (split.numerator(), c):
                d = expand(f).degree
                stack = homogenize(f, d)
                total = SparsePoly({}, f.n)
                for i in range(d + 1):
                    part = expand(stack.part(i))
                    assert part.is_homogeneous(i) or not part.terms
                    total = total + part
                assert total == expand(f)
            count += 1
        acceptance.detail = f"{count} gadget circuits"
        assert count >= 100


def test_criterion_5_size_bounds(acceptance):
    golden = json.loads((GOLDEN / "strassen_size_constant.json").read_text())
    C = golden["C"]
    with acceptance(5, "size-bound regression"):
        rng = random.Random(5)
        worst = 0.0
        circuits = 0
        for k in range(56):
            n = 2 + k % 7
            for edge, (tag, _) in SOURCE_TAGS.items():
                c = sized_family(n, tag, rng, lo=20, hi=500)
                assert 20 <= c.size <= 500
                s = c.size
                out = apply_edge(c, edge)
                ratio = out.size / (s * (n + 1) ** 2)
                worst = max(worst, ratio)
                assert out.size <= C * s * (n + 1) ** 2, (edge, n, s, out.size)
                for source in (c, out):
                    for e, info in EDGES.items():
                        if info.source == source.semantics and not info.starred:
                            leafy = apply_edge(source, e)
                            assert leafy.size <= source.size + 4 * len(source.leaves()) + 4
                if tag in SMOOTHING:
                    _, gadget = SMOOTHING[tag]
                    smooth = smooth_complete(c, gadget)
                    sum_edges = sum(len(v.children) for v in c.nodes if type(v) is Sum)
                    assert smooth.size <= s + 3 * n * sum_edges
                circuits += 1
        acceptance.detail = f"{circuits} circuits, max ratio {worst:.3f} <= C = {C}"


def test_criterion_6_decomposable_fast_paths(acceptance):
    with acceptance(6, "decomposable fast-path equivalence"):
        rng = random.Random(66)
        tags = list(SMOOTHING)
        for k in range(120):
            n = 1 + k % 5
            tag = tags[k % 4]
            edge, gadget = SMOOTHING[tag]
            c = random_decomposable(n, tag, rng, absorb_gaps=k % 2 == 0)
            smooth = smooth_complete(c, gadget)
            assert is_smooth(smooth)[0]
            assert is_decomposable(smooth)[0]
            assert identical(smooth, apply_edge(c, edge))[0]
        for k in range(110):
            n = 1 + k % 6
            c = random_decomposable(n, LIKELIHOOD, rng, absorb_gaps=True)
            out, mapping = fourier_leaves(c, return_map=True)
            assert out.semantics == FOURIER
            assert expand(out) == fourier_of(dist_from(c))
            assert skeleton_preserved(c, out, mapping)
        acceptance.detail = "120 smoothing + 110 Fourier-leaf circuits"


def _matrices_up_to(order):
    for n in range(1, order + 1):
        for bits in range(1 << (n * n)):
            yield IntMatrix.of([[(bits >> (n * i + j)) & 1 for j in range(n)]
                                for i in range(n)])


def _check_reduction(M):
    sparse, trace = sparsify(M)
    n = M.order
    assert permanent(sparse.rows) == permanent(M.rows)
    assert max(sparse.column_counts()) <= 3
    assert sparse.order <= n + n * n
    assert trace.replay(M) == sparse
    assert coefficient_of_all_ones(valiant_circuit(sparse)) == permanent(M.rows)


def test_criterion_7_permanent_reduction(acceptance):
    with acceptance(7, "permanent reduction"):
        start = time.perf_counter()
        exhaustive = 0
        for M in _matrices_up_to(4):
            _check_reduction(M)
            exhaustive += 1
        rng = random.Random(77)
        for k in range(60):
            n = 5 + k % 3
            _check_reduction(IntMatrix.random(n, rng, density=rng.choice([0.4, 0.6, 0.8])))
        fig = IntMatrix.of(SINGLE_COLUMN)
        sparse, trace = sparsify(fig)
        assert sparse.order == 5 and len(trace) == 1
        assert sparse.column_counts()[1] == 3
        assert sparse.rows == (
            (0, 0, 0, 0, 1),
            (0, 0, 0, 0, 1),
            (0, 1, 0, 0, 0),
            (0, 1, 0, 0, 0),
            (0, 1, 0, 0, 1),
        )
        assert permanent(sparse.rows) == permanent(fig.rows) == 0
        took = time.perf_counter() - start
        acceptance.detail = f"{exhaustive} exhaustive + 60 random matrices"
        assert took < 120


def test_criterion_8_division_by_zero_contract(acceptance):
    with acceptance(8, "division-by-zero contract"):
        rng = random.Random(8)
        checked = 0
        for k in range(40):
            n = 1 + k % 4
            tag = (GENERATING, LIKELIHOOD_PM)[k % 2]
            edge = 1 if tag == GENERATING else 7
            c = random_decomposable(n, tag, rng) if k % 3 else encode(DistTable.random(n, rng), tag)
            # a gadget exists for every variable that occurs in c
            present = sorted({c.nodes[i].index for i in c.leaves()})
            if not present:
                continue
            gadgets = introduce_gadgets(c, GadgetKind.COEFFICIENT_EXTRACTION)
            out = apply_edge(c, edge)
            for _ in range(3):
                x = [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]
                xb = [Fraction(rng.randint(1, 4)) for _ in range(n)]
                xb[rng.choice(present) - 1] = Fraction(0)
                with pytest.raises(DivideByZero):
                    evaluate(gadgets, x, xb)
                evaluate(out, x, xb)
                checked += 1
        acceptance.detail = f"{checked} points"
        assert checked >= 100


def _perturbed(p: SparsePoly, rng) -> SparsePoly:
    terms = dict(p.terms)
    if terms and rng.random() < 0.7:
        m = rng.choice(sorted(terms))
    else:
        m = ((rng.randrange(2 * max(p.n, 1)), rng.randint(1, 2)),)
    delta = Fraction(rng.choice([-1, 1]) * rng.randint(1, 5), rng.randint(1, 4))
    terms[m] = terms.get(m, 0) + delta
    return SparsePoly(terms, p.n)


def test_criterion_9_identity_calibration(acceptance):
    with acceptance(9, "identity tester calibration"):
        rng = random.Random(9)
        equal = different = 0
        for k in range(1000):
            n = 1 + k % 4
            a = random_circuit(n, rng, size=rng.randint(3, 10), bars=k % 2 == 0)
            p = expand(a)
            if k % 2 == 0:
                b = to_circuit(p, RAW, n)
            else:
                b = to_circuit(_perturbed(p, rng), RAW, n)
            exact, _ = identical(a, b, mode="exact")
            prob, _ = identical(a, b, mode="probabilistic", trials=8, seed=k)
            assert exact == prob, k
            assert exact == (k % 2 == 0)
            equal += exact
            different += not exact
        acceptance.detail = f"{equal} equal, {different} different pairs"
