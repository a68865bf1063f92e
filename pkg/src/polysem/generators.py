"""Seeded random circuits for property tests and the ``oracle random`` command."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

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
)
from .oracle import DistTable, encode

HALF = Fraction(1, 2)


def random_theta(rng: random.Random, denominator: int = 20) -> Fraction:
    return Fraction(rng.randint(0, denominator), denominator)


def random_weights(rng: random.Random, k: int, denominator: int = 12) -> list[Fraction]:
    raw = [rng.randint(1, denominator) for _ in range(k)]
    total = sum(raw)
    return [Fraction(r, total) for r in raw]


# One-variable factor with Pr(X_i = 1) = theta, per semantics.
def _leaf_factor(tag: Semantics, b: Builder, i: int, theta: Fraction) -> int:
    one, x = b.const(1), b.var(i)
    if tag == LIKELIHOOD:
        return b.sum([(2 * theta - 1, x), (1 - theta, one)])
    if tag == GENERATING:
        return b.sum([(theta, x), (1 - theta, one)])
    if tag == NETWORK:
        return b.sum([(theta, x), (1 - theta, b.var(i, True))])
    if tag == LIKELIHOOD_PM:
        return b.sum([(-(2 * theta - 1) / 2, x), (HALF, one)])
    if tag == FOURIER:
        return b.sum([(-theta, x), (HALF, one)])
    if tag == FOURIER_IND:
        return b.sum([(HALF - theta, x), (HALF, b.var(i, True))])
    raise ValueError(f"no leaf factor for {tag}")


# Constant factor standing for a variable left out of a mixture component:
# likelihood and likelihood_pm read it as uniform, generating and fourier as
# X_i = 0. Two-polarity semantics have no constant gap factor.
GAP_FACTOR = {
    LIKELIHOOD: HALF,
    LIKELIHOOD_PM: HALF,
    GENERATING: Fraction(1),
    FOURIER: HALF,
}


def random_decomposable(n: int, tag: Semantics, rng: random.Random, *,
                        depth: int = 3, max_width: int = 3, gap_prob: float = 0.3,
                        absorb_gaps: bool = False, noise: bool = False) -> Circuit:
    """Random decomposable circuit encoding a proper distribution.

    Built from mixtures (sums with convex weights) and products over
    disjoint scopes of one-variable factors. For single-polarity semantics
    mixture components may skip variables; the skipped variables are
    accounted for either by folding the gap factor into the sum weight or,
    with ``absorb_gaps``, by a constant factor in a product.

    ``noise`` adds (x_i + x_j)^2 - (x_i^2 + 2x_i x_j + x_j^2) at the root,
    which leaves the polynomial unchanged but breaks decomposability.
    """
    b = Builder(dedupe=False)
    allow_gaps = tag in GAP_FACTOR

    def node(scope: list[int], level: int) -> int:
        if len(scope) == 1 and (level >= depth or rng.random() < 0.5):
            return _leaf_factor(tag, b, scope[0], random_theta(rng))
        if level >= depth:
            return b.mul([_leaf_factor(tag, b, i, random_theta(rng)) for i in scope])
        if len(scope) > 1 and rng.random() < 0.5:
            parts = _split(scope, rng, max_width)
            return b.mul([node(p, level + 1) for p in parts])
        k = rng.randint(2, max_width)
        terms = []
        for w in random_weights(rng, k):
            sub = list(scope)
            if allow_gaps and len(scope) > 1 and rng.random() < gap_prob:
                drop = rng.sample(scope, rng.randint(1, len(scope) - 1))
                sub = [i for i in scope if i not in drop]
                factor = GAP_FACTOR[tag] ** len(drop)
                child = node(sub, level + 1)
                if absorb_gaps or rng.random() < 0.5:
                    terms.append((w, b.mul([b.const(factor), child])))
                else:
                    terms.append((w * factor, child))
            else:
                terms.append((w, node(sub, level + 1)))
        return b.sum(terms)

    if n == 0:
        return b.build(b.const(1), 0, tag)
    root = node(list(range(1, n + 1)), 0)
    if noise and n >= 2:
        root = _add_noise(b, root, rng, n)
    return b.build(root, n, tag)


def _split(scope: list[int], rng: random.Random, max_width: int) -> list[list[int]]:
    scope = list(scope)
    rng.shuffle(scope)
    k = rng.randint(2, min(max_width, len(scope)))
    cuts = sorted(rng.sample(range(1, len(scope)), k - 1))
    parts = [sorted(scope[i:j]) for i, j in zip([0] + cuts, cuts + [len(scope)])]
    return parts


def _add_noise(b: Builder, root: int, rng: random.Random, n: int) -> int:
    i, j = rng.sample(range(1, n + 1), 2)
    xi, xj = b.var(i), b.var(j)
    s = b.sum([(1, xi), (1, xj)])
    square = b.mul([s, s])
    expanded = b.sum([(1, b.mul([xi, xi])), (2, b.mul([xi, xj])), (1, b.mul([xj, xj]))])
    return b.sum([(1, root), (1, square), (-1, expanded)])


def random_circuit(n: int, rng: random.Random, size: int = 12, bars: bool = False,
                   max_weight: int = 5, tag: Semantics = RAW) -> Circuit:
    """Random DAG (not a distribution) for ring-homomorphism style tests."""
    b = Builder(dedupe=False)
    pool = [b.const(Fraction(rng.randint(-max_weight, max_weight), rng.randint(1, 3)))]
    for i in range(1, n + 1):
        pool.append(b.var(i))
        if bars:
            pool.append(b.var(i, True))
    for _ in range(size):
        k = rng.randint(1, 3)
        picks = [rng.choice(pool[-8:] if rng.random() < 0.6 else pool) for _ in range(k)]
        if rng.random() < 0.5:
            node = b.sum([(Fraction(rng.randint(-max_weight, max_weight) or 1, rng.randint(1, 3)), p)
                          for p in picks])
        else:
            node = b.mul(picks)
        pool.append(node)
    return b.build(pool[-1], n, tag)


def random_encoded(n: int, tag: Semantics, rng: random.Random) -> tuple[DistTable, Circuit]:
    d = DistTable.random(n, rng)
    return d, encode(d, tag)


def sized_family(n: int, tag: Semantics, rng: random.Random, lo: int = 20, hi: int = 500,
                 factory: Callable | None = None, tries: int = 400) -> Circuit:
    """A random circuit from ``factory`` whose size lies in [lo, hi].

    A target size is drawn uniformly from the band and depth/width are
    nudged towards it, so repeated calls cover the whole range.
    """
    factory = factory or random_decomposable
    target = rng.randint(lo, hi)
    depth, width = 2, 3
    fallback = None
    for _ in range(tries):
        c = factory(n, tag, rng, depth=depth, max_width=width)
        if lo <= c.size <= hi:
            if abs(c.size - target) <= max(15, target // 3):
                return c
            fallback = fallback or c
        if c.size < target:
            if depth < 8:
                depth += 1
            else:
                width = min(width + 1, 6)
        else:
            if width > 2:
                width -= 1
            else:
                depth = max(depth - 1, 1)
    if fallback is not None:
        return fallback
    raise RuntimeError(f"could not generate a circuit with size in [{lo}, {hi}]")
