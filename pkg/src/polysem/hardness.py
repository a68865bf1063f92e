"""Permanent of a 0/1 matrix as one coefficient of a categorical generating
circuit.

``sparsify`` rewrites a matrix so every column has at most three nonzeros
without changing its permanent; the product of row sums of the result is then
a generating polynomial with every variable of degree at most 3 (four
categories), and its x_1...x_n coefficient is the permanent.

Row and column indices in traces are 0-based.
"""

from __future__ import annotations

from random import Random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .circuit import RAW, Builder, Circuit, categorical_generating, variable_degree_bounds
from .errors import DegreeViolation, SemanticsMismatch
from .oracle import DEFAULT_MAX_TERMS, coefficient, contributing_permutations, monomial

MAX_COLUMN = 3


@dataclass(frozen=True)
class IntMatrix:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("matrix must be square")
        if any(v not in (0, 1) for r in rows for v in r):
            raise ValueError("matrix entries must be 0 or 1")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def of(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def parse(cls, text: str) -> "IntMatrix":
        rows = [line.split() for line in text.splitlines()
                if line.split("#", 1)[0].strip()]
        try:
            return cls.of([int(v) for v in r] for r in rows)
        except ValueError as exc:
            raise ValueError(f"bad matrix: {exc}") from None

    @classmethod
    def random(cls, n: int, rng: Random, density: float = 0.5) -> "IntMatrix":
        return cls.of([[1 if rng.random() < density else 0 for _ in range(n)] for _ in range(n)])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.of([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def ones(cls, n: int) -> "IntMatrix":
        return cls.of([[1] * n for _ in range(n)])

    @property
    def order(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij) -> int:
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> list[int]:
        return [r[j] for r in self.rows]

    def column_counts(self) -> list[int]:
        return [sum(r[j] for r in self.rows) for j in range(self.order)]

    def dumps(self) -> str:
        return "".join(" ".join(map(str, r)) + "\n" for r in self.rows)


@dataclass(frozen=True)
class SparsifyStep:
    t: int      # column being thinned
    a: int      # rows whose entries in column t move
    b: int
    order: int  # order after the step


@dataclass(frozen=True)
class SparsifyTrace:
    steps: tuple[SparsifyStep, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.steps)

    def replay(self, M: IntMatrix) -> IntMatrix:
        for s in self.steps:
            M = sparsify_step(M, s.t, s.a, s.b)
            if M.order != s.order:
                raise ValueError("trace does not match the matrix")
        return M

    def dumps(self) -> str:
        return "".join(f"step {k + 1}: column {s.t} rows {s.a},{s.b} -> order {s.order}\n"
                       for k, s in enumerate(self.steps))


def sparsify_step(M: IntMatrix, t: int, a: int, b: int) -> IntMatrix:
    """Move entries (a, t) and (b, t) out of column t.

    Both are zeroed; a new row has a 1 in column t, a new column has 1s in
    rows a and b, and the new diagonal entry is 1.
    """
    if a == b or not (M[a, t] and M[b, t]):
        raise ValueError(f"rows {a} and {b} must be distinct nonzeros of column {t}")
    n = M.order
    rows = [list(r) + [0] for r in M.rows]
    rows[a][t] = rows[b][t] = 0
    rows[a][n] = rows[b][n] = 1
    new = [0] * (n + 1)
    new[t] = 1
    new[n] = 1
    rows.append(new)
    return IntMatrix.of(rows)


def sparsify(M: IntMatrix | Sequence[Sequence[int]]) -> tuple[IntMatrix, SparsifyTrace]:
    """Thin every column to at most three nonzeros, preserving the permanent.

    Columns are processed left to right; within a column the two smallest
    nonzero row indices are moved first.
    """
    if not isinstance(M, IntMatrix):
        M = IntMatrix.of(M)
    steps = []
    t = 0
    while t < M.order:
        col = M.column(t)
        while sum(col) > MAX_COLUMN:
            a, b = [i for i, v in enumerate(col) if v][:2]
            M = sparsify_step(M, t, a, b)
            steps.append(SparsifyStep(t, a, b, M.order))
            col = M.column(t)
        t += 1
    return M, SparsifyTrace(tuple(steps))


def valiant_circuit(M: IntMatrix | Sequence[Sequence[int]]) -> Circuit:
    """Product over rows of sum_j M[i][j] x_{j+1}, tagged categorical k=4."""
    if not isinstance(M, IntMatrix):
        M = IntMatrix.of(M)
    counts = M.column_counts()
    for j, k in enumerate(counts):
        if k > MAX_COLUMN:
            raise DegreeViolation(f"column {j} has {k} nonzeros; x{j + 1} would have degree "
                                  f"{k} > {MAX_COLUMN}")
    b = Builder()
    if M.order == 0:
        return b.build(b.const(1), 0, categorical_generating(4))
    factors = []
    for row in M.rows:
        cols = [j for j, v in enumerate(row) if v]
        if not cols:
            factors.append(b.const(0))
        elif len(cols) == 1:
            factors.append(b.var(cols[0] + 1))
        else:
            factors.append(b.sum([(1, b.var(j + 1)) for j in cols]))
    root = factors[0] if len(factors) == 1 else b.mul(factors)
    c = b.build(root, M.order, categorical_generating(4))
    worst = max(variable_degree_bounds(c).values(), default=0)
    if worst > MAX_COLUMN:
        raise DegreeViolation(f"variable degree {worst} exceeds {MAX_COLUMN}")
    return c


def coefficient_of_all_ones(c: Circuit, n: int | None = None,
                            max_terms: int = DEFAULT_MAX_TERMS) -> Fraction:
    """Coefficient of x_1 x_2 ... x_n, by truncated expansion."""
    if c.semantics.name != "categorical_generating" and c.semantics != RAW:
        raise SemanticsMismatch(f"expected a categorical generating circuit, got {c.semantics}")
    n = c.n if n is None else n
    return coefficient(c, monomial(range(1, n + 1)), max_terms)


def step_bijection(M: IntMatrix, t: int, a: int, b: int) -> dict[tuple, tuple]:
    """Map contributing permutations of M to those of one sparsify step.

    A permutation sending a (or b) to t is rerouted through the new column;
    every other one additionally sends the new row to the new column.
    """
    n = M.order
    out = {}
    for sigma in contributing_permutations(M.rows):
        image = list(sigma) + [n]
        for r in (a, b):
            if sigma[r] == t:
                image[r] = n
                image[n] = t
        out[sigma] = tuple(image)
    return out


def check_step_bijection(M: IntMatrix, t: int, a: int, b: int) -> bool:
    """The map above is injective and onto the contributing permutations of
    the stepped matrix."""
    after = sparsify_step(M, t, a, b)
    mapping = step_bijection(M, t, a, b)
    images = set(mapping.values())
    return len(images) == len(mapping) and images == set(contributing_permutations(after.rows))
