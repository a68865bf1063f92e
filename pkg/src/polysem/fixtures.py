"""Small hand-built circuits and matrices used by tests, docs and the CLI."""

from __future__ import annotations

from .circuit import LIKELIHOOD, Builder, Circuit

# 4x4 matrix whose second column is all ones and every other column is zero.
SINGLE_COLUMN = (
    (0, 1, 0, 0),
    (0, 1, 0, 0),
    (0, 1, 0, 0),
    (0, 1, 0, 0),
)


def mixture_example() -> Circuit:
    """Decomposable likelihood circuit for 0.08x1x2 + 0.16x1 + 0.12x2 + 0.09.

    Two mixture components: (0.8x1 + 0.1)(0.2x2 + 0.4) and 0.5(0.44x2 + 0.28),
    each with weight 1/2. Sum nodes have constant children, so the circuit is
    decomposable but not smooth.
    """
    b = Builder()
    x1, x2, one = b.var(1), b.var(2), b.const(1)
    f1 = b.sum([("0.8", x1), ("0.1", one)])
    f2 = b.sum([("0.2", x2), ("0.4", one)])
    g2 = b.sum([("0.44", x2), ("0.28", one)])
    left = b.mul([f1, f2])
    right = b.mul([b.const("0.5"), g2])
    root = b.sum([("0.5", left), ("0.5", right)])
    return b.build(root, 2, LIKELIHOOD)


MIXTURE_TEXT = """\
pcirc 1
semantics likelihood
vars 2
n0 var x1
n1 const 1
n2 sum 4/5:n0 1/10:n1
n3 var x2
n4 sum 1/5:n3 2/5:n1
n5 mul n2 n4
n6 const 1/2
n7 sum 11/25:n3 7/25:n1
n8 mul n6 n7
n9 sum 1/2:n5 1/2:n8
output n9
"""
