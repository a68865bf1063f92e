from fractions import Fraction

import pytest

from polysem import pcirc
from polysem.circuit import NETWORK, Builder, evaluate
from polysem.errors import ParseError, PolarityError
from polysem.fixtures import MIXTURE_TEXT


def test_mixture_round_trip(mixture):
    assert pcirc.dumps(mixture) == MIXTURE_TEXT
    assert pcirc.dumps(pcirc.loads(MIXTURE_TEXT)) == MIXTURE_TEXT


def test_decimals_and_comments():
    text = """pcirc 1   # header
semantics likelihood
vars 1
n7 var x1
n3 const 0.25   # exact quarter
n9 sum 0.5:n7 1:n3
output n9
"""
    c = pcirc.loads(text)
    assert evaluate(c, [1]) == Fraction(3, 4)
    assert "n1 const 1/4\nn2 sum 1/2:n0 1:n1" in pcirc.dumps(c)


def test_bar_variables_and_division():
    b = Builder()
    d = b.div(b.var(1), b.sum([(1, b.var(1)), (1, b.var(1, True))]))
    c = b.build(d, 1)
    text = pcirc.dumps(c)
    assert "var ~x1" in text and "div" in text
    assert pcirc.dumps(pcirc.loads(text)) == text


@pytest.mark.parametrize("text, line", [
    ("pcirc 2\nsemantics raw\nvars 0\nn0 const 1\noutput n0\n", 1),
    ("pcirc 1\nsemantics nope\nvars 0\nn0 const 1\noutput n0\n", 2),
    ("pcirc 1\nsemantics raw\nvars 1\nn0 mul n1\noutput n0\n", 4),
    ("pcirc 1\nsemantics raw\nvars 1\nn0 var x2\noutput n0\n", 4),
    ("pcirc 1\nsemantics raw\nvars 1\nn0 const 1/0\noutput n0\n", 4),
    ("pcirc 1\nsemantics raw\nvars 1\nn0 const 1\nn0 const 2\noutput n0\n", 5),
    ("pcirc 1\nsemantics raw\nvars 1\nn0 sum n0\noutput n0\n", 4),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        pcirc.loads(text)
    assert info.value.line == line


def test_polarity_error_is_parse_error():
    text = "pcirc 1\nsemantics likelihood\nvars 1\nn0 var ~x1\noutput n0\n"
    with pytest.raises(ParseError):
        pcirc.loads(text)


def test_missing_output():
    with pytest.raises(ParseError):
        pcirc.loads("pcirc 1\nsemantics raw\nvars 0\nn0 const 1\n")


def test_file_io(tmp_path, mixture):
    path = tmp_path / "f.pcirc"
    pcirc.dump(mixture, path)
    assert pcirc.dumps(pcirc.load(path)) == pcirc.dumps(mixture)
    assert PolarityError  # re-exported error type stays importable
    assert NETWORK.allows_bar
