"""Reader and writer for the line-oriented ``.pcirc`` circuit format.

::

    pcirc 1
    semantics likelihood
    vars 2
    n0 var x1
    n1 const 1/10
    n2 sum 4/5:n0 1:n1
    ...
    output n7

Writing always emits canonical form: nodes in depth-first post-order from
the output, ids renumbered densely, rationals in lowest terms. Reading
accepts any ids as long as every node is defined before it is used.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .circuit import (
    Circuit,
    Const,
    Div,
    Prod,
    Sum,
    Var,
    build,
    parse_semantics,
)
from .errors import CircuitError, ParseError

MAGIC = "pcirc 1"


def _rational(text: str, line: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational {text!r}", line) from None


def _ref(text: str, ids: dict[str, int], line: int) -> int:
    if not text.startswith("n") or not text[1:].isdigit():
        raise ParseError(f"bad node reference {text!r}", line)
    if text not in ids:
        raise ParseError(f"{text} used before it is defined", line)
    return ids[text]


def _var(text: str, n: int, line: int) -> Var:
    bar = text.startswith("~")
    body = text[1:] if bar else text
    if not body.startswith("x") or not body[1:].isdigit():
        raise ParseError(f"bad variable {text!r}", line)
    index = int(body[1:])
    if not 1 <= index <= n:
        raise ParseError(f"variable {text} outside 1..{n}", line)
    return Var(index, bar)


def loads(text: str) -> Circuit:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((number, body))
    if len(lines) < 4:
        raise ParseError("truncated file: need header, semantics, vars and output lines")

    number, body = lines[0]
    if body != MAGIC:
        raise ParseError(f"expected {MAGIC!r}", number)
    number, body = lines[1]
    if not body.startswith("semantics "):
        raise ParseError("expected 'semantics <tag>'", number)
    try:
        semantics = parse_semantics(body[len("semantics "):])
    except ValueError as exc:
        raise ParseError(str(exc), number) from None
    number, body = lines[2]
    parts = body.split()
    if len(parts) != 2 or parts[0] != "vars" or not parts[1].isdigit():
        raise ParseError("expected 'vars <n>'", number)
    n = int(parts[1])

    ids: dict[str, int] = {}
    nodes: list = []
    output = None
    for number, body in lines[3:]:
        parts = body.split()
        if parts[0] == "output":
            if output is not None or len(parts) != 2:
                raise ParseError("malformed or repeated output line", number)
            output = _ref(parts[1], ids, number)
            continue
        if output is not None:
            raise ParseError("content after the output line", number)
        if len(parts) < 2:
            raise ParseError("malformed node line", number)
        name, kind, args = parts[0], parts[1], parts[2:]
        if not name.startswith("n") or not name[1:].isdigit():
            raise ParseError(f"bad node id {name!r}", number)
        if name in ids:
            raise ParseError(f"{name} defined twice", number)
        if kind == "const":
            if len(args) != 1:
                raise ParseError("const takes one rational", number)
            node = Const(_rational(args[0], number))
        elif kind == "var":
            if len(args) != 1:
                raise ParseError("var takes one variable", number)
            node = _var(args[0], n, number)
        elif kind == "sum":
            if not args:
                raise ParseError("sum node without children", number)
            terms = []
            for arg in args:
                if ":" not in arg:
                    raise ParseError(f"sum child {arg!r} lacks '<weight>:'", number)
                w, ref = arg.rsplit(":", 1)
                terms.append((_rational(w, number), _ref(ref, ids, number)))
            node = Sum(tuple(terms))
        elif kind == "mul":
            if not args:
                raise ParseError("mul node without children", number)
            node = Prod(tuple(_ref(a, ids, number) for a in args))
        elif kind == "div":
            if len(args) != 2:
                raise ParseError("div takes two children", number)
            node = Div(_ref(args[0], ids, number), _ref(args[1], ids, number))
        else:
            raise ParseError(f"unknown node kind {kind!r}", number)
        ids[name] = len(nodes)
        nodes.append(node)
    if output is None:
        raise ParseError("missing output line")
    try:
        return build(nodes, output, n, semantics)
    except CircuitError as exc:
        raise ParseError(str(exc)) from None


def dumps(c: Circuit) -> str:
    out = [MAGIC, f"semantics {c.semantics}", f"vars {c.n}"]
    if c.root != len(c.nodes) - 1:
        # not canonical (hand-built), rebuild first
        c = build(c.nodes, c.root, c.n, c.semantics, c.divisions_allowed)
    for i, v in enumerate(c.nodes):
        t = type(v)
        if t is Const:
            out.append(f"n{i} const {v.value}")
        elif t is Var:
            out.append(f"n{i} var {v}")
        elif t is Sum:
            out.append(f"n{i} sum " + " ".join(f"{w}:n{ch}" for w, ch in v.children))
        elif t is Prod:
            out.append(f"n{i} mul " + " ".join(f"n{ch}" for ch in v.children))
        else:
            out.append(f"n{i} div n{v.num} n{v.den}")
    out.append(f"output n{c.root}")
    return "\n".join(out) + "\n"


def load(path) -> Circuit:
    return loads(Path(path).read_text(encoding="utf-8"))


def dump(c: Circuit, path) -> None:
    Path(path).write_text(dumps(c), encoding="utf-8")
