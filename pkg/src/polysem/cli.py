"""Command-line interface.

Exit codes: 0 ok, 2 parse error, 3 semantics error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import pcirc
from .circuit import DISTRIBUTION_TAGS, RAW, parse_semantics
from .division_elim import STARRED_EDGES, edge_transform
from .errors import (
    CircuitError,
    DegreeViolation,
    NotADistribution,
    ParseError,
    RouteError,
    SemanticsMismatch,
    SingularShift,
    StructureError,
    TermBlowupError,
)
from .generators import random_decomposable
from .hardness import (
    IntMatrix,
    coefficient_of_all_ones,
    sparsify,
    valiant_circuit,
)
from .inference import compile_for_queries, marginals, parse_query
from .leaf_transforms import EDGES, apply_edge, check_route, format_route, parse_route, plan_route
from .oracle import DEFAULT_MAX_TERMS, dist_from, expand, identical, permanent
from .structured import is_decomposable, is_smooth

EXIT_OK, EXIT_PARSE, EXIT_SEMANTICS, EXIT_VERIFY = 0, 2, 3, 4
VERIFY_LIMIT = 10
PERMDEMO_MAX_ORDER = 8


class VerificationFailed(Exception):
    pass


def _read(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return pcirc.loads(text)


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _tag(text: str):
    try:
        return parse_semantics(text)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def cmd_transform(args) -> int:
    c = _read(args.input)
    target = _tag(args.to)
    start = c.semantics
    if start == RAW:
        if not args.force:
            raise SemanticsMismatch("input is tagged raw; pass --force to treat it as the "
                                    "route's source semantics")
        if args.route is None:
            raise RouteError("a raw input needs an explicit --route")
    if args.route is not None:
        route = parse_route(args.route)
        if start == RAW and route:
            start = EDGES[route[0]].source
            c = c.with_semantics(start)
        end = check_route(start, route)
        if end != target:
            raise RouteError(f"route {format_route(route)} ends at {end}, not {target}")
    else:
        route = plan_route(start, target, args.objective, n=max(c.n, 2))
    print(f"route: {format_route(route) or '(empty)'}", file=sys.stderr)
    print(f"size before: {c.size}", file=sys.stderr)
    out = c
    keep = Path(args.keep_intermediate) if args.keep_intermediate else None
    if keep:
        keep.mkdir(parents=True, exist_ok=True)
    for k, e in enumerate(route, start=1):
        if e in STARRED_EDGES and keep:
            parts: dict = {}
            out = edge_transform(out, e, keep=parts)
            for name, circuit in parts.items():
                pcirc.dump(circuit, keep / f"step{k}_edge{e}_{name}.pcirc")
        else:
            out = apply_edge(out, e)
        if keep:
            pcirc.dump(out, keep / f"step{k}_edge{e}.pcirc")
    print(f"size after: {out.size}", file=sys.stderr)
    if args.verify:
        if c.n > VERIFY_LIMIT:
            print(f"verify: skipped (n = {c.n} > {VERIFY_LIMIT})", file=sys.stderr)
        else:
            before = dist_from(c, strict=False, max_terms=args.max_terms)
            try:
                after = dist_from(out, strict=False, max_terms=args.max_terms)
            except SemanticsMismatch as exc:
                raise VerificationFailed(str(exc)) from None
            if before != after:
                raise VerificationFailed("output encodes a different distribution")
            print("verify: ok", file=sys.stderr)
    _write(pcirc.dumps(out), args.output)
    return EXIT_OK


def cmd_query(args) -> int:
    c = _read(args.input)
    queries = [parse_query(q, c.n) for q in args.queries]
    if args.compile:
        c = compile_for_queries(c)
    for q, value in zip(queries, marginals(c, queries)):
        print(f"{q}\t{value}")
    return EXIT_OK


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def cmd_check(args) -> int:
    c = _read(args.input)
    print(f"semantics: {c.semantics}")
    print(f"vars: {c.n}")
    print(f"size: {c.size}")
    print(f"division-free: {_yes(not c.has_division)}")
    ok, w = is_decomposable(c)
    print(f"decomposable: {_yes(ok)}" + ("" if ok else f" (n{w[0]}: children share x{w[1]})"))
    ok, w = is_smooth(c)
    print(f"smooth: {_yes(ok)}" + ("" if ok else f" (n{w[0]}: a child misses x{w[1]})"))
    poly = None
    if not c.has_division:
        try:
            poly = expand(c, args.max_terms)
        except TermBlowupError:
            pass
    if poly is None:
        print("multilinear: unknown")
    else:
        print(f"multilinear: {_yes(poly.is_multilinear())}")
    consistent = True
    detail = ""
    if c.semantics.is_distribution:
        if c.n > VERIFY_LIMIT:
            detail = f" (not checked, n > {VERIFY_LIMIT})"
        else:
            try:
                dist_from(c, max_terms=args.max_terms)
            except NotADistribution as exc:
                consistent = False
                witness = "" if exc.witness is None else f", witness {{{', '.join(map(str, sorted(exc.witness)))}}}"
                detail = f" ({exc}{witness})"
            except SemanticsMismatch as exc:
                consistent = False
                detail = f" ({exc})"
    elif c.semantics.k is not None:
        if poly is None:
            detail = " (unknown)"
        else:
            worst = max(poly.variable_degrees().values(), default=0)
            consistent = worst <= c.semantics.k - 1
            if not consistent:
                detail = f" (variable degree {worst} > {c.semantics.k - 1})"
    print(f"tag-consistent: {_yes(consistent)}{detail}")
    return EXIT_OK if consistent else EXIT_SEMANTICS


def cmd_permdemo(args) -> int:
    try:
        text = sys.stdin.read() if args.matrix == "-" else Path(args.matrix).read_text()
        M = IntMatrix.parse(text)
    except (OSError, ValueError) as exc:
        raise ParseError(str(exc)) from None
    if M.order > PERMDEMO_MAX_ORDER:
        raise ParseError(f"matrix order {M.order} exceeds the demo limit {PERMDEMO_MAX_ORDER}")
    sparse, trace = sparsify(M)
    c = valiant_circuit(sparse)
    print("# sparsified matrix")
    print(sparse.dumps(), end="")
    print("# trace (0-based rows/columns)")
    print(trace.dumps() or "(no steps)\n", end="")
    if args.circuit:
        pcirc.dump(c, args.circuit)
        print(f"# circuit written to {args.circuit}")
    else:
        print("# circuit")
        print(pcirc.dumps(c), end="")
    coef = coefficient_of_all_ones(c, max_terms=args.max_terms)
    per = permanent(M.rows)
    print(f"permanent: {per}")
    print(f"coefficient of x1...x{sparse.order}: {coef}")
    if coef != per:
        raise VerificationFailed("coefficient differs from the permanent")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.action == "expand":
        c = _read(args.inputs[0])
        sys.stdout.write(expand(c, args.max_terms).dump() or "0\n")
        return EXIT_OK
    if args.action == "compare":
        if len(args.inputs) != 2:
            raise ParseError("compare needs two circuit files")
        a, b = _read(args.inputs[0]), _read(args.inputs[1])
        same, witness = identical(a, b, mode=args.mode, seed=args.seed,
                                  max_terms=args.max_terms)
        print("identical" if same else f"different at {_fmt_witness(witness)}")
        return EXIT_OK if same else EXIT_VERIFY
    if args.action == "random":
        tag = _tag(args.tag)
        if tag not in DISTRIBUTION_TAGS:
            raise SemanticsMismatch(f"cannot generate {tag} circuits")
        c = random_decomposable(args.n, tag, random.Random(args.seed))
        _write(pcirc.dumps(c), args.output)
        return EXIT_OK
    raise ParseError(f"unknown oracle action {args.action!r}")


def _fmt_witness(witness) -> str:
    if witness is None:
        return "(no small witness found)"
    x, xb = witness
    parts = [f"x{i + 1}={v}" for i, v in enumerate(x)]
    parts += [f"~x{i + 1}={v}" for i, v in enumerate(xb) if v]
    return " ".join(parts)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-terms", type=int, default=DEFAULT_MAX_TERMS,
                        help="term cap for oracle expansions")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    p = argparse.ArgumentParser(prog="polysem", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", parents=[common],
                       help="convert a circuit to another semantics")
    t.add_argument("input")
    t.add_argument("--to", required=True, help="target semantics tag")
    t.add_argument("--route", help="explicit comma-separated edge list, e.g. 1,3")
    t.add_argument("--objective", choices=["min_edges", "min_size"], default="min_edges")
    t.add_argument("-o", "--output")
    t.add_argument("--verify", action="store_true", help="check the distribution is unchanged")
    t.add_argument("--keep-intermediate", metavar="DIR",
                   help="write every stage (and gadget/A/B circuits) to DIR")
    t.add_argument("--force", action="store_true", help="accept raw-tagged inputs")
    t.set_defaults(func=cmd_transform)

    q = sub.add_parser("query", parents=[common], help="marginal probabilities, e.g. '1 ?'")
    q.add_argument("input")
    q.add_argument("queries", nargs="+")
    q.add_argument("--compile", action="store_true",
                   help="pre-transform once (fourier->generating, else ->network)")
    q.set_defaults(func=cmd_query)

    c = sub.add_parser("check", parents=[common], help="structural and semantic audit")
    c.add_argument("input")
    c.set_defaults(func=cmd_check)

    m = sub.add_parser("permdemo", parents=[common], help="permanent as a categorical-PGC coefficient")
    m.add_argument("matrix", help="whitespace-separated 0/1 rows")
    m.add_argument("--circuit", help="write the circuit here instead of stdout")
    m.set_defaults(func=cmd_permdemo)

    o = sub.add_parser("oracle", parents=[common], help="brute-force tools")
    o.add_argument("action", choices=["expand", "compare", "random"])
    o.add_argument("inputs", nargs="*")
    o.add_argument("--mode", choices=["exact", "probabilistic"], default="exact")
    o.add_argument("--n", type=int, default=3)
    o.add_argument("--tag", default="likelihood")
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "oracle" and args.action in ("expand", "compare") and not args.inputs:
        parser.error(f"oracle {args.action} needs input files")
    try:
        return args.func(args)
    except (ParseError, CircuitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SemanticsMismatch, RouteError, StructureError, NotADistribution, DegreeViolation,
            SingularShift, TermBlowupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTICS
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
