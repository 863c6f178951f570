"""Graph file format and command-line interface.

File format: a header line (``pag``, ``dag`` or ``mag``), an optional
``nodes:`` line fixing the node order, and one ``edge:`` line per edge with
tokens ``-->  <--  <->  o->  <-o  o-o  o--  --o`` (plus ``->`` / ``<-`` in
dag files).  A trailing ``visible`` tag is accepted on directed pag edges and
cross-checked against the graphical condition.  ``#`` starts a comment.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import adjustment, ident_dag, ident_pag
from .exprs import render_latex, render_text, to_json_dict
from .graphs import ARROW, CIRCLE, TAIL, EDGE_TOKENS, LatentDag, Mag, Pag
from .ident_dag import c_components
from .oracle import class_of_dag
from .structure import cpc_components, pto
from .verify import run_verification

_TOKEN_OF_MARKS = {
    (TAIL, ARROW): "-->",
    (ARROW, TAIL): "<--",
    (ARROW, ARROW): "<->",
    (CIRCLE, ARROW): "o->",
    (ARROW, CIRCLE): "<-o",
    (CIRCLE, CIRCLE): "o-o",
    (CIRCLE, TAIL): "o--",
    (TAIL, CIRCLE): "--o",
}


class ParseError(ValueError):
    pass


def parse_graph(text: str):
    """Parse a graph file; returns (kind, graph) with kind in pag|dag|mag."""
    kind = None
    nodes: list[str] | None = None
    edge_lines: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if kind is None:
            if line not in ("pag", "dag", "mag"):
                raise ParseError(f"line {lineno}: header must be pag, dag or mag")
            kind = line
            continue
        if line.startswith("nodes:"):
            if nodes is not None:
                raise ParseError(f"line {lineno}: duplicate nodes line")
            nodes = line[len("nodes:"):].split()
            continue
        if line.startswith("edge:"):
            edge_lines.append((lineno, line[len("edge:"):].split()))
            continue
        raise ParseError(f"line {lineno}: expected 'nodes:' or 'edge:'")
    if kind is None:
        raise ParseError("empty graph file")

    seen: list[str] = []
    specs: list[tuple[int, str, str, str, bool]] = []
    for lineno, parts in edge_lines:
        visible = False
        if len(parts) == 4 and parts[3] == "visible":
            visible = True
            parts = parts[:3]
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'edge: A <tok> B [visible]'")
        a, token, b = parts
        if token not in EDGE_TOKENS:
            raise ParseError(f"line {lineno}: unknown edge token {token!r}")
        if token in ("->", "<-") and kind != "dag":
            raise ParseError(f"line {lineno}: token {token!r} is dag-only")
        if token not in ("->", "<-", "<->") and kind == "dag":
            raise ParseError(f"line {lineno}: token {token!r} not allowed in dag files")
        if visible and kind != "pag":
            raise ParseError(f"line {lineno}: 'visible' tag is pag-only")
        if CIRCLE in EDGE_TOKENS[token] and kind == "mag":
            raise ParseError(f"line {lineno}: circle marks not allowed in mag files")
        for v in (a, b):
            if v not in seen:
                seen.append(v)
        specs.append((lineno, a, token, b, visible))

    order = nodes if nodes is not None else seen
    if len(set(order)) != len(order):
        raise ParseError("duplicate node in nodes line")
    lowered = {}
    for v in order:
        if lowered.setdefault(v.lower(), v) != v:
            raise ParseError(f"node names {lowered[v.lower()]!r} and {v!r} collide when lowercased")
    for v in seen:
        if v not in order:
            raise ParseError(f"edge references node {v!r} missing from nodes line")

    try:
        if kind == "dag":
            return kind, LatentDag.from_specs(
                tuple(order), [f"{a} {tok} {b}" for _, a, tok, b, _ in specs]
            )
        edges = []
        for lineno, a, token, b, visible in specs:
            ma, mb = EDGE_TOKENS[token]
            edges.append((a, b, ma, mb, visible))
        if kind == "mag":
            return kind, Mag(tuple(order), edges)
        return kind, Pag(tuple(order), edges, check_visibility=True)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def serialize_graph(kind: str, g) -> str:
    """Canonical text rendering; parse -> serialize is byte-stable."""
    lines = [kind]
    if kind == "dag":
        lines.append("nodes: " + " ".join(g.observed))
        directed = [(p, c) for p, c in g.edges() if p in set(g.observed)]
        index = {v: i for i, v in enumerate(g.observed)}
        for p, c in sorted(directed, key=lambda e: (index[e[0]], index[e[1]])):
            lines.append(f"edge: {p} -> {c}")
        pairs = []
        for u in g.latent:
            a, b = g.children(u)
            pairs.append(tuple(sorted((a, b), key=index.__getitem__)))
        for a, b in sorted(pairs, key=lambda e: (index[e[0]], index[e[1]])):
            lines.append(f"edge: {a} <-> {b}")
    else:
        lines.append("nodes: " + " ".join(g.nodes))
        for a, b, ma, mb, vis in g.edges():
            token = _TOKEN_OF_MARKS[(ma, mb)]
            suffix = " visible" if vis else ""
            lines.append(f"edge: {a} {token} {b}{suffix}")
    return "\n".join(lines) + "\n"


def _load(path: str, want: tuple[str, ...]):
    with open(path, encoding="utf-8") as handle:
        kind, g = parse_graph(handle.read())
    if kind not in want:
        raise ParseError(f"{path}: expected a {' or '.join(want)} file, got {kind}")
    return kind, g


def _split_nodes(arg: str) -> tuple[str, ...]:
    items = tuple(v for v in arg.replace(",", " ").split() if v)
    if not items:
        raise ParseError("empty node list")
    return items


def _emit_query_result(result, fail_type, fmt: str, started: float) -> int:
    failed = isinstance(result, fail_type)
    if fmt == "json":
        envelope = {
            "verdict": "not identifiable" if failed else "identifiable",
            "timings": {"seconds": round(time.perf_counter() - started, 6)},
        }
        if failed:
            envelope["witness"] = result.describe()
        else:
            envelope["expression"] = to_json_dict(result)
        print(json.dumps(envelope, sort_keys=True))
    elif failed:
        print(f"FAIL: {result.describe()}")
    else:
        print(render_latex(result) if fmt == "latex" else render_text(result))
    return 2 if failed else 0


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; exit 2 is reserved for "not identifiable"
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(
        prog="pagid",
        description="Causal effect identification from partial ancestral graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_query(name: str, help_: str, kinds: tuple[str, ...]):
        q = sub.add_parser(name, help=help_)
        q.add_argument("--graph", required=True)
        q.add_argument("--treat", required=True)
        q.add_argument("--outcome", required=True)
        q.add_argument("--format", choices=("text", "latex", "json"), default="text")
        q.set_defaults(kinds=kinds)
        return q

    add_query("idp", "identify an effect from a PAG", ("pag",))
    add_query("id-dag", "identify an effect from a latent DAG", ("dag",))
    add_query("gac", "generalized adjustment criterion on a PAG", ("pag",))

    p_pto = sub.add_parser("pto", help="partial topological order of a PAG")
    p_pto.add_argument("--graph", required=True)
    p_comp = sub.add_parser("components", help="component decomposition")
    p_comp.add_argument("--graph", required=True)
    p_proj = sub.add_parser("pag-of-dag", help="brute-force the PAG of a DAG")
    p_proj.add_argument("--graph", required=True)
    p_ver = sub.add_parser("verify", help="run the seeded verification pipeline")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--runs", type=int, default=200)
    p_ver.add_argument("--tol", type=float, default=1e-9)

    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "idp":
            _, g = _load(args.graph, args.kinds)
            result = ident_pag.idp(_split_nodes(args.treat), _split_nodes(args.outcome), g)
            return _emit_query_result(result, ident_pag.Fail, args.format, started)
        if args.command == "id-dag":
            _, g = _load(args.graph, args.kinds)
            result = ident_dag.id_dag(_split_nodes(args.treat), _split_nodes(args.outcome), g)
            return _emit_query_result(result, ident_dag.Fail, args.format, started)
        if args.command == "gac":
            _, g = _load(args.graph, args.kinds)
            result = adjustment.gac(g, _split_nodes(args.treat), _split_nodes(args.outcome))
            if isinstance(result, adjustment.Fail):
                if args.format == "json":
                    print(json.dumps({
                        "verdict": "not identifiable",
                        "witness": result.describe(),
                        "timings": {"seconds": round(time.perf_counter() - started, 6)},
                    }, sort_keys=True))
                else:
                    print(f"FAIL: {result.describe()}")
                return 2
            formula = adjustment.adjustment_formula(
                result, _split_nodes(args.treat), _split_nodes(args.outcome)
            )
            if args.format == "json":
                print(json.dumps({
                    "verdict": "identifiable",
                    "adjustment_set": list(result),
                    "expression": to_json_dict(formula),
                    "timings": {"seconds": round(time.perf_counter() - started, 6)},
                }, sort_keys=True))
            else:
                shown = "{" + ",".join(result) + "}"
                body = render_latex(formula) if args.format == "latex" else render_text(formula)
                print(f"adjustment set: {shown}")
                print(body)
            return 0
        if args.command == "pto":
            _, g = _load(args.graph, ("pag",))
            order = pto(g)
            print(" < ".join(
                b[0] if len(b) == 1 else "{" + ",".join(b) + "}" for b in order.buckets
            ))
            return 0
        if args.command == "components":
            kind, g = _load(args.graph, ("pag", "mag", "dag"))
            comps = c_components(g) if kind == "dag" else cpc_components(g)
            for comp in comps:
                print("{" + ",".join(comp) + "}")
            return 0
        if args.command == "pag-of-dag":
            _, g = _load(args.graph, ("dag",))
            _, pag = class_of_dag(g)
            sys.stdout.write(serialize_graph("pag", pag))
            return 0
        if args.command == "verify":
            checks = run_verification(seed=args.seed, runs=args.runs, tol=args.tol)
            return 0 if all(c.violations == 0 for c in checks) else 2
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
