"""Mixed-graph core: one representation shared by latent-variable DAGs, MAGs and PAGs.

Edges carry one mark per endpoint (tail / arrow / circle) plus a visibility
flag that is meaningful only on directed edges.  All graph values are
immutable after construction; every operation here is a pure function.
"""

from __future__ import annotations

import itertools
from enum import Enum
from typing import Iterable, Mapping, Sequence

MAX_NODES = 12


class EdgeMark(Enum):
    TAIL = "-"
    ARROW = ">"
    CIRCLE = "o"


TAIL = EdgeMark.TAIL
ARROW = EdgeMark.ARROW
CIRCLE = EdgeMark.CIRCLE

# Edge spec tokens accepted by the convenience constructors, mapped to
# (mark at left node, mark at right node).
EDGE_TOKENS: Mapping[str, tuple[EdgeMark, EdgeMark]] = {
    "-->": (TAIL, ARROW),
    "<--": (ARROW, TAIL),
    "<->": (ARROW, ARROW),
    "o->": (CIRCLE, ARROW),
    "<-o": (ARROW, CIRCLE),
    "o-o": (CIRCLE, CIRCLE),
    "o--": (CIRCLE, TAIL),
    "--o": (TAIL, CIRCLE),
    "->": (TAIL, ARROW),
    "<-": (ARROW, TAIL),
}


def node_sorted(graph_nodes: Sequence[str], items: Iterable[str]) -> tuple[str, ...]:
    """Order ``items`` by their position in ``graph_nodes`` (deterministic)."""
    index = {v: i for i, v in enumerate(graph_nodes)}
    return tuple(sorted(items, key=lambda v: index[v]))


class MixedGraph:
    """Nodes plus per-edge endpoint marks; at most one edge per node pair."""

    __slots__ = ("nodes", "_index", "_edges", "_adj")

    def __init__(
        self,
        nodes: Sequence[str],
        edges: Iterable[tuple[str, str, EdgeMark, EdgeMark, bool]] = (),
    ):
        nodes = tuple(nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node identifiers")
        if len(nodes) > MAX_NODES:
            raise ValueError(f"graph exceeds the {MAX_NODES}-node cap")
        self.nodes = nodes
        self._index = {v: i for i, v in enumerate(nodes)}
        self._edges: dict[tuple[str, str], tuple[EdgeMark, EdgeMark, bool]] = {}
        self._adj: dict[str, list[str]] = {v: [] for v in nodes}
        for a, b, mark_a, mark_b, visible in edges:
            self._add_edge(a, b, mark_a, mark_b, visible)
        for v in self._adj:
            self._adj[v].sort(key=self._index.__getitem__)

    def _add_edge(self, a: str, b: str, mark_a: EdgeMark, mark_b: EdgeMark, visible: bool) -> None:
        if a not in self._index or b not in self._index:
            raise ValueError(f"unknown node in edge {a!r}-{b!r}")
        if a == b:
            raise ValueError(f"self-loop at {a!r}")
        key = self._key(a, b)
        if key in self._edges:
            raise ValueError(f"duplicate edge {a!r}-{b!r}")
        if key == (a, b):
            self._edges[key] = (mark_a, mark_b, visible)
        else:
            self._edges[key] = (mark_b, mark_a, visible)
        if visible and not self._is_directed_marks(*self._edges[key][:2]):
            raise ValueError(f"visible flag on non-directed edge {a!r}-{b!r}")
        self._adj[a].append(b)
        self._adj[b].append(a)

    @staticmethod
    def _is_directed_marks(mark_first: EdgeMark, mark_second: EdgeMark) -> bool:
        return {mark_first, mark_second} == {TAIL, ARROW}

    def _key(self, a: str, b: str) -> tuple[str, str]:
        return (a, b) if self._index[a] < self._index[b] else (b, a)

    @classmethod
    def from_specs(cls, nodes: Sequence[str], specs: Iterable[str]) -> "MixedGraph":
        """Build from edge strings like ``"V1 o-> X"`` or ``"X --> V3 visible"``."""
        edges = []
        for spec in specs:
            parts = spec.split()
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "visible"):
                raise ValueError(f"bad edge spec {spec!r}")
            a, token, b = parts[:3]
            if token not in EDGE_TOKENS:
                raise ValueError(f"bad edge token {token!r} in {spec!r}")
            mark_a, mark_b = EDGE_TOKENS[token]
            edges.append((a, b, mark_a, mark_b, len(parts) == 4))
        return cls(nodes, edges)

    # -- queries ---------------------------------------------------------

    def has_node(self, v: str) -> bool:
        return v in self._index

    def adjacent(self, a: str, b: str) -> bool:
        return self._key(a, b) in self._edges if a != b else False

    def neighbors(self, v: str) -> tuple[str, ...]:
        return tuple(self._adj[v])

    def mark_at(self, v: str, other: str) -> EdgeMark:
        """Mark at endpoint ``v`` on the edge between ``v`` and ``other``."""
        key = self._key(v, other)
        marks = self._edges[key]
        return marks[0] if key[0] == v else marks[1]

    def is_visible(self, a: str, b: str) -> bool:
        return self._edges[self._key(a, b)][2]

    def is_directed_edge(self, a: str, b: str) -> bool:
        """True iff the edge is a -> b (tail at a, arrow at b)."""
        return (
            self.adjacent(a, b)
            and self.mark_at(a, b) is TAIL
            and self.mark_at(b, a) is ARROW
        )

    def is_bidirected(self, a: str, b: str) -> bool:
        return (
            self.adjacent(a, b)
            and self.mark_at(a, b) is ARROW
            and self.mark_at(b, a) is ARROW
        )

    def is_circle_circle(self, a: str, b: str) -> bool:
        return (
            self.adjacent(a, b)
            and self.mark_at(a, b) is CIRCLE
            and self.mark_at(b, a) is CIRCLE
        )

    def edges(self) -> tuple[tuple[str, str, EdgeMark, EdgeMark, bool], ...]:
        """All edges as (a, b, mark_a, mark_b, visible), in node order."""
        out = []
        for (a, b), (ma, mb, vis) in sorted(
            self._edges.items(), key=lambda kv: (self._index[kv[0][0]], self._index[kv[0][1]])
        ):
            out.append((a, b, ma, mb, vis))
        return tuple(out)

    def directed_edges(self) -> tuple[tuple[str, str], ...]:
        """All x -> y edges as (x, y) pairs."""
        out = []
        for a, b, ma, mb, _ in self.edges():
            if ma is TAIL and mb is ARROW:
                out.append((a, b))
            elif ma is ARROW and mb is TAIL:
                out.append((b, a))
        return tuple(out)

    def parents(self, v: str) -> tuple[str, ...]:
        """Strict parents: nodes u with u -> v."""
        return tuple(u for u in self._adj[v] if self.is_directed_edge(u, v))

    def sort_nodes(self, items: Iterable[str]) -> tuple[str, ...]:
        return node_sorted(self.nodes, items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return set(self.nodes) == set(other.nodes) and {
            k: v[:2] for k, v in self._edges.items()
        } == {k: v[:2] for k, v in other._edges.items()}

    def __hash__(self) -> int:
        return hash(
            (frozenset(self.nodes), frozenset((k, v[:2]) for k, v in self._edges.items()))
        )

    def __repr__(self) -> str:
        toks = {
            (TAIL, ARROW): "-->",
            (ARROW, TAIL): "<--",
            (ARROW, ARROW): "<->",
            (CIRCLE, ARROW): "o->",
            (ARROW, CIRCLE): "<-o",
            (CIRCLE, CIRCLE): "o-o",
            (CIRCLE, TAIL): "o--",
            (TAIL, CIRCLE): "--o",
        }
        parts = [
            f"{a} {toks[(ma, mb)]} {b}" + (" v" if vis else "")
            for a, b, ma, mb, vis in self.edges()
        ]
        return f"{type(self).__name__}({', '.join(parts)})"


class Pag(MixedGraph):
    """Partial ancestral graph; validates the arrowhead-closure property.

    Visibility flags are authoritative on instances produced by
    :func:`induced_subgraph` (an edge that is visible in the full graph stays
    visible in the subgraph even when its graphical witness is dropped).
    On freshly constructed graphs set ``check_visibility`` to cross-check the
    supplied flags against the graphical condition.
    """

    def __init__(self, nodes, edges=(), *, check_closure: bool = True, check_visibility: bool = False):
        super().__init__(nodes, edges)
        if check_closure:
            violation = find_closure_violation(self)
            if violation is not None:
                raise ValueError(f"arrowhead closure violated at triple {violation}")
        if check_visibility:
            from .structure import graphical_visible_edges

            computed = graphical_visible_edges(self)
            flagged = {
                (a, b) if ma is TAIL else (b, a)
                for a, b, ma, mb, vis in self.edges()
                if vis
            }
            if computed != flagged:
                raise ValueError(
                    f"visibility flags {sorted(flagged)} disagree with the "
                    f"graphical condition {sorted(computed)}"
                )

    @classmethod
    def from_specs(cls, nodes, specs, *, check_visibility: bool = True) -> "Pag":
        g = MixedGraph.from_specs(nodes, specs)
        return cls(nodes, g.edges(), check_visibility=check_visibility)


class Mag(MixedGraph):
    """Maximal ancestral graph: tail/arrow marks, ancestral and maximal."""

    def __init__(self, nodes, edges=(), *, validate: bool = True):
        super().__init__(nodes, edges)
        for a, b, ma, mb, _ in self.edges():
            if CIRCLE in (ma, mb):
                raise ValueError(f"circle mark in MAG edge {a!r}-{b!r}")
            if ma is TAIL and mb is TAIL:
                raise ValueError(f"undirected MAG edge {a!r}-{b!r} not supported")
        if validate:
            problem = mag_violation(self)
            if problem:
                raise ValueError(problem)

    @classmethod
    def from_specs(cls, nodes, specs) -> "Mag":
        g = MixedGraph.from_specs(nodes, specs)
        return cls(nodes, g.edges())


def ancestors_in(g: MixedGraph, targets: Iterable[str]) -> tuple[str, ...]:
    """Nodes with a directed path (all -> edges) into some target; includes targets."""
    targets = list(targets)
    for t in targets:
        if not g.has_node(t):
            raise ValueError(f"unknown node {t!r}")
    out = set(targets)
    frontier = list(targets)
    while frontier:
        v = frontier.pop()
        for u in g.neighbors(v):
            if u not in out and g.is_directed_edge(u, v):
                out.add(u)
                frontier.append(u)
    return g.sort_nodes(out)


def possible_ancestors(g: MixedGraph, y: Iterable[str]) -> tuple[str, ...]:
    """Nodes with a potentially directed path into some member of ``y``.

    A path is potentially directed out of a node when no edge on it has an
    arrowhead pointing back toward the source; the edge-local test makes a
    plain reverse reachability search exact.
    """
    y = list(y)
    for t in y:
        if not g.has_node(t):
            raise ValueError(f"unknown node {t!r}")
    out = set(y)
    frontier = list(y)
    while frontier:
        v = frontier.pop()
        for u in g.neighbors(v):
            if u not in out and g.mark_at(u, v) is not ARROW:
                out.add(u)
                frontier.append(u)
    return g.sort_nodes(out)


def possible_descendants(g: MixedGraph, x: Iterable[str]) -> tuple[str, ...]:
    """Nodes reachable from ``x`` by a potentially directed path; includes ``x``."""
    x = list(x)
    for t in x:
        if not g.has_node(t):
            raise ValueError(f"unknown node {t!r}")
    out = set(x)
    frontier = list(x)
    while frontier:
        v = frontier.pop()
        for u in g.neighbors(v):
            if u not in out and g.mark_at(v, u) is not ARROW:
                out.add(u)
                frontier.append(u)
    return g.sort_nodes(out)


def find_closure_violation(g: MixedGraph) -> tuple[str, str, str] | None:
    """Check the PAG closure property on every adjacent triple.

    Whenever A*->B with a circle at B toward C and A, C adjacent, the A-C
    edge must have an arrowhead at C; and if additionally A -> B, the A-C
    edge must not be bidirected.  Returns a violating (A, B, C) or None.
    """
    for b in g.nodes:
        for a, c in itertools.permutations(g.neighbors(b), 2):
            if g.mark_at(b, a) is not ARROW:
                continue
            if g.mark_at(b, c) is not CIRCLE:
                continue
            if not g.adjacent(a, c):
                continue
            if g.mark_at(c, a) is not ARROW:
                return (a, b, c)
            if g.is_directed_edge(a, b) and g.mark_at(a, c) is ARROW:
                return (a, b, c)
    return None


def mag_violation(g: MixedGraph) -> str | None:
    """Return a description of an ancestrality/maximality failure, or None."""
    an = {v: set(ancestors_in(g, [v])) for v in g.nodes}
    for v in g.nodes:
        if any(u != v and v in an[u] and u in an[v] for u in g.nodes):
            return "directed cycle"
    for a, b, ma, mb, _ in g.edges():
        if ma is ARROW and mb is ARROW:
            if a in an[b] or b in an[a]:
                return f"almost directed cycle at {a!r}<->{b!r}"
    for a, b in itertools.combinations(g.nodes, 2):
        if not g.adjacent(a, b) and _has_inducing_path(g, a, b):
            return f"inducing path between non-adjacent {a!r} and {b!r}"
    return None


def _has_inducing_path(g: MixedGraph, x: str, y: str) -> bool:
    """Inducing path relative to the empty set: interior nodes are colliders
    and each is an ancestor of an endpoint."""
    ok_interior = set(ancestors_in(g, [x])) | set(ancestors_in(g, [y]))

    def step(path: list[str]) -> bool:
        v = path[-1]
        for w in g.neighbors(v):
            if w in path:
                continue
            if len(path) >= 2:
                prev = path[-2]
                collider = g.mark_at(v, prev) is ARROW and g.mark_at(v, w) is ARROW
                if not collider or v not in ok_interior:
                    continue
            if w == y:
                return True
            if step(path + [w]):
                return True
        return False

    return step([x])


class LatentDag:
    """Acyclic causal diagram in canonical semi-Markovian form.

    Latent nodes are roots with exactly two observed children, standing for
    bidirected confounding arcs.
    """

    __slots__ = ("observed", "latent", "_edges", "_parents", "_children", "_index")

    def __init__(
        self,
        observed: Sequence[str],
        latent: Sequence[str],
        edges: Iterable[tuple[str, str]],
    ):
        observed = tuple(observed)
        latent = tuple(latent)
        names = observed + latent
        if len(set(names)) != len(names):
            raise ValueError("duplicate node identifiers")
        if len(observed) > MAX_NODES or len(latent) > MAX_NODES:
            raise ValueError(f"graph exceeds the {MAX_NODES}-node cap")
        self.observed = observed
        self.latent = latent
        self._index = {v: i for i, v in enumerate(names)}
        self._edges = tuple(edges)
        self._parents: dict[str, list[str]] = {v: [] for v in names}
        self._children: dict[str, list[str]] = {v: [] for v in names}
        seen = set()
        for p, c in self._edges:
            if p not in self._index or c not in self._index:
                raise ValueError(f"unknown node in edge {p!r}->{c!r}")
            if (p, c) in seen or (c, p) in seen or p == c:
                raise ValueError(f"bad edge {p!r}->{c!r}")
            seen.add((p, c))
            self._parents[c].append(p)
            self._children[p].append(c)
        for d in (self._parents, self._children):
            for v in d:
                d[v].sort(key=self._index.__getitem__)
        for u in latent:
            if self._parents[u]:
                raise ValueError(f"latent {u!r} has parents")
            if len(self._children[u]) != 2 or any(c in latent for c in self._children[u]):
                raise ValueError(f"latent {u!r} must have exactly two observed children")
        self.topological_order()  # raises on cycles

    @classmethod
    def from_specs(cls, observed: Sequence[str], specs: Iterable[str]) -> "LatentDag":
        """Build from strings ``"A -> B"`` plus ``"A <-> B"`` confounding arcs."""
        edges: list[tuple[str, str]] = []
        latent: list[str] = []
        for spec in specs:
            parts = spec.split()
            if len(parts) != 3:
                raise ValueError(f"bad edge spec {spec!r}")
            a, token, b = parts
            if token == "->":
                edges.append((a, b))
            elif token == "<-":
                edges.append((b, a))
            elif token == "<->":
                name = f"U{len(latent) + 1}"
                while name in observed:
                    name += "_"
                latent.append(name)
                edges.append((name, a))
                edges.append((name, b))
            else:
                raise ValueError(f"bad edge token {token!r} in {spec!r}")
        return cls(observed, latent, edges)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.observed + self.latent

    def parents(self, v: str) -> tuple[str, ...]:
        return tuple(self._parents[v])

    def children(self, v: str) -> tuple[str, ...]:
        return tuple(self._children[v])

    def edges(self) -> tuple[tuple[str, str], ...]:
        return self._edges

    def sort_nodes(self, items: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(items, key=self._index.__getitem__))

    def topological_order(self) -> tuple[str, ...]:
        """Deterministic topological order over all nodes (Kahn, node order)."""
        indeg = {v: len(self._parents[v]) for v in self.nodes}
        ready = [v for v in self.nodes if indeg[v] == 0]
        out: list[str] = []
        while ready:
            v = ready.pop(0)
            out.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort(key=self._index.__getitem__)
        if len(out) != len(self.nodes):
            raise ValueError("cycle in DAG")
        return tuple(out)

    def ancestors(self, targets: Iterable[str]) -> tuple[str, ...]:
        """Ancestors of ``targets`` (directed paths), including the targets."""
        targets = list(targets)
        for t in targets:
            if t not in self._index:
                raise ValueError(f"unknown node {t!r}")
        out = set(targets)
        frontier = list(targets)
        while frontier:
            v = frontier.pop()
            for p in self._parents[v]:
                if p not in out:
                    out.add(p)
                    frontier.append(p)
        return self.sort_nodes(out)

    def descendants(self, sources: Iterable[str]) -> tuple[str, ...]:
        sources = list(sources)
        out = set(sources)
        frontier = list(sources)
        while frontier:
            v = frontier.pop()
            for c in self._children[v]:
                if c not in out:
                    out.add(c)
                    frontier.append(c)
        return self.sort_nodes(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatentDag):
            return NotImplemented
        return (
            set(self.observed) == set(other.observed)
            and set(self.latent) == set(other.latent)
            and set(self._edges) == set(other._edges)
        )

    def __hash__(self) -> int:
        return hash((frozenset(self.observed), frozenset(self.latent), frozenset(self._edges)))

    def __repr__(self) -> str:
        arcs = ", ".join(f"{p}->{c}" for p, c in self._edges)
        return f"LatentDag(observed={list(self.observed)}, latent={list(self.latent)}, {arcs})"


def induced_subgraph(g, a: Iterable[str]):
    """Induced subgraph over ``a``; marks and visibility flags copied verbatim.

    For a :class:`LatentDag` the latents with both children inside ``a`` are
    retained as well.
    """
    a = list(a)
    if isinstance(g, LatentDag):
        for v in a:
            if v not in g.observed:
                raise ValueError(f"unknown observed node {v!r}")
        keep_obs = set(a)
        keep_lat = [u for u in g.latent if all(c in keep_obs for c in g.children(u))]
        keep = keep_obs | set(keep_lat)
        edges = [(p, c) for p, c in g.edges() if p in keep and c in keep]
        return LatentDag(g.sort_nodes(keep_obs), tuple(keep_lat), edges)

    for v in a:
        if not g.has_node(v):
            raise ValueError(f"unknown node {v!r}")
    keep = set(a)
    nodes = g.sort_nodes(keep)
    edges = [e for e in g.edges() if e[0] in keep and e[1] in keep]
    if isinstance(g, Pag):
        return Pag(nodes, edges, check_closure=False, check_visibility=False)
    if isinstance(g, Mag):
        return Mag(nodes, edges, validate=False)
    return MixedGraph(nodes, edges)


def mag_of_dag(d: LatentDag) -> Mag:
    """Project a latent-variable DAG onto its observed margin.

    Observed X, Y become adjacent iff the DAG has an inducing path between
    them relative to the latents; the mark at X is a tail iff X is an
    ancestor of Y.
    """
    an = {v: set(d.ancestors([v])) for v in d.observed}
    edges = []
    for x, y in itertools.combinations(d.observed, 2):
        if not _dag_inducing_path(d, x, y, an):
            continue
        mark_x = TAIL if x in an[y] else ARROW
        mark_y = TAIL if y in an[x] else ARROW
        edges.append((x, y, mark_x, mark_y, False))
    return Mag(d.sort_nodes(d.observed), edges)


def _dag_inducing_path(d: LatentDag, x: str, y: str, an: dict[str, set[str]]) -> bool:
    """Inducing path between observed x, y relative to the latents: every
    interior observed node is a collider on the path and an ancestor of an
    endpoint.  Latent interior nodes are exempt (and are never colliders,
    being roots)."""
    latent = set(d.latent)
    arrows: dict[tuple[str, str], bool] = {}
    neigh: dict[str, list[str]] = {v: [] for v in d.nodes}
    for p, c in d.edges():
        neigh[p].append(c)
        neigh[c].append(p)
        arrows[(p, c)] = True   # arrowhead at c
        arrows[(c, p)] = False
    ok_interior = latent | {v for v in d.observed if v in an[x] or v in an[y]}

    def interior_ok(prev: str, v: str, nxt: str) -> bool:
        if v in latent:
            return True
        return arrows[(prev, v)] and arrows[(nxt, v)] and v in ok_interior

    def step(path: list[str]) -> bool:
        v = path[-1]
        for w in neigh[v]:
            if w in path:
                continue
            if len(path) >= 2 and not interior_ok(path[-2], v, w):
                continue
            if w == y:
                return True
            if step(path + [w]):
                return True
        return False

    return step([x])
