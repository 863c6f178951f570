"""PAG analytics: edge visibility, buckets, the partial topological order,
and the possible/definite/composite component notions used by identification.

All functions accept a full PAG or any of its induced subgraphs.  Component
searches enumerate simple paths only; at the enforced graph sizes a
connecting walk always contains a connecting simple path of the required
form (cross-checked against a bounded walk search in the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graphs import ARROW, TAIL, MixedGraph


def graphical_visible_edges(g: MixedGraph) -> frozenset[tuple[str, str]]:
    """Directed edges x -> y certified visible by the graphical condition.

    x -> y is visible when some node z not adjacent to y either has an edge
    into x, or reaches x by a collider path into x whose every collider is a
    parent of y.
    """
    out = set()
    for x, y in g.directed_edges():
        if _visibility_witness(g, x, y) is not None:
            out.add((x, y))
    return frozenset(out)


def _visibility_witness(g: MixedGraph, x: str, y: str) -> str | None:
    parents_y = set(g.parents(y))
    for z in g.nodes:
        if z in (x, y) or g.adjacent(z, y):
            continue
        if _collider_path_into(g, z, x, parents_y):
            return z
    return None


def _collider_path_into(g: MixedGraph, z: str, x: str, allowed: set[str]) -> bool:
    """Path z ... x into x whose interior nodes are colliders drawn from
    ``allowed``.  The single edge z *-> x qualifies."""

    def step(path: list[str]) -> bool:
        v = path[-1]
        for w in g.neighbors(v):
            if w in path:
                continue
            if len(path) >= 2:
                prev = path[-2]
                if not (g.mark_at(v, prev) is ARROW and g.mark_at(v, w) is ARROW):
                    continue
                if v not in allowed:
                    continue
            if w == x:
                if g.mark_at(x, v) is ARROW:
                    return True
                continue
            if step(path + [w]):
                return True
        return False

    return step([z])


def visible_edges(g: MixedGraph) -> frozenset[tuple[str, str]]:
    """Visible directed edges: carried flags plus the graphical condition.

    Flags dominate on induced subgraphs, where an edge stays visible even
    after its graphical witness has been cut away.
    """
    flagged = {
        (a, b) if ma is TAIL else (b, a)
        for a, b, ma, mb, vis in g.edges()
        if vis
    }
    return graphical_visible_edges(g) | frozenset(flagged)


def buckets(g: MixedGraph) -> tuple[tuple[str, ...], ...]:
    """Partition of the nodes into circle-connected components."""
    comp: dict[str, int] = {}
    out: list[list[str]] = []
    for v in g.nodes:
        if v in comp:
            continue
        group = [v]
        comp[v] = len(out)
        frontier = [v]
        while frontier:
            u = frontier.pop()
            for w in g.neighbors(u):
                if w not in comp and g.is_circle_circle(u, w):
                    comp[w] = comp[v]
                    group.append(w)
                    frontier.append(w)
        out.append(group)
    return tuple(g.sort_nodes(group) for group in out)


@dataclass(frozen=True)
class PartialOrder:
    """Buckets ordered so that arrows between buckets always point forward."""

    buckets: tuple[tuple[str, ...], ...]

    def position(self, v: str) -> int:
        for i, b in enumerate(self.buckets):
            if v in b:
                return i
        raise KeyError(v)

    def bucket_of(self, v: str) -> tuple[str, ...]:
        return self.buckets[self.position(v)]

    def preceding(self, i: int) -> tuple[str, ...]:
        """All nodes in buckets strictly before bucket ``i``."""
        return tuple(v for b in self.buckets[:i] for v in b)

    def __iter__(self):
        return iter(self.buckets)


def pto(g: MixedGraph) -> PartialOrder:
    """Partial topological order over the buckets of ``g``.

    Repeatedly extracts a bucket with only arrowheads incident on it from
    other buckets and returns the reverse extraction order.  Ties are broken
    by extracting the bucket whose smallest member is lexicographically
    largest, which fixes a deterministic total choice; any choice is sound.
    """
    return _pto_with_preference(g, None)


def _pto_with_preference(g: MixedGraph, extract_first: tuple[str, ...] | None) -> PartialOrder:
    """Partial order extraction, optionally pulling one bucket forward.

    ``extract_first`` is taken whenever it is extractable, which places it as
    late as possible in the resulting order; every extraction choice yields a
    sound order, so callers may pick whichever produces a simpler reduction.
    """
    from .graphs import find_closure_violation

    violation = find_closure_violation(g)
    if violation is not None:
        raise ValueError(f"arrowhead closure violated at triple {violation}")

    remaining = list(buckets(g))
    removed: set[str] = set()
    extracted: list[tuple[str, ...]] = []
    while remaining:
        candidates = []
        for b in remaining:
            members = set(b)
            ok = all(
                g.mark_at(u, w) is ARROW
                for u in b
                for w in g.neighbors(u)
                if w not in members and w not in removed
            )
            if ok:
                candidates.append(b)
        if not candidates:
            raise ValueError("no extractable bucket; input is not a valid PAG")
        if extract_first is not None and extract_first in candidates:
            pick = extract_first
        else:
            pick = max(candidates, key=lambda b: min(b))
        extracted.append(pick)
        remaining.remove(pick)
        removed.update(pick)
    return PartialOrder(tuple(reversed(extracted)))


def pc_component(g: MixedGraph, seed: Iterable[str]) -> tuple[str, ...]:
    """Possible c-component of ``seed``: nodes connected to it by a path whose
    non-endpoints are all colliders and whose edges are all invisible."""
    seed = list(seed)
    for v in seed:
        if not g.has_node(v):
            raise ValueError(f"unknown node {v!r}")
    visible = visible_edges(g)

    def invisible(u: str, w: str) -> bool:
        return (u, w) not in visible and (w, u) not in visible

    reached = set(seed)

    def step(path: list[str]) -> None:
        v = path[-1]
        for w in g.neighbors(v):
            if w in path or not invisible(v, w):
                continue
            if len(path) >= 2:
                prev = path[-2]
                if not (g.mark_at(v, prev) is ARROW and g.mark_at(v, w) is ARROW):
                    continue
            reached.add(w)
            step(path + [w])

    for s in seed:
        step([s])
    return g.sort_nodes(reached)


def dc_component(g: MixedGraph, seed: Iterable[str]) -> tuple[str, ...]:
    """Definite c-component: transitive closure of bidirected edges."""
    seed = list(seed)
    for v in seed:
        if not g.has_node(v):
            raise ValueError(f"unknown node {v!r}")
    out = set(seed)
    frontier = list(seed)
    while frontier:
        v = frontier.pop()
        for w in g.neighbors(v):
            if w not in out and g.is_bidirected(v, w):
                out.add(w)
                frontier.append(w)
    return g.sort_nodes(out)


def cpc_components(g: MixedGraph) -> tuple[tuple[str, ...], ...]:
    """Unique partition into composite pc-components (transitive closure of
    the pc-component relation)."""
    parent = {v: v for v in g.nodes}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for v in g.nodes:
        for w in pc_component(g, [v]):
            union(v, w)
    groups: dict[str, list[str]] = {}
    for v in g.nodes:
        groups.setdefault(find(v), []).append(v)
    comps = [g.sort_nodes(members) for members in groups.values()]
    index = {v: i for i, v in enumerate(g.nodes)}
    return tuple(sorted(comps, key=lambda c: index[c[0]]))


def possible_children(g: MixedGraph, xs: Iterable[str]) -> tuple[str, ...]:
    """Nodes adjacent to some member of ``xs`` by an edge not into that member."""
    xs = list(xs)
    for v in xs:
        if not g.has_node(v):
            raise ValueError(f"unknown node {v!r}")
    out = set()
    for x in xs:
        for w in g.neighbors(x):
            if g.mark_at(x, w) is not ARROW:
                out.add(w)
    return g.sort_nodes(out)
