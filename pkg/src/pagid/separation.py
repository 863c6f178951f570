"""Path-based separation tests for DAGs, MAGs and PAGs.

Everything enumerates simple paths; blocking follows the usual collider /
non-collider rules.  The PAG test looks only at definite status paths and
opens colliders that are *possible* ancestors of the conditioning set, so a
separation verdict is conservative: it certifies independence in every graph
of the represented class.  On a MAG (no circles) the definite test coincides
with plain m-separation.
"""

from __future__ import annotations

from typing import Iterable

from .graphs import ARROW, CIRCLE, TAIL, LatentDag, MixedGraph, ancestors_in, possible_ancestors


def _paths(neigh: dict[str, list[str]], sources: set[str], targets: set[str]):
    """Yield all simple paths from any source to any target."""
    stack = [[s] for s in sorted(sources)]
    while stack:
        path = stack.pop()
        v = path[-1]
        for w in neigh[v]:
            if w in path or w in sources:
                continue
            if w in targets:
                yield path + [w]
            else:
                stack.append(path + [w])


def m_separated(g: MixedGraph, xs: Iterable[str], ys: Iterable[str], zs: Iterable[str]) -> bool:
    """m-separation in a MAG: no path connects ``xs`` and ``ys`` given ``zs``."""
    xs, ys, zs = set(xs), set(ys), set(zs)
    if xs & ys:
        raise ValueError("overlapping node sets")
    open_collider = set(ancestors_in(g, zs)) if zs else set()
    neigh = {v: list(g.neighbors(v)) for v in g.nodes}
    for path in _paths(neigh, xs, ys):
        if _mag_path_connects(g, path, zs, open_collider):
            return False
    return True


def _mag_path_connects(g: MixedGraph, path: list[str], zs: set[str], open_collider: set[str]) -> bool:
    for i in range(1, len(path) - 1):
        prev, v, nxt = path[i - 1], path[i], path[i + 1]
        collider = g.mark_at(v, prev) is ARROW and g.mark_at(v, nxt) is ARROW
        if collider:
            if v not in open_collider:
                return False
        elif v in zs:
            return False
    return True


def d_separated(d: LatentDag, xs: Iterable[str], ys: Iterable[str], zs: Iterable[str]) -> bool:
    """d-separation in a latent DAG, latents treated as ordinary path nodes."""
    xs, ys, zs = set(xs), set(ys), set(zs)
    if xs & ys:
        raise ValueError("overlapping node sets")
    arrow_at: dict[tuple[str, str], bool] = {}
    neigh: dict[str, list[str]] = {v: [] for v in d.nodes}
    for p, c in d.edges():
        neigh[p].append(c)
        neigh[c].append(p)
        arrow_at[(c, p)] = True  # arrowhead at c on edge p->c
        arrow_at[(p, c)] = False
    open_collider = set(d.ancestors(zs)) if zs else set()
    for path in _paths(neigh, xs, ys):
        ok = True
        for i in range(1, len(path) - 1):
            prev, v, nxt = path[i - 1], path[i], path[i + 1]
            collider = arrow_at[(v, prev)] and arrow_at[(v, nxt)]
            if collider:
                if v not in open_collider:
                    ok = False
                    break
            elif v in zs:
                ok = False
                break
        if ok:
            return False
    return True


def definite_status_interior(g: MixedGraph, path: list[str]) -> list[str] | None:
    """Per-interior-node statuses, or None when some node has no definite status.

    A node is a definite collider when both path edges point into it, and a
    definite non-collider when one path edge carries a tail at it, or both
    carry circles while its path neighbours are non-adjacent.
    """
    statuses = []
    for i in range(1, len(path) - 1):
        prev, v, nxt = path[i - 1], path[i], path[i + 1]
        m_prev, m_nxt = g.mark_at(v, prev), g.mark_at(v, nxt)
        if m_prev is ARROW and m_nxt is ARROW:
            statuses.append("collider")
        elif m_prev is TAIL or m_nxt is TAIL:
            statuses.append("noncollider")
        elif m_prev is CIRCLE and m_nxt is CIRCLE and not g.adjacent(prev, nxt):
            statuses.append("noncollider")
        else:
            return None
    return statuses


def definitely_m_separated(
    g: MixedGraph, xs: Iterable[str], ys: Iterable[str], zs: Iterable[str]
) -> bool:
    """True when every definite status path between ``xs`` and ``ys`` is blocked.

    Colliders count as open when they are possible ancestors of ``zs``; the
    verdict therefore implies m-separation in every MAG represented by ``g``.
    """
    xs, ys, zs = set(xs), set(ys), set(zs)
    if xs & ys:
        raise ValueError("overlapping node sets")
    open_collider = set(possible_ancestors(g, zs)) if zs else set()
    neigh = {v: list(g.neighbors(v)) for v in g.nodes}
    for path in _paths(neigh, xs, ys):
        statuses = definite_status_interior(g, path)
        if statuses is None:
            continue
        connecting = True
        for v, status in zip(path[1:-1], statuses):
            if status == "collider":
                if v not in open_collider:
                    connecting = False
                    break
            elif v in zs:
                connecting = False
                break
        if connecting:
            return False
    return True
