"""Identification of interventional distributions given a latent-variable DAG.

Implements the step-wise decomposition: ancestral pruning, c-component
factorisation, and repeated removal of single nodes that are not confounded
with any of their children.  Non-identifiability is reported as a value
carrying the offending node and its confounded component.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .exprs import DistRef, Expr, Product, Quotient, SumOver, conditional_of, drop_certified_givens, join_certified_marginals, simplify
from .graphs import LatentDag, induced_subgraph
from .separation import d_separated


@dataclass(frozen=True)
class Fail:
    """Non-identifiability certificate: ``node`` shares its confounded
    component with one of its children inside the ``scope`` subgraph."""

    node: str
    component: tuple[str, ...]
    scope: tuple[str, ...]
    target: tuple[str, ...]

    def describe(self) -> str:
        comp = ",".join(self.component)
        return (
            f"Q[{','.join(self.target)}] is not computable from Q[{','.join(self.scope)}]: "
            f"node {self.node} shares the confounded component {{{comp}}} with a child"
        )


def c_components(d: LatentDag) -> tuple[tuple[str, ...], ...]:
    """Partition of the observed nodes by shared-latent connectivity."""
    parent = {v: v for v in d.observed}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u in d.latent:
        a, b = d.children(u)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    groups: dict[str, list[str]] = {}
    for v in d.observed:
        groups.setdefault(find(v), []).append(v)
    index = {v: i for i, v in enumerate(d.observed)}
    comps = [tuple(sorted(g, key=index.__getitem__)) for g in groups.values()]
    return tuple(sorted(comps, key=lambda c: index[c[0]]))


def q_reduce(d: LatentDag, t: Iterable[str], x: Iterable[str], q: Expr) -> Expr:
    """Reduce Q[t] to Q[t \\ x] when ``x`` is a descendant set inside its
    composite confounded component.

    Emits q / Q[S] * sum_x Q[S] with Q[S] assembled from ``q`` by the
    c-component factorisation under a topological order of the subgraph.
    """
    t = tuple(t)
    x = tuple(x)
    t_set, x_set = set(t), set(x)
    if not x_set or not x_set < t_set:
        raise ValueError("x must be a nonempty strict subset of t")
    dt = induced_subgraph(d, t)
    comps = c_components(dt)
    s_union: set[str] = set()
    for comp in comps:
        if set(comp) & x_set:
            s_union |= set(comp)
    ds = induced_subgraph(d, d.sort_nodes(s_union))
    escaped = set(ds.descendants(x_set)) - x_set
    if escaped:
        raise ValueError(
            f"{sorted(x_set)} is not a descendant set in its component: "
            f"descendants {sorted(escaped)} escape"
        )
    topo = [v for v in dt.topological_order() if v in t_set]
    terms = []
    for i, v in enumerate(topo):
        if v in s_union:
            terms.append(conditional_of(q, (v,), tuple(topo[:i]), scope=t))
    q_s = Product(tuple(terms)) if len(terms) != 1 else terms[0]
    return simplify(Product((Quotient(q, q_s), SumOver(x, q_s))))


def id_dag(
    x: Iterable[str], y: Iterable[str], d: LatentDag, *, choice_seed: int | None = None
) -> Expr | Fail:
    """Expression for the effect of ``x`` on ``y``, or a :class:`Fail` value.

    ``choice_seed`` shuffles the scan order over removal candidates; the
    default is a reverse-topological scan.  Any valid choice is sound and the
    verdict does not depend on it.
    """
    x, y = tuple(x), tuple(y)
    x_set, y_set = set(x), set(y)
    obs = set(d.observed)
    if not x_set or not y_set or x_set & y_set:
        raise ValueError("treatment and outcome must be nonempty and disjoint")
    if not x_set <= obs or not y_set <= obs:
        raise ValueError("treatment/outcome outside the observed nodes")
    rng = np.random.default_rng(choice_seed) if choice_seed is not None else None

    sub = induced_subgraph(d, d.sort_nodes(obs - x_set))
    big_d = tuple(v for v in sub.ancestors(d.sort_nodes(y_set)) if v in obs)
    comps = c_components(induced_subgraph(d, big_d))
    q0: Expr = DistRef(tuple(d.observed))

    parts: list[Expr] = []
    for comp in comps:
        res = _identify(d, set(comp), list(d.observed), q0, rng)
        if isinstance(res, Fail):
            return res
        parts.append(res)
    expr: Expr = Product(tuple(parts)) if len(parts) != 1 else parts[0]
    leftover = set(big_d) - y_set
    if leftover:
        expr = SumOver(tuple(leftover), expr)
    expr = simplify(expr)
    eligible = set(expr.free_vars()) - x_set - y_set

    def certify(target, var, rest):
        return d_separated(d, target, [var], rest)

    expr = drop_certified_givens(expr, certify, eligible)
    return join_certified_marginals(expr, lambda a, b: d_separated(d, a, b, ()))


def _identify(d: LatentDag, c_set: set[str], t: list[str], q: Expr, rng) -> Expr | Fail:
    while set(t) != c_set:
        dt = induced_subgraph(d, t)
        comps = c_components(dt)
        comp_of = {v: comp for comp in comps for v in comp}
        topo = [v for v in dt.topological_order() if v in set(t)]
        scan = [v for v in reversed(topo) if v not in c_set]
        if rng is not None:
            scan = [scan[i] for i in rng.permutation(len(scan))]
        pick = None
        for b in scan:
            if not set(comp_of[b]) & set(dt.children(b)):
                pick = b
                break
        if pick is None:
            b = scan[0]
            return Fail(
                node=b,
                component=comp_of[b],
                scope=tuple(t),
                target=d.sort_nodes(c_set),
            )
        q = q_reduce(d, tuple(t), (pick,), q)
        t = [v for v in t if v != pick]
    return q
