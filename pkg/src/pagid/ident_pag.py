"""Identification of interventional distributions given a PAG.

The recursion removes whole buckets: a bucket is removable from the current
subgraph when none of its members has, within that subgraph, a possible
child outside the bucket lying in the same possible c-component.  Each
removal rewrites the running distribution expression through the bucket-level
reduction; the final form is cleaned up by independence-certified
conditioning drops so that only treatment and outcome symbols remain free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .exprs import (
    DistRef,
    Expr,
    Product,
    Quotient,
    SumOver,
    conditional_of,
    drop_certified_givens,
    join_certified_marginals,
    render_text,
    simplify,
)
from .graphs import MixedGraph, Pag, induced_subgraph, possible_ancestors
from .exprs import expr_size
from .separation import definitely_m_separated
from .structure import (
    PartialOrder,
    _pto_with_preference,
    cpc_components,
    dc_component,
    pc_component,
    possible_children,
    pto,
)


@dataclass(frozen=True)
class Fail:
    """The recursion got stuck computing Q[component] from Q[scope].

    ``witness`` is a pair (X, C): C is a possible child of the intervention
    node X inside the scope subgraph and shares its possible c-component.
    """

    scope: tuple[str, ...]
    component: tuple[str, ...]
    witness: tuple[str, str] | None

    def describe(self) -> str:
        msg = (
            f"Q[{','.join(self.component)}] is not computable from "
            f"Q[{','.join(self.scope)}]: no removable bucket"
        )
        if self.witness is not None:
            x, c = self.witness
            msg += f"; {c} is a possible child of {x} in its possible c-component"
        return msg


@dataclass
class TraceStep:
    """One bucket removal: Q[scope \\ bucket] was derived from Q[scope]."""

    scope: tuple[str, ...]
    bucket: tuple[str, ...]
    reduced: Expr

    def __str__(self) -> str:
        return f"Q[{','.join(v for v in self.scope if v not in self.bucket)}] = {render_text(self.reduced)}"


def bucket_identifiable(p_t: MixedGraph, x: Iterable[str]) -> tuple[bool, tuple[str, str] | None]:
    """Decide whether intervening on bucket ``x`` is reducible in ``p_t``.

    True when no member of ``x`` has a possible child outside ``x`` in the
    same possible c-component; otherwise False with a witness pair.
    """
    x = tuple(x)
    x_set = set(x)
    from .structure import buckets as bucket_partition

    if x_set not in [set(b) for b in bucket_partition(p_t)]:
        raise ValueError(f"{sorted(x_set)} is not a bucket of the graph")
    if not x_set < set(p_t.nodes):
        raise ValueError("bucket must be a strict subset of the graph nodes")
    for member in x:
        pc = set(pc_component(p_t, [member]))
        for child in possible_children(p_t, [member]):
            if child not in x_set and child in pc:
                return False, (member, child)
    return True, None


def q_reduce_bucket(
    p_t: MixedGraph, x: Iterable[str], q: Expr, order: PartialOrder
) -> Expr:
    """Bucket-level reduction of Q[t] to Q[t \\ x].

    Emits q / prod_i q(B_i | B^(i-1)) * sum_x prod_i q(B_i | B^(i-1)), the
    product running over the buckets inside the union S of the definite
    c-components of the members of ``x``; conditionals are taken against the
    symbolic base distribution ``q`` of the current recursion level.
    """
    x = tuple(x)
    ok, witness = bucket_identifiable(p_t, x)
    if not ok:
        raise ValueError(f"bucket {sorted(x)} is not removable; witness {witness}")
    t = tuple(p_t.nodes)
    s_union: set[str] = set()
    for member in x:
        s_union |= set(dc_component(p_t, [member]))
    terms = []
    for i, bucket in enumerate(order.buckets):
        if set(bucket) <= s_union:
            terms.append(conditional_of(q, bucket, order.preceding(i), scope=t))
        elif set(bucket) & s_union:
            raise ValueError("definite c-component is not a union of buckets")
    q_s: Expr = Product(tuple(terms)) if len(terms) != 1 else terms[0]
    return simplify(Product((Quotient(q, q_s), SumOver(x, q_s))))


def idp(
    x: Iterable[str],
    y: Iterable[str],
    p: Pag,
    *,
    choice_seed: int | None = None,
    trace: list[TraceStep] | None = None,
) -> Expr | Fail:
    """Expression for the effect of ``x`` on ``y`` given a PAG, or ``Fail``.

    ``choice_seed`` randomises which removable bucket is taken first (the
    default walks the partial order backwards); the verdict is invariant to
    that choice.  ``trace`` collects the intermediate reductions.
    """
    x, y = tuple(x), tuple(y)
    x_set, y_set = set(x), set(y)
    nodes = set(p.nodes)
    if not x_set or not y_set or x_set & y_set:
        raise ValueError("treatment and outcome must be nonempty and disjoint")
    if not x_set <= nodes or not y_set <= nodes:
        raise ValueError("treatment/outcome outside the graph nodes")
    rng = np.random.default_rng(choice_seed) if choice_seed is not None else None

    big_d = possible_ancestors(induced_subgraph(p, p.sort_nodes(nodes - x_set)), p.sort_nodes(y_set))
    comps = cpc_components(induced_subgraph(p, big_d))
    q0: Expr = DistRef(tuple(p.nodes))

    parts: list[Expr] = []
    for comp in comps:
        res = _identify(p, set(comp), list(p.nodes), q0, rng, trace)
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
        return definitely_m_separated(p, target, [var], rest)

    expr = drop_certified_givens(expr, certify, eligible)
    return join_certified_marginals(expr, lambda a, b: definitely_m_separated(p, a, b, ()))


def _identify(
    p: Pag,
    c_set: set[str],
    t: list[str],
    q: Expr,
    rng,
    trace: list[TraceStep] | None,
) -> Expr | Fail:
    while set(t) != c_set:
        p_t = induced_subgraph(p, t)
        order = pto(p_t)
        candidates = [b for b in order.buckets if set(b) <= set(t) - c_set]
        sequence = list(reversed(candidates))
        if rng is not None:
            sequence = [candidates[i] for i in rng.permutation(len(candidates))]
        pick = None
        witness = None
        for bucket in sequence:
            ok, wit = bucket_identifiable(p_t, bucket)
            if ok:
                pick = bucket
                break
            if witness is None:
                witness = wit
        if pick is None:
            return Fail(scope=tuple(t), component=p.sort_nodes(c_set), witness=witness)
        # Any valid partial order is sound; also try the one that postpones
        # the removed bucket and keep whichever reduction came out smaller.
        reduced = q_reduce_bucket(p_t, pick, q, order)
        late_order = _pto_with_preference(p_t, pick)
        if late_order != order:
            alternative = q_reduce_bucket(p_t, pick, q, late_order)
            if expr_size(alternative) < expr_size(reduced):
                reduced = alternative
        q = reduced
        t = [v for v in t if v not in set(pick)]
        if trace is not None:
            trace.append(TraceStep(scope=tuple(p_t.nodes), bucket=pick, reduced=q))
    return q
