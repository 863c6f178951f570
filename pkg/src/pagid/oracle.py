"""Ground-truth machinery for verification.

Provides discrete structural models with exact joints and truncated
(interventional) distributions, the canonical DAG of a MAG, brute-force
Markov equivalence class enumeration by separation-model comparison, and
seeded random generators.  Everything here is deliberately exhaustive; the
size guards keep it at desk scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .exprs import JointTable
from .graphs import ARROW, CIRCLE, TAIL, LatentDag, Mag, MixedGraph, Pag, mag_of_dag, mag_violation
from .separation import m_separated
from .structure import graphical_visible_edges

MAX_JOINT_STATES = 1 << 20
MAX_CLASS_EDGES = 10
CPT_FLOOR = 1e-6


@dataclass(frozen=True)
class Scm:
    """Discrete structural model over a latent DAG with explicit CPTs.

    ``cpts[v]`` has one axis per parent of ``v`` (in graph parent order)
    plus a final axis for ``v``; every row sums to one.
    """

    graph: LatentDag
    cards: Mapping[str, int]
    cpts: Mapping[str, np.ndarray] = field(hash=False)

    def __post_init__(self):
        for v in self.graph.nodes:
            cpt = np.asarray(self.cpts[v], dtype=float)
            want = tuple(self.cards[p] for p in self.graph.parents(v)) + (self.cards[v],)
            if cpt.shape != want:
                raise ValueError(f"CPT shape for {v!r}: {cpt.shape} != {want}")
            if (cpt < 0).any():
                raise ValueError(f"negative CPT entry for {v!r}")
            if not np.allclose(cpt.sum(axis=-1), 1.0, atol=1e-12):
                raise ValueError(f"CPT rows for {v!r} do not sum to 1")


def _full_joint(s: Scm, skip: Sequence[str] = (), clamp: Mapping[str, int] | None = None) -> tuple[tuple[str, ...], np.ndarray]:
    """Joint over all nodes, skipping the CPTs in ``skip`` and clamping values."""
    order = s.graph.topological_order()
    clamp = clamp or {}
    states = 1
    for v in order:
        states *= s.cards[v]
    if states > MAX_JOINT_STATES:
        raise ValueError(f"joint state space {states} exceeds guard {MAX_JOINT_STATES}")
    axis = {v: i for i, v in enumerate(order)}
    shape = tuple(s.cards[v] for v in order)
    out = np.ones(shape)
    for v in order:
        if v in skip:
            continue
        cpt = np.asarray(s.cpts[v], dtype=float)
        dims = tuple(s.graph.parents(v)) + (v,)
        # reorder cpt axes to follow the global variable order, then broadcast
        order_pos = sorted(range(len(dims)), key=lambda i: axis[dims[i]])
        arranged = np.transpose(cpt, order_pos)
        perm_shape = [1] * len(order)
        for d in dims:
            perm_shape[axis[d]] = s.cards[d]
        out = out * arranged.reshape(perm_shape)
    for v, val in clamp.items():
        index = [slice(None)] * len(order)
        keep = np.zeros(s.cards[v])
        keep[val] = 1.0
        out = out * keep.reshape([s.cards[v] if u == v else 1 for u in order])
    return order, out


def joint(s: Scm) -> JointTable:
    """Exact observational distribution over the observed variables."""
    order, arr = _full_joint(s)
    latent_axes = tuple(i for i, v in enumerate(order) if v in s.graph.latent)
    obs = tuple(v for v in order if v not in s.graph.latent)
    marg = arr.sum(axis=latent_axes) if latent_axes else arr
    obs_sorted = tuple(sorted(obs, key=lambda x: (x.lower(), x)))
    perm = [obs.index(v) for v in obs_sorted]
    return JointTable(obs_sorted, tuple(s.cards[v] for v in obs_sorted), np.transpose(marg, perm))


def truncated(s: Scm, x: Mapping[str, int]) -> JointTable:
    """Exact interventional distribution: drop intervened CPTs, clamp values."""
    for v in x:
        if v not in s.graph.observed:
            raise ValueError(f"intervention on unknown observed node {v!r}")
    order, arr = _full_joint(s, skip=tuple(x), clamp=dict(x))
    drop = set(s.graph.latent) | set(x)
    axes = tuple(i for i, v in enumerate(order) if v in drop)
    keep = tuple(v for v in order if v not in drop)
    marg = arr.sum(axis=axes) if axes else arr
    keep_sorted = tuple(sorted(keep, key=lambda v: (v.lower(), v)))
    perm = [keep.index(v) for v in keep_sorted]
    return JointTable(keep_sorted, tuple(s.cards[v] for v in keep_sorted), np.transpose(marg, perm))


def canonical_dag_of_mag(m: Mag) -> LatentDag:
    """Directed edges kept; every bidirected edge becomes a fresh latent root."""
    edges: list[tuple[str, str]] = []
    latent: list[str] = []
    for a, b, ma, mb, _ in m.edges():
        if ma is ARROW and mb is ARROW:
            name = f"L{len(latent) + 1}"
            while name in m.nodes:
                name += "_"
            latent.append(name)
            edges.append((name, a))
            edges.append((name, b))
        elif ma is TAIL:
            edges.append((a, b))
        else:
            edges.append((b, a))
    return LatentDag(m.nodes, tuple(latent), edges)


def _separation_signature(g: MixedGraph) -> frozenset[tuple[str, str, tuple[str, ...]]]:
    """All separations (x, y, Z) over disjoint singleton pairs and subsets."""
    out = set()
    nodes = g.nodes
    for x, y in itertools.combinations(nodes, 2):
        rest = [v for v in nodes if v not in (x, y)]
        for r in range(len(rest) + 1):
            for z in itertools.combinations(rest, r):
                if m_separated(g, [x], [y], z):
                    out.add((x, y, z))
    return frozenset(out)


def _unshielded_colliders(g: MixedGraph) -> frozenset[tuple[str, str, str]]:
    out = set()
    for b in g.nodes:
        for a, c in itertools.combinations(g.neighbors(b), 2):
            if g.adjacent(a, c):
                continue
            if g.mark_at(b, a) is ARROW and g.mark_at(b, c) is ARROW:
                out.add((min(a, c), b, max(a, c)))
    return frozenset(out)


def equivalence_class(m: Mag) -> tuple[Mag, ...]:
    """All MAGs over the skeleton of ``m`` with the same separation model.

    Enumerates every tail/arrow assignment; candidates are prefiltered by the
    unshielded-collider fingerprint (a necessary condition) before the full
    model comparison decides membership.
    """
    skeleton = [(a, b) for a, b, *_ in m.edges()]
    if len(skeleton) > MAX_CLASS_EDGES:
        raise ValueError(
            f"{len(skeleton)} edges exceeds the enumeration guard {MAX_CLASS_EDGES}"
        )
    reference_sig = _separation_signature(m)
    reference_colliders = _unshielded_colliders(m)
    options = ((TAIL, ARROW), (ARROW, TAIL), (ARROW, ARROW))
    members = []
    for marks in itertools.product(options, repeat=len(skeleton)):
        edges = [
            (a, b, ma, mb, False) for (a, b), (ma, mb) in zip(skeleton, marks)
        ]
        candidate = MixedGraph(m.nodes, edges)
        if _unshielded_colliders(candidate) != reference_colliders:
            continue
        if mag_violation(candidate) is not None:
            continue
        if _separation_signature(candidate) != reference_sig:
            continue
        members.append(Mag(m.nodes, edges, validate=False))
    return tuple(members)


def pag_of_class(members: Sequence[Mag]) -> Pag:
    """Invariant marks across the class; circles elsewhere; visibility recomputed."""
    if not members:
        raise ValueError("empty equivalence class")
    skeleton = [(a, b) for a, b, *_ in members[0].edges()]
    for other in members[1:]:
        if [(a, b) for a, b, *_ in other.edges()] != skeleton or set(other.nodes) != set(
            members[0].nodes
        ):
            raise ValueError("equivalence class members disagree on the skeleton")
    edges = []
    for a, b in skeleton:
        marks_a = {g.mark_at(a, b) for g in members}
        marks_b = {g.mark_at(b, a) for g in members}
        ma = marks_a.pop() if len(marks_a) == 1 else CIRCLE
        mb = marks_b.pop() if len(marks_b) == 1 else CIRCLE
        edges.append((a, b, ma, mb, False))
    bare = MixedGraph(members[0].nodes, edges)
    visible = graphical_visible_edges(bare)
    flagged = [
        (a, b, ma, mb, (a, b) in visible or (b, a) in visible)
        for a, b, ma, mb, _ in bare.edges()
    ]
    return Pag(members[0].nodes, flagged, check_visibility=False)


def class_of_dag(d: LatentDag) -> tuple[tuple[Mag, ...], Pag]:
    """Equivalence class and PAG of the projection of ``d``."""
    members = equivalence_class(mag_of_dag(d))
    return members, pag_of_class(members)


def random_latent_dag(
    seed: int | np.random.Generator,
    n_obs: int,
    n_latent: int,
    edge_prob: float,
) -> LatentDag:
    """Seed-deterministic random DAG in canonical semi-Markovian form."""
    if not 1 <= n_obs <= 6:
        raise ValueError("n_obs must be between 1 and 6")
    if not 0 <= n_latent <= 3:
        raise ValueError("n_latent must be between 0 and 3")
    rng = np.random.default_rng(seed) if isinstance(seed, int) else seed
    observed = tuple(f"V{i + 1}" for i in range(n_obs))
    edges = [
        (observed[i], observed[j])
        for i in range(n_obs)
        for j in range(i + 1, n_obs)
        if rng.random() < edge_prob
    ]
    pairs = list(itertools.combinations(range(n_obs), 2))
    latent: list[str] = []
    if pairs and n_latent:
        chosen = rng.choice(len(pairs), size=min(n_latent, len(pairs)), replace=False)
        for k, pick in enumerate(sorted(int(i) for i in chosen)):
            i, j = pairs[pick]
            name = f"L{k + 1}"
            latent.append(name)
            edges.append((name, observed[i]))
            edges.append((name, observed[j]))
    return LatentDag(observed, tuple(latent), edges)


def random_scm(seed: int | np.random.Generator, d: LatentDag, card: int = 2) -> Scm:
    """Random CPTs with Dirichlet(1, ..., 1) rows, floored away from zero."""
    rng = np.random.default_rng(seed) if isinstance(seed, int) else seed
    cards = {v: card for v in d.nodes}
    cpts = {}
    for v in d.nodes:
        shape = tuple(cards[p] for p in d.parents(v)) + (cards[v],)
        rows = rng.dirichlet(np.ones(cards[v]), size=int(np.prod(shape[:-1], dtype=int)))
        rows = np.clip(rows, CPT_FLOOR, None)
        rows = rows / rows.sum(axis=-1, keepdims=True)
        cpts[v] = rows.reshape(shape)
    return Scm(d, cards, cpts)
