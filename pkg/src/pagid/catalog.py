"""Small catalog of example graphs used by the docs, the CLI and the tests."""

from __future__ import annotations

from .graphs import LatentDag, Pag


def confounded_chain_dag() -> LatentDag:
    """Five observed nodes: two causes of X (one confounded with it) and a
    confounded chain X -> V3 -> V4 downstream."""
    return LatentDag.from_specs(
        ["V1", "V2", "X", "V3", "V4"],
        ["V1 -> X", "V2 -> X", "V2 <-> X", "X -> V3", "V3 -> V4", "V3 <-> V4"],
    )


def confounded_chain_dag_alt() -> LatentDag:
    """Markov-equivalent variant of :func:`confounded_chain_dag` where both
    causes of X are purely confounded and X feeds V4 directly as well."""
    return LatentDag.from_specs(
        ["V1", "V2", "X", "V3", "V4"],
        ["V1 <-> X", "V2 <-> X", "X -> V3", "X -> V4", "V3 -> V4", "V3 <-> V4"],
    )


def confounded_chain_pag() -> Pag:
    """The PAG shared by the two confounded-chain DAGs."""
    return Pag.from_specs(
        ["V1", "V2", "X", "V3", "V4"],
        [
            "V1 o-> X",
            "V2 o-> X",
            "X --> V3 visible",
            "X --> V4 visible",
            "V3 o-o V4",
        ],
    )


def two_treatment_pag() -> Pag:
    """Seven nodes, two treatments with visible effects and a bidirected web
    tying treatments and outcomes together."""
    return Pag.from_specs(
        ["V1", "V2", "X1", "X2", "Y1", "Y2", "Y3"],
        [
            "V1 o-> X1",
            "V2 o-> X2",
            "X1 --> Y1 visible",
            "X2 --> Y3 visible",
            "X1 <-> X2",
            "X1 <-> Y3",
            "X2 <-> Y2",
            "Y1 <-> Y2",
        ],
    )


def beyond_adjustment_pag() -> Pag:
    """Effect of X on Y is identifiable by decomposition but not by covariate
    adjustment: every back-path is bidirected, yet X -> Z -> Y is visible."""
    return Pag.from_specs(
        ["V1", "X", "V2", "V3", "V4", "Z", "Y"],
        [
            "V1 o-> X",
            "X <-> V2",
            "V2 <-> V3",
            "V3 <-> V4",
            "V4 <-> Z",
            "V3 --> X visible",
            "X --> Z visible",
            "V2 --> Y visible",
            "V4 --> Y visible",
            "Z --> Y visible",
        ],
    )


def bow_dag() -> LatentDag:
    """X -> Y with X and Y confounded; the textbook non-identifiable pair."""
    return LatentDag.from_specs(["X", "Y"], ["X -> Y", "X <-> Y"])


def circle_pair_pag() -> Pag:
    """Two nodes joined by a circle-circle edge; nothing is identifiable."""
    return Pag.from_specs(["X", "Y"], ["X o-o Y"])
