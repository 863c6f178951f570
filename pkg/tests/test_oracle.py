import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pagid.graphs import ARROW, CIRCLE, TAIL, LatentDag, Mag, mag_of_dag
from pagid.oracle import (
    Scm,
    canonical_dag_of_mag,
    class_of_dag,
    equivalence_class,
    joint,
    pag_of_class,
    random_latent_dag,
    random_scm,
    truncated,
)


def edge_view(g):
    return {(a, b): (ma, mb) for a, b, ma, mb, _ in g.edges()}


class TestScm:
    def test_single_binary_node(self):
        d = LatentDag(["A"], [], [])
        s = Scm(d, {"A": 2}, {"A": np.array([0.3, 0.7])})
        np.testing.assert_allclose(joint(s).probs, [0.3, 0.7])

    def test_independent_pair_is_product(self):
        d = LatentDag(["A", "B"], [], [])
        s = Scm(
            d,
            {"A": 2, "B": 2},
            {"A": np.array([0.2, 0.8]), "B": np.array([0.6, 0.4])},
        )
        np.testing.assert_allclose(joint(s).probs, np.outer([0.2, 0.8], [0.6, 0.4]))

    def test_cpt_rows_validated(self):
        d = LatentDag(["A"], [], [])
        with pytest.raises(ValueError, match="sum to 1"):
            Scm(d, {"A": 2}, {"A": np.array([0.5, 0.6])})

    def test_joint_normalised_on_random_scms(self, chain_dag):
        for seed in range(5):
            table = joint(random_scm(seed, chain_dag))
            assert abs(float(table.probs.sum()) - 1.0) <= 1e-12

    def test_truncated_chain_equals_conditional(self):
        d = LatentDag.from_specs(["X", "Y"], ["X -> Y"])
        s = random_scm(0, d)
        full = joint(s)
        for x in (0, 1):
            t = truncated(s, {"X": x})
            cond = full.probs[x] / full.probs[x].sum()
            np.testing.assert_allclose(t.probs, cond, atol=1e-12)

    def test_intervening_on_childless_node_is_marginalisation(self, chain_dag):
        s = random_scm(3, chain_dag)
        t = truncated(s, {"V4": 1})
        m = joint(s).array_for(t.variables)
        np.testing.assert_allclose(t.probs, m, atol=1e-12)

    def test_bow_truncation_differs_from_conditioning(self, bow):
        # deterministic structural sharing makes the gap large
        s = random_scm(1, bow)
        full = joint(s)
        t = truncated(s, {"X": 0})
        conditional = full.probs[0] / full.probs[0].sum()
        assert np.abs(t.probs - conditional).max() > 1e-3


class TestCanonicalDag:
    def test_bidirected_edge_becomes_latent(self):
        m = Mag.from_specs(["X", "Y"], ["X <-> Y"])
        d = canonical_dag_of_mag(m)
        assert d.observed == ("X", "Y") and len(d.latent) == 1

    def test_pure_dag_unchanged(self):
        m = Mag.from_specs(["A", "B"], ["A --> B"])
        d = canonical_dag_of_mag(m)
        assert d.latent == () and d.edges() == (("A", "B"),)

    @given(st.integers(0, 2000))
    @settings(max_examples=40, deadline=None)
    def test_roundtrip_on_enumerated_classes(self, seed):
        rng = np.random.default_rng(seed)
        d = random_latent_dag(rng, int(rng.integers(2, 6)), int(rng.integers(0, 3)), 0.4)
        members, _ = class_of_dag(d)
        for m in members:
            assert mag_of_dag(canonical_dag_of_mag(m)) == m


class TestEquivalenceClass:
    def test_single_edge_has_three_members(self):
        m = Mag.from_specs(["X", "Y"], ["X --> Y"])
        cls = equivalence_class(m)
        assert len(cls) == 3
        kinds = {edge_view(g)[("X", "Y")] for g in cls}
        assert kinds == {(TAIL, ARROW), (ARROW, TAIL), (ARROW, ARROW)}

    def test_unshielded_collider_has_four_members(self):
        m = Mag.from_specs(["V1", "X", "V2"], ["V1 --> X", "V2 --> X"])
        cls = equivalence_class(m)
        assert len(cls) == 4
        for g in cls:
            assert g.mark_at("X", "V1") is ARROW
            assert g.mark_at("X", "V2") is ARROW

    def test_reflexivity(self, chain_dag):
        m = mag_of_dag(chain_dag)
        assert m in equivalence_class(m)

    def test_edge_guard(self):
        specs = [f"N{i} --> N{i+1}" for i in range(11)]
        nodes = [f"N{i}" for i in range(12)]
        with pytest.raises(ValueError, match="guard"):
            equivalence_class(Mag.from_specs(nodes, specs))


class TestPagOfClass:
    def test_single_edge_class_gives_circle_pair(self):
        m = Mag.from_specs(["X", "Y"], ["X --> Y"])
        pag = pag_of_class(equivalence_class(m))
        assert edge_view(pag) == {("X", "Y"): (CIRCLE, CIRCLE)}

    def test_collider_class_keeps_arrowheads_only(self):
        m = Mag.from_specs(["V1", "X", "V2"], ["V1 --> X", "V2 --> X"])
        pag = pag_of_class(equivalence_class(m))
        assert edge_view(pag) == {
            ("V1", "X"): (CIRCLE, ARROW),
            ("X", "V2"): (ARROW, CIRCLE),
        }

    def test_confounded_chain_recovers_catalog_pag(self, chain_dag, chain_pag):
        _, pag = class_of_dag(chain_dag)
        assert pag == chain_pag
        assert pag.is_visible("X", "V3") and pag.is_visible("X", "V4")

    def test_both_chain_variants_share_the_class(self, chain_dag, chain_dag_alt):
        members, _ = class_of_dag(chain_dag)
        assert mag_of_dag(chain_dag_alt) in members

    def test_skeleton_mismatch_rejected(self):
        a = Mag.from_specs(["X", "Y"], ["X --> Y"])
        b = Mag(["X", "Y"], [])
        with pytest.raises(ValueError, match="skeleton"):
            pag_of_class([a, b])

    @given(st.integers(0, 1500))
    @settings(max_examples=30, deadline=None)
    def test_closure_and_mark_rules_hold(self, seed):
        from pagid.graphs import find_closure_violation

        rng = np.random.default_rng(seed)
        d = random_latent_dag(rng, int(rng.integers(2, 6)), int(rng.integers(0, 3)), 0.4)
        members, pag = class_of_dag(d)
        assert find_closure_violation(pag) is None
        for a, b, ma, mb, _ in pag.edges():
            marks_a = {m.mark_at(a, b) for m in members}
            marks_b = {m.mark_at(b, a) for m in members}
            assert (ma is CIRCLE) == (len(marks_a) > 1)
            assert (mb is CIRCLE) == (len(marks_b) > 1)


class TestRandomGenerators:
    def test_seed_determinism(self):
        d1 = random_latent_dag(5, 5, 2, 0.4)
        d2 = random_latent_dag(5, 5, 2, 0.4)
        assert d1 == d2
        s1, s2 = random_scm(9, d1), random_scm(9, d2)
        np.testing.assert_array_equal(joint(s1).probs, joint(s2).probs)

    def test_zero_edge_probability(self):
        d = random_latent_dag(0, 4, 0, 0.0)
        assert d.edges() == ()

    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            random_latent_dag(0, 9, 0, 0.4)
        with pytest.raises(ValueError):
            random_latent_dag(0, 4, 5, 0.4)
