import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import max_value_gap, random_joint_table
from pagid.exprs import (
    Conditional,
    DistRef,
    JointTable,
    Product,
    Quotient,
    SumOver,
    conditional_of,
    drop_certified_givens,
    evaluate,
    expr_size,
    join_certified_marginals,
    render_latex,
    render_text,
    simplify,
    to_json,
    to_json_dict,
)
from pagid.separation import definitely_m_separated

TWIN_VARS = ("V1", "V2", "X1", "X2", "Y1", "Y2", "Y3")


def P(*target, given=(), do=()):
    target = tuple(target)
    if not given:
        return DistRef(target, tuple(do))
    return Conditional(target, tuple(given), DistRef(target + tuple(given), tuple(do)))


class TestJointTable:
    def test_mass_validation(self):
        with pytest.raises(ValueError, match="mass"):
            JointTable(("A",), (2,), np.array([0.7, 0.7]))

    def test_negative_entry_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            JointTable(("A",), (2,), np.array([1.5, -0.5]))

    def test_marginal_order(self):
        t = JointTable(("A", "B"), (2, 2), np.array([[0.1, 0.2], [0.3, 0.4]]))
        np.testing.assert_allclose(t.array_for(("B",)), [0.4, 0.6])


class TestEvaluate:
    def test_uniform_pair(self):
        t = JointTable(("A", "B"), (2, 2), np.full((2, 2), 0.25))
        e = DistRef(("A", "B"))
        for a in (0, 1):
            for b in (0, 1):
                assert evaluate(e, {(): t}, {"A": a, "B": b}) == pytest.approx(0.25)

    def test_total_mass(self):
        rng = np.random.default_rng(3)
        t = random_joint_table(rng, ("A", "B", "C"))
        e = SumOver(("A", "B", "C"), DistRef(("A", "B", "C")))
        assert evaluate(e, {(): t}, {}) == pytest.approx(1.0, abs=1e-12)

    def test_zero_mass_conditional_returns_zero(self):
        probs = np.array([[0.5, 0.5], [0.0, 0.0]])
        t = JointTable(("A", "B"), (2, 2), probs)
        e = P("B", given=("A",))
        assert evaluate(e, {(): t}, {"A": 1, "B": 0}) == 0.0

    def test_missing_table(self):
        e = DistRef(("A",), ("B",))
        with pytest.raises(KeyError, match="missing table"):
            evaluate(e, {}, {"A": 0, "B": 0})

    def test_interventional_reference_reads_regime_table(self, bow):
        # a table registered under an interventions key serves P_x directly
        from pagid.oracle import random_scm, truncated

        scm = random_scm(4, bow)
        regime = truncated(scm, {"X": 1})
        e = DistRef(("Y",), ("X",))
        for y in (0, 1):
            got = evaluate(e, {("X",): regime}, {"X": 1, "Y": y})
            assert got == pytest.approx(regime.prob({"Y": y}), abs=1e-12)

    def test_assignment_out_of_range(self):
        t = JointTable(("A",), (2,), np.array([0.5, 0.5]))
        with pytest.raises(ValueError, match="range"):
            evaluate(DistRef(("A",)), {(): t}, {"A": 5})


class TestSimplify:
    def test_first_twin_reduction_collapses_to_a_joint(self):
        # the quotient strips the conditional chain, the sum marginalises it
        cond = P("X1", "X2", "Y1", "Y2", "Y3", given=("V1", "V2"))
        e = Product(
            (
                Quotient(DistRef(TWIN_VARS), cond),
                SumOver(("Y3",), cond),
            )
        )
        assert render_text(simplify(e)) == "P(v1,v2,x1,x2,y1,y2)"

    def test_certified_drop_then_sum_eliminates_context(self, twin_pag):
        e = SumOver(
            ("V1", "V2"),
            Product((DistRef(("V1", "V2")), P("Y1", "Y2", given=("X1", "V1", "V2")))),
        )

        def certify(target, var, rest):
            return definitely_m_separated(twin_pag, target, [var], rest)

        dropped = drop_certified_givens(e, certify, {"V1", "V2"})
        assert render_text(dropped) == "P(y1,y2|x1)"

    def test_drop_is_caller_certified_only(self):
        e = P("Y1", given=("V1",))
        unchanged = drop_certified_givens(e, lambda *a: False, {"V1"})
        assert unchanged == simplify(e)

    def test_idempotent_on_fixture_corpus(self, twin_pag, chain_pag, ring_pag):
        for e in _expression_corpus(twin_pag, chain_pag, ring_pag):
            once = simplify(e)
            assert simplify(once) == once

    def test_chain_merge(self):
        e = Product((P("A"), P("B", given=("A",))))
        assert render_text(simplify(e)) == "P(a,b)"

    def test_quotient_rule_splits_conditional(self):
        e = Quotient(DistRef(("A", "B", "C")), P("B", given=("A",)))
        assert render_text(simplify(e)) == "P(a) * P(c|a,b)"

    def test_sum_pulls_out_constant_factors(self):
        e = SumOver(("B",), Product((P("A"), P("B", given=("A",)))))
        assert render_text(simplify(e)) == "P(a)"

    def test_free_vars_never_grow(self, twin_pag, chain_pag, ring_pag):
        for e in _expression_corpus(twin_pag, chain_pag, ring_pag):
            assert set(simplify(e).free_vars()) <= set(e.free_vars())

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_rewrites_preserve_value(self, seed):
        rng = np.random.default_rng(seed)
        tables = {(): random_joint_table(rng, TWIN_VARS)}
        for e in _expression_corpus(None, None, None):
            assert max_value_gap(e, simplify(e), tables) <= 1e-12

    def test_first_twin_reduction_equals_direct_marginal(self, twin_pag):
        # evaluating the unsimplified quotient-sum form on a class model
        # gives exactly the six-variable marginal
        from pagid.graphs import CIRCLE, Mag, TAIL
        from pagid.oracle import canonical_dag_of_mag, joint, random_scm

        edges = [
            (a, b, TAIL if ma is CIRCLE else ma, TAIL if mb is CIRCLE else mb, False)
            for a, b, ma, mb, _ in twin_pag.edges()
        ]
        cdag = canonical_dag_of_mag(Mag(twin_pag.nodes, edges))
        cond = P("X1", "X2", "Y1", "Y2", "Y3", given=("V1", "V2"))
        rhs = Product((Quotient(DistRef(TWIN_VARS), cond), SumOver(("Y3",), cond)))
        marginal = DistRef(("V1", "V2", "X1", "X2", "Y1", "Y2"))
        for seed in range(5):
            tables = {(): joint(random_scm(seed, cdag))}
            assert max_value_gap(rhs, marginal, tables) <= 1e-12


def _expression_corpus(twin_pag, chain_pag, ring_pag):
    """Expressions exercising every rewrite; all over the twin variable set."""
    cond = P("X1", "X2", "Y1", "Y2", "Y3", given=("V1", "V2"))
    q5 = Product((Quotient(DistRef(TWIN_VARS), cond), SumOver(("Y3",), cond)))
    corpus = [
        DistRef(TWIN_VARS),
        cond,
        q5,
        Product((P("V1"), P("V2", given=("V1",)), P("Y1", given=("V1", "V2")))),
        Quotient(DistRef(("V1", "V2", "X1")), P("X1", given=("V1", "V2"))),
        SumOver(("X1", "X2"), P("X1", "X2", given=("V1", "V2"))),
        SumOver(
            ("V2",),
            Product((DistRef(("V1", "V2")), P("Y1", "Y2", given=("X1", "V1", "V2")))),
        ),
        conditional_of(
            Product((DistRef(("V1", "V2")), P("X1", "X2", given=("V1", "V2")))),
            ("X1",),
            ("V1",),
            ("V1", "V2", "X1", "X2"),
        ),
        Quotient(q5, P("X1", given=("V1", "V2"))),
    ]
    return corpus


class TestConditionalOf:
    def test_observational_base(self):
        q = DistRef(("A", "B", "C"))
        e = conditional_of(q, ("B",), ("A",), ("A", "B", "C"))
        assert render_text(e) == "P(b|a)"

    def test_intervention_arguments_pass_through(self):
        # base carries a conditioning variable outside the scope
        q = Product((DistRef(("A", "B")), P("C", given=("A", "B", "D"))))
        e = conditional_of(q, ("C",), ("B",), ("A", "B", "C"))
        assert "d" in render_text(e)


class TestJoinCertifiedMarginals:
    def test_joins_only_with_certificate(self):
        e = Product((P("A"), P("B")))
        joined = join_certified_marginals(e, lambda a, b: True)
        assert render_text(joined) == "P(a,b)"
        kept = join_certified_marginals(e, lambda a, b: False)
        assert render_text(kept) == "P(a) * P(b)"


class TestRendering:
    def test_factor_order_is_canonical(self):
        e = simplify(Product((P("V3", "V4", given=("V1", "V2", "X")), P("V1", "V2"))))
        assert render_text(e) == "P(v1,v2) * P(v3,v4|v1,v2,x)"

    def test_sum_rendering(self):
        e = SumOver(("V1",), Product((P("Y", given=("X", "V1")), P("V1"))))
        assert render_text(simplify(e)) == "sum_{v1} [P(v1) * P(y|v1,x)]"

    def test_latex(self):
        e = simplify(Product((P("V1", "V2"), P("Y1", given=("X1",)))))
        assert render_latex(e) == r"P(v_{1},v_{2}) \cdot P(y_{1} \mid x_{1})"

    def test_json_is_sorted_and_stable(self):
        e = simplify(SumOver(("V1",), Product((P("Y", given=("X", "V1")), P("V1")))))
        blob = to_json(e)
        assert blob == to_json(simplify(e))
        tree = to_json_dict(e)
        assert tree["kind"] == "sum" and tree["vars"] == ["v1"]

    def test_expr_size_counts_nodes(self):
        assert expr_size(Product((P("A"), P("B", given=("A",))))) == 4
