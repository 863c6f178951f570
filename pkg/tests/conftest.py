import itertools

import numpy as np
import pytest

from pagid.catalog import (
    beyond_adjustment_pag,
    bow_dag,
    circle_pair_pag,
    confounded_chain_dag,
    confounded_chain_dag_alt,
    confounded_chain_pag,
    two_treatment_pag,
)
from pagid.exprs import JointTable, evaluate_table


@pytest.fixture
def chain_pag():
    return confounded_chain_pag()


@pytest.fixture
def chain_dag():
    return confounded_chain_dag()


@pytest.fixture
def chain_dag_alt():
    return confounded_chain_dag_alt()


@pytest.fixture
def twin_pag():
    return two_treatment_pag()


@pytest.fixture
def ring_pag():
    return beyond_adjustment_pag()


@pytest.fixture
def bow():
    return bow_dag()


@pytest.fixture
def circle_pair():
    return circle_pair_pag()


def random_joint_table(rng, variables, card=2):
    """Dense random table over ``variables`` with Dirichlet(1,...,1) mass."""
    variables = tuple(sorted(variables, key=lambda v: (v.lower(), v)))
    shape = tuple(card for _ in variables)
    probs = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    return JointTable(variables, shape, probs)


def max_value_gap(e1, e2, tables):
    """Largest pointwise difference between two expressions on ``tables``."""
    v1, a1 = evaluate_table(e1, tables)
    v2, a2 = evaluate_table(e2, tables)
    cards = {}
    for table in tables.values():
        cards.update(zip(table.variables, table.cards))
    union = sorted(set(v1) | set(v2), key=lambda v: (v.lower(), v))
    gap = 0.0
    for vals in itertools.product(*(range(cards[v]) for v in union)):
        bound = dict(zip(union, vals))
        x1 = float(a1[tuple(bound[v] for v in v1)])
        x2 = float(a2[tuple(bound[v] for v in v2)])
        gap = max(gap, abs(x1 - x2))
    return gap
