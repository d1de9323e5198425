"""Shared network and dataset builders for the test suite."""

import numpy as np

from clgnet import Dataset, Network, VariableSpec
from clgnet.cpd import CategoricalCpt, ClgCpd
from clgnet.data import ColumnSchema
from clgnet.graph import Dag


def two_node_discrete() -> Network:
    """A -> B. P(B=1) = 0.3*0.1 + 0.7*0.8 = 0.59."""
    dag = Dag(("A", "B"), (("A", "B"),))
    specs = (
        VariableSpec.discrete("A", ("0", "1")),
        VariableSpec.discrete("B", ("0", "1")),
    )
    cpds = (
        CategoricalCpt("A", ("0", "1"), (), (), np.array([[0.3, 0.7]])),
        CategoricalCpt(
            "B", ("0", "1"), ("A",), (("0", "1"),),
            np.array([[0.9, 0.1], [0.2, 0.8]]),
        ),
    )
    return Network(dag, specs, cpds)


def mixture_net() -> Network:
    """A (fair coin) -> X with X | A=0 ~ N(0,1), X | A=1 ~ N(2,1)."""
    dag = Dag(("A", "X"), (("A", "X"),))
    specs = (VariableSpec.discrete("A", ("0", "1")), VariableSpec.continuous("X"))
    cpds = (
        CategoricalCpt("A", ("0", "1"), (), (), np.array([[0.5, 0.5]])),
        ClgCpd(
            "X", ("A",), (("0", "1"),), (),
            np.array([0.0, 2.0]), np.zeros((2, 0)), np.array([1.0, 1.0]),
        ),
    )
    return Network(dag, specs, cpds)


def chain_net() -> Network:
    """A -> X -> Y, all parameters hand-picked for density oracles."""
    dag = Dag(("A", "X", "Y"), (("A", "X"), ("X", "Y")))
    specs = (
        VariableSpec.discrete("A", ("0", "1")),
        VariableSpec.continuous("X"),
        VariableSpec.continuous("Y"),
    )
    cpds = (
        CategoricalCpt("A", ("0", "1"), (), (), np.array([[0.6, 0.4]])),
        ClgCpd(
            "X", ("A",), (("0", "1"),), (),
            np.array([1.0, -1.0]), np.zeros((2, 0)), np.array([2.0, 0.5]),
        ),
        ClgCpd("Y", (), (), ("X",), np.array([1.0]), np.array([[0.5]]), np.array([0.8])),
    )
    return Network(dag, specs, cpds)


def continuous_pair(x, y, names=("X", "Y")) -> Dataset:
    schema = [ColumnSchema(names[0]), ColumnSchema(names[1])]
    return Dataset.from_labels(schema, {names[0]: list(x), names[1]: list(y)})


def discrete_column(name: str, values, states=("0", "1")) -> Dataset:
    schema = [ColumnSchema(name, tuple(states))]
    return Dataset.from_labels(schema, {name: [str(v) for v in values]})


def random_discrete_net(rng: np.random.Generator, max_nodes: int = 5) -> Network:
    """Random binary network: edges i -> j (i < j) kept with prob 0.4,
    conditional probabilities bounded away from 0 and 1."""
    n = int(rng.integers(2, max_nodes + 1))
    names = [f"N{i}" for i in range(n)]
    dag = Dag(names)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                dag = dag.add_edge(names[i], names[j])
    specs = [VariableSpec.discrete(v, ("0", "1")) for v in names]
    cpds = []
    for v in names:
        parents = dag.ordered_parents(v)
        p_one = rng.uniform(0.05, 0.95, size=2 ** len(parents))
        probs = np.stack([1 - p_one, p_one], axis=1)
        cpds.append(
            CategoricalCpt(
                v, ("0", "1"), parents, tuple(("0", "1") for _ in parents), probs
            )
        )
    return Network(dag, specs, cpds)
