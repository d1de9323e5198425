"""Network: a DAG plus one conditional distribution per node.

The joint density factorizes into per-node conditionals given parents.
Discrete nodes carry a CategoricalCpt, continuous nodes a ClgCpd, and
discrete nodes may only have discrete parents. Networks are immutable;
``validate`` reports every violated invariant instead of raising, so
callers that build networks incrementally can inspect all problems at
once. Constructors of record (fitting, file loading, the bundled
fixture) call ``require_valid`` before handing a network out.
"""

from __future__ import annotations

import math
import warnings
from typing import Mapping, Sequence

import numpy as np

from .cpd import CategoricalCpt, ClgCpd, VariableSpec, config_rows
from .data import ColumnSchema, Dataset
from .errors import (
    IncompleteAssignmentError,
    ModelError,
    TypeMismatchError,
    UnknownNodeError,
    ZeroProbabilityWarning,
)
from .graph import Dag

_LOG_2PI = math.log(2.0 * math.pi)

Assignment = Mapping[str, object]


class Network:
    """Immutable conditional linear Gaussian network.

    Parameters
    ----------
    dag : Dag
        Structure; node names must match specs and cpds exactly.
    specs : sequence of VariableSpec
        One declaration per node.
    cpds : sequence of CategoricalCpt or ClgCpd
        One conditional distribution per node.

    The constructor checks only naming consistency; semantic invariants
    (parent lists, CLG restriction, row sums, sd positivity) are checked
    by validate / require_valid.
    """

    def __init__(
        self,
        dag: Dag,
        specs: Sequence[VariableSpec],
        cpds: Sequence[CategoricalCpt | ClgCpd],
    ):
        self.dag = dag
        self.specs: dict[str, VariableSpec] = {}
        for spec in specs:
            if spec.name not in dag:
                raise UnknownNodeError(f"spec for unknown node {spec.name!r}")
            if spec.name in self.specs:
                raise ModelError(f"duplicate spec for {spec.name!r}")
            self.specs[spec.name] = spec
        missing = [v for v in dag.nodes if v not in self.specs]
        if missing:
            raise ModelError(f"missing specs for nodes {missing}")
        self.cpds: dict[str, CategoricalCpt | ClgCpd] = {}
        for cpd in cpds:
            if cpd.node not in dag:
                raise UnknownNodeError(f"cpd for unknown node {cpd.node!r}")
            if cpd.node in self.cpds:
                raise ModelError(f"duplicate cpd for {cpd.node!r}")
            self.cpds[cpd.node] = cpd
        missing = [v for v in dag.nodes if v not in self.cpds]
        if missing:
            raise ModelError(f"missing cpds for nodes {missing}")

    # -- structure helpers -------------------------------------------------

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.dag.nodes

    @property
    def discrete_nodes(self) -> tuple[str, ...]:
        return tuple(v for v in self.dag.nodes if self.specs[v].is_discrete)

    @property
    def continuous_nodes(self) -> tuple[str, ...]:
        return tuple(v for v in self.dag.nodes if not self.specs[v].is_discrete)

    def discrete_parents(self, node: str) -> tuple[str, ...]:
        return tuple(
            p for p in self.dag.ordered_parents(node) if self.specs[p].is_discrete
        )

    def continuous_parents(self, node: str) -> tuple[str, ...]:
        return tuple(
            p
            for p in self.dag.ordered_parents(node)
            if not self.specs[p].is_discrete
        )

    # -- validation ----------------------------------------------------------

    def validate(self) -> list[str]:
        """All violated invariants, one message each; empty iff valid."""
        problems: list[str] = []
        for node in self.dag.nodes:
            spec = self.specs[node]
            cpd = self.cpds[node]
            dag_parents = set(self.dag.parents(node))
            if spec.is_discrete:
                if not isinstance(cpd, CategoricalCpt):
                    problems.append(f"{node}: discrete node with {type(cpd).__name__}")
                    continue
                if cpd.states != spec.states:
                    problems.append(
                        f"{node}: cpt states {cpd.states} != spec states "
                        f"{spec.states}"
                    )
                cont = [
                    p
                    for p in cpd.parents
                    if p in self.specs and not self.specs[p].is_discrete
                ]
                if cont:
                    problems.append(
                        f"{node}: discrete node with continuous parents {cont}"
                    )
                problems += self._check_parent_lists(node, cpd.parents, dag_parents)
                problems += self._check_parent_states(
                    node, cpd.parents, cpd.parent_states
                )
                problems += cpd.check()
            else:
                if not isinstance(cpd, ClgCpd):
                    problems.append(
                        f"{node}: continuous node with {type(cpd).__name__}"
                    )
                    continue
                wrong_kind = [
                    p
                    for p in cpd.discrete_parents
                    if p in self.specs and not self.specs[p].is_discrete
                ] + [
                    p
                    for p in cpd.continuous_parents
                    if p in self.specs and self.specs[p].is_discrete
                ]
                if wrong_kind:
                    problems.append(
                        f"{node}: parents {wrong_kind} on the wrong side of the "
                        f"discrete/continuous partition"
                    )
                declared = tuple(cpd.discrete_parents) + tuple(cpd.continuous_parents)
                problems += self._check_parent_lists(node, declared, dag_parents)
                problems += self._check_parent_states(
                    node, cpd.discrete_parents, cpd.discrete_parent_states
                )
                problems += cpd.check()
        return problems

    def _check_parent_lists(self, node, declared, dag_parents) -> list[str]:
        declared = tuple(declared)
        if len(set(declared)) != len(declared):
            return [f"{node}: duplicate parent in cpd parent list {declared}"]
        if set(declared) != dag_parents:
            return [
                f"{node}: cpd parents {sorted(declared)} != graph parents "
                f"{sorted(dag_parents)}"
            ]
        return []

    def _check_parent_states(self, node, parents, parent_states) -> list[str]:
        problems = []
        for parent, states in zip(parents, parent_states):
            spec = self.specs.get(parent)
            if spec is None or not spec.is_discrete:
                continue
            if tuple(states) != spec.states:
                problems.append(
                    f"{node}: parent {parent} states {tuple(states)} != spec "
                    f"states {spec.states}"
                )
        return problems

    def require_valid(self) -> "Network":
        problems = self.validate()
        if problems:
            raise ModelError(
                "invalid network:\n" + "\n".join(f"  - {p}" for p in problems)
            )
        return self

    # -- density ---------------------------------------------------------------

    def log_density(self, assignment: Assignment) -> float:
        """Sum over nodes of log f(value | parent values).

        A zero CPT entry yields negative infinity and emits
        ZeroProbabilityWarning instead of raising, so batch likelihood
        evaluation can proceed.
        """
        values = self._coerce_complete(assignment)
        total = 0.0
        for node in self.dag.nodes:
            spec = self.specs[node]
            cpd = self.cpds[node]
            if spec.is_discrete:
                config = tuple(values[p] for p in cpd.parents)
                p = cpd.prob(config, values[node])
                if p == 0.0:
                    warnings.warn(
                        f"zero-probability state {values[node]!r} for {node} "
                        f"given {config}",
                        ZeroProbabilityWarning,
                        stacklevel=2,
                    )
                    total = float("-inf")
                    continue
                total += math.log(p)
            else:
                config = tuple(values[p] for p in cpd.discrete_parents)
                parent_values = [values[p] for p in cpd.continuous_parents]
                mu = cpd.conditional_mean(config, parent_values)
                sd = float(cpd.sds[cpd.config_index(config)])
                z = (values[node] - mu) / sd
                total += -0.5 * z * z - math.log(sd) - 0.5 * _LOG_2PI
        return total

    def _coerce_complete(self, assignment: Assignment) -> dict[str, object]:
        missing = [v for v in self.dag.nodes if v not in assignment]
        if missing:
            raise IncompleteAssignmentError(f"assignment missing nodes {missing}")
        values: dict[str, object] = {}
        for node in self.dag.nodes:
            value = assignment[node]
            spec = self.specs[node]
            if spec.is_discrete:
                state = str(value)
                if state not in spec.states:
                    raise TypeMismatchError(
                        f"{node}: {value!r} is not one of {spec.states}"
                    )
                values[node] = state
            else:
                if isinstance(value, bool) or not isinstance(
                    value, (int, float, np.integer, np.floating)
                ):
                    raise TypeMismatchError(
                        f"{node}: expected a real number, got {value!r}"
                    )
                values[node] = float(value)
        return values

    # -- conditional means ----------------------------------------------------

    def conditional_mean_profile(
        self,
        node: str,
        sweep_parent: str,
        grid: Sequence[float],
        fixed: Mapping[str, float] | None = None,
    ):
        """Conditional mean of ``node`` swept along one continuous parent.

        Returns one (config, grid value, mean) row per discrete-parent
        configuration and grid point, configuration-major. ``fixed``
        supplies values for the remaining continuous parents.
        """
        spec = self.specs.get(node)
        if spec is None:
            raise UnknownNodeError(f"no node named {node!r}")
        if spec.is_discrete:
            raise TypeMismatchError(f"{node!r} is discrete, has no conditional mean")
        cpd = self.cpds[node]
        assert isinstance(cpd, ClgCpd)
        if sweep_parent not in cpd.continuous_parents:
            raise TypeMismatchError(
                f"{sweep_parent!r} is not a continuous parent of {node!r}"
            )
        fixed = dict(fixed or {})
        others = [p for p in cpd.continuous_parents if p != sweep_parent]
        missing = [p for p in others if p not in fixed]
        if missing:
            raise IncompleteAssignmentError(
                f"profile needs fixed values for continuous parents {missing}"
            )
        rows = []
        for config in cpd.configs():
            for x in grid:
                parent_values = [
                    float(x) if p == sweep_parent else float(fixed[p])
                    for p in cpd.continuous_parents
                ]
                rows.append(
                    (config, float(x), cpd.conditional_mean(config, parent_values))
                )
        return rows

    # -- sampling -----------------------------------------------------------------

    def forward_sample(self, n: int, seed: int) -> Dataset:
        """Ancestral sample of n complete rows, deterministic given seed."""
        if n < 0:
            raise ValueError("n must be >= 0")
        rng = np.random.default_rng(seed)
        columns, _ = self._sample_columns(n, rng)
        schema = [ColumnSchema(v, self.specs[v].states) for v in self.dag.nodes]
        return Dataset(
            schema, columns, provenance=f"forward sample n={n} seed={seed}"
        )

    def _sample_columns(
        self,
        n: int,
        rng: np.random.Generator,
        clamped: Mapping[str, object] | None = None,
    ) -> tuple[dict[str, np.ndarray], np.ndarray | None]:
        """Vectorized ancestral sampling, one rng block per node in
        topological order.

        ``clamped`` pins nodes to fixed values (state code for discrete,
        float for continuous); clamped nodes consume no randomness and
        contribute their conditional density/probability to the returned
        per-sample log-weights (likelihood weighting). Returns (columns,
        log_weights); log_weights is None when nothing is clamped.
        """
        clamped = dict(clamped or {})
        unknown = [v for v in clamped if v not in self.dag]
        if unknown:
            raise UnknownNodeError(f"clamped unknown nodes {unknown}")
        columns: dict[str, np.ndarray] = {}
        log_w = np.zeros(n) if clamped else None
        for node in self.dag.topological_order():
            spec = self.specs[node]
            cpd = self.cpds[node]
            if spec.is_discrete:
                assert isinstance(cpd, CategoricalCpt)
                rows = config_rows(
                    cpd.parent_states, [columns[p] for p in cpd.parents], n
                )
                if node in clamped:
                    code = int(clamped[node])  # type: ignore[arg-type]
                    columns[node] = np.full(n, code, dtype=np.int64)
                    with np.errstate(divide="ignore"):
                        log_w += np.log(cpd.probs[rows, code])
                else:
                    u = rng.random(n)
                    cum = np.cumsum(cpd.probs, axis=1)[rows]
                    codes = (cum < u[:, None]).sum(axis=1).astype(np.int64)
                    # guards against cumulative sums a hair below 1
                    np.minimum(codes, len(spec.states) - 1, out=codes)
                    columns[node] = codes
            else:
                assert isinstance(cpd, ClgCpd)
                rows = config_rows(
                    cpd.discrete_parent_states,
                    [columns[p] for p in cpd.discrete_parents],
                    n,
                )
                mean = cpd.intercepts[rows]
                for j, parent in enumerate(cpd.continuous_parents):
                    mean = mean + cpd.coefficients[rows, j] * columns[parent]
                sd = cpd.sds[rows]
                if node in clamped:
                    x = float(clamped[node])  # type: ignore[arg-type]
                    columns[node] = np.full(n, x)
                    z = (x - mean) / sd
                    log_w += -0.5 * z * z - np.log(sd) - 0.5 * _LOG_2PI
                else:
                    columns[node] = mean + sd * rng.standard_normal(n)
        return columns, log_w

    # -- value semantics ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Network)
            and self.dag == other.dag
            and self.specs == other.specs
            and self.cpds == other.cpds
        )

    def __repr__(self) -> str:
        return (
            f"Network({len(self.dag.nodes)} nodes, {len(self.dag.edges)} edges, "
            f"{len(self.continuous_nodes)} continuous)"
        )
