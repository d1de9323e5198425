"""Maximum-likelihood parameter fitting and decomposable BIC scoring.

Discrete nodes get relative-frequency tables (optional pseudo-count
smoothing, default off). Continuous nodes get per-configuration ordinary
least squares on their continuous parents, with the MLE standard
deviation (RSS / n_c), so the fitted parameters maximize the likelihood
exactly. Rows with a missing value anywhere in a family are dropped for
that family only.

The structure score is BIC in the maximized form

    bic = log_lik - (param_count / 2) * ln(n)

so higher is better, and the total decomposes as a sum over families.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .cpd import CategoricalCpt, ClgCpd, VariableSpec, config_rows, iter_configs
from .data import MISSING_CODE, ColumnSchema, Dataset
from .errors import (
    ClgRestrictionError,
    EmptyDatasetError,
    FitWarning,
    InsufficientRowsError,
    NotDiscreteError,
    SchemaMismatchError,
    SingularDesignError,
)
from .graph import Dag
from .network import _LOG_2PI, Network

_SD_FLOOR = 1e-6
_RCOND = 1e-12


def _complete_mask(data: Dataset, names: Sequence[str]) -> np.ndarray:
    mask = np.ones(data.n_rows, dtype=bool)
    for name in names:
        mask &= ~data.missing_mask(name)
    return mask


def _discrete_schema(data: Dataset, name: str) -> ColumnSchema:
    col = data.column_schema(name)
    if not col.is_discrete:
        raise NotDiscreteError(f"{name!r} is a continuous column")
    return col


def fit_categorical(
    data: Dataset,
    node: str,
    parents: Sequence[str] = (),
    pseudo_count: float = 0.0,
) -> CategoricalCpt:
    """Relative-frequency CPT of ``node`` given discrete ``parents``.

    A parent configuration with no observations gets the uniform vector
    and a FitWarning. ``pseudo_count`` adds the same prior count to every
    cell before normalizing (0 keeps pure maximum likelihood).
    """
    node_col = _discrete_schema(data, node)
    parent_cols = [_discrete_schema(data, p) for p in parents]
    mask = _complete_mask(data, [node, *parents])
    n_used = int(mask.sum())
    if n_used == 0:
        raise EmptyDatasetError(
            f"{node!r}: no complete rows for family ({node}, {list(parents)})"
        )
    codes = data.column(node)[mask]
    parent_codes = [data.column(p)[mask] for p in parents]
    parent_states = tuple(c.states for c in parent_cols)
    rows = config_rows(parent_states, parent_codes, n_used)
    n_configs = int(np.prod([len(s) for s in parent_states], dtype=np.int64))
    card = len(node_col.states)
    counts = np.zeros((n_configs, card))
    np.add.at(counts, (rows, codes), 1.0)
    counts += pseudo_count
    totals = counts.sum(axis=1)
    probs = np.empty_like(counts)
    empty = totals == 0.0
    if empty.any():
        configs = list(iter_configs(parent_states))
        for i in np.where(empty)[0]:
            warnings.warn(
                f"{node}: parent configuration {configs[i]} never observed, "
                f"using the uniform distribution",
                FitWarning,
                stacklevel=2,
            )
        probs[empty] = 1.0 / card
    nonempty = ~empty
    probs[nonempty] = counts[nonempty] / totals[nonempty, None]
    return CategoricalCpt(node, node_col.states, tuple(parents), parent_states, probs)


def fit_clg(
    data: Dataset,
    node: str,
    continuous_parents: Sequence[str] = (),
    discrete_parents: Sequence[str] = (),
) -> ClgCpd:
    """Per-configuration least squares of ``node`` on its continuous
    parents (intercept included), sd = sqrt(RSS / n_c).

    Raises InsufficientRows when a configuration has fewer than
    |continuous_parents| + 2 rows, SingularDesign when the design matrix
    is rank-deficient (relative singular-value cutoff 1e-12).
    """
    node_col = data.column_schema(node)
    if node_col.is_discrete:
        raise NotDiscreteError(f"{node!r} is a discrete column, expected continuous")
    for p in continuous_parents:
        if data.column_schema(p).is_discrete:
            raise NotDiscreteError(f"{p!r} is discrete, listed as continuous parent")
    parent_cols = [_discrete_schema(data, p) for p in discrete_parents]
    family = [node, *continuous_parents, *discrete_parents]
    mask = _complete_mask(data, family)
    n_used = int(mask.sum())
    y = data.column(node)[mask]
    x_cols = [data.column(p)[mask] for p in continuous_parents]
    parent_states = tuple(c.states for c in parent_cols)
    rows = config_rows(
        parent_states, [data.column(p)[mask] for p in discrete_parents], n_used
    )
    configs = list(iter_configs(parent_states))
    n_cont = len(continuous_parents)
    needed = n_cont + 2
    intercepts = np.empty(len(configs))
    coefficients = np.empty((len(configs), n_cont))
    sds = np.empty(len(configs))
    for i, config in enumerate(configs):
        sel = rows == i
        n_c = int(sel.sum())
        if n_c < needed:
            raise InsufficientRowsError(node, config, n_c, needed)
        design = np.column_stack(
            [np.ones(n_c)] + [x[sel] for x in x_cols]
        )
        target = y[sel]
        beta, _, rank, _ = np.linalg.lstsq(design, target, rcond=_RCOND)
        if rank < n_cont + 1:
            raise SingularDesignError(
                f"{node!r}, configuration {config}: design matrix is rank "
                f"deficient ({rank} < {n_cont + 1})"
            )
        residuals = target - design @ beta
        rss = float(residuals @ residuals)
        intercepts[i] = beta[0]
        coefficients[i] = beta[1:]
        sds[i] = max(math.sqrt(rss / n_c), _SD_FLOOR)
    return ClgCpd(
        node,
        tuple(discrete_parents),
        parent_states,
        tuple(continuous_parents),
        intercepts,
        coefficients,
        sds,
    )


# -- likelihood ------------------------------------------------------------------


def _check_schema(net: Network, data: Dataset) -> None:
    for node in net.nodes:
        try:
            col = data.column_schema(node)
        except Exception:
            raise SchemaMismatchError(f"dataset has no column {node!r}") from None
        spec = net.specs[node]
        if col.is_discrete != spec.is_discrete:
            raise SchemaMismatchError(
                f"{node!r}: column kind does not match the network variable"
            )
        if spec.is_discrete and col.states != spec.states:
            raise SchemaMismatchError(
                f"{node!r}: column states {col.states} != network states "
                f"{spec.states}"
            )


def _family_log_lik(data: Dataset, cpd: CategoricalCpt | ClgCpd) -> tuple[float, int]:
    """Family log-likelihood over family-complete rows, with the row count."""
    node = cpd.node
    if isinstance(cpd, CategoricalCpt):
        family = [node, *cpd.parents]
        mask = _complete_mask(data, family)
        n_used = int(mask.sum())
        codes = data.column(node)[mask]
        rows = config_rows(
            cpd.parent_states, [data.column(p)[mask] for p in cpd.parents], n_used
        )
        p = cpd.probs[rows, codes]
        with np.errstate(divide="ignore"):
            terms = np.log(p)
        return float(terms.sum()), n_used
    family = [node, *cpd.continuous_parents, *cpd.discrete_parents]
    mask = _complete_mask(data, family)
    n_used = int(mask.sum())
    y = data.column(node)[mask]
    rows = config_rows(
        cpd.discrete_parent_states,
        [data.column(p)[mask] for p in cpd.discrete_parents],
        n_used,
    )
    mean = cpd.intercepts[rows]
    for j, parent in enumerate(cpd.continuous_parents):
        mean = mean + cpd.coefficients[rows, j] * data.column(parent)[mask]
    sd = cpd.sds[rows]
    z = (y - mean) / sd
    terms = -0.5 * z * z - np.log(sd) - 0.5 * _LOG_2PI
    return float(terms.sum()), n_used


def log_likelihood(net: Network, data: Dataset) -> float:
    """Sum of family log-likelihoods (equals the row-sum of log_density
    on complete data; families drop their own missing rows)."""
    _check_schema(net, data)
    return sum(_family_log_lik(data, net.cpds[node])[0] for node in net.nodes)


# -- scoring -----------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyScore:
    node: str
    parents: frozenset[str]
    log_lik: float
    param_count: int
    bic: float


def _split_parents(
    data: Dataset, parents: Sequence[str]
) -> tuple[list[str], list[str]]:
    """Partition parents into (discrete, continuous), each in dataset
    column order for determinism."""
    order = {name: i for i, name in enumerate(data.column_names)}
    ordered = sorted(parents, key=lambda p: order[p])
    discrete = [p for p in ordered if data.column_schema(p).is_discrete]
    continuous = [p for p in ordered if not data.column_schema(p).is_discrete]
    return discrete, continuous


def fit_family(
    data: Dataset,
    node: str,
    parents: Sequence[str] = (),
    pseudo_count: float = 0.0,
) -> CategoricalCpt | ClgCpd:
    """Fit one node given an unpartitioned parent list."""
    discrete, continuous = _split_parents(data, parents)
    if data.column_schema(node).is_discrete:
        if continuous:
            raise ClgRestrictionError(
                f"{node!r}: discrete node cannot have continuous parents "
                f"{continuous}"
            )
        return fit_categorical(data, node, discrete, pseudo_count)
    return fit_clg(data, node, continuous, discrete)


def param_count(data: Dataset, node: str, parents: Sequence[str]) -> int:
    """Free-parameter count of one family.

    Discrete node: (card - 1) * prod(parent cards). Continuous node:
    (#discrete-parent configs) * (|continuous parents| + 2).
    """
    discrete, continuous = _split_parents(data, parents)
    n_configs = 1
    for p in discrete:
        n_configs *= len(data.column_schema(p).states)
    col = data.column_schema(node)
    if col.is_discrete:
        return (len(col.states) - 1) * n_configs
    return n_configs * (len(continuous) + 2)


def family_score(
    data: Dataset, node: str, parents: Sequence[str] = ()
) -> FamilyScore:
    """BIC contribution of one family: log_lik - (k/2) ln(n)."""
    cpd = fit_family(data, node, parents)
    log_lik, n_used = _family_log_lik(data, cpd)
    if n_used == 0:
        raise EmptyDatasetError(f"{node!r}: no complete rows")
    k = param_count(data, node, parents)
    bic = log_lik - 0.5 * k * math.log(n_used)
    return FamilyScore(node, frozenset(parents), log_lik, k, bic)


def bic_score(
    data: Dataset, dag: Dag, specs: Sequence[VariableSpec] | None = None
) -> float:
    """Total network score: the sum of family BIC scores.

    ``specs``, when given, is cross-checked against the dataset schema.
    """
    if specs is not None:
        for spec in specs:
            col = data.column_schema(spec.name)
            if col.is_discrete != spec.is_discrete or (
                spec.is_discrete and col.states != spec.states
            ):
                raise SchemaMismatchError(
                    f"{spec.name!r}: spec does not match the dataset column"
                )
    total = 0.0
    for node in dag.nodes:
        total += family_score(data, node, dag.ordered_parents(node)).bic
    return total


# -- whole-network fitting -----------------------------------------------------------


@dataclass(frozen=True)
class NodeFit:
    node: str
    parents: tuple[str, ...]
    n_used: int
    n_dropped: int
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class FitReport:
    n_rows: int
    nodes: tuple[NodeFit, ...]


def fit_network(
    data: Dataset, dag: Dag, pseudo_count: float = 0.0
) -> tuple[Network, FitReport]:
    """Fit every family of ``dag`` from ``data`` and assemble a valid
    network plus a per-node report (row counts, dropped rows, warnings)."""
    for node in dag.nodes:
        try:
            data.column_schema(node)
        except Exception:
            raise SchemaMismatchError(f"dataset has no column {node!r}") from None
    specs = [data.column_schema(node).to_spec() for node in dag.nodes]
    cpds: list[CategoricalCpt | ClgCpd] = []
    infos: list[NodeFit] = []
    for node in dag.nodes:
        parents = dag.ordered_parents(node)
        family = [node, *parents]
        n_used = int(_complete_mask(data, family).sum())
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", FitWarning)
            cpd = fit_family(data, node, parents, pseudo_count)
        notes = tuple(
            str(w.message) for w in caught if issubclass(w.category, FitWarning)
        )
        cpds.append(cpd)
        infos.append(
            NodeFit(node, tuple(parents), n_used, data.n_rows - n_used, notes)
        )
    net = Network(dag, specs, cpds).require_valid()
    return net, FitReport(data.n_rows, tuple(infos))


# -- report rendering ------------------------------------------------------------------


def _mean_expression(cpd: ClgCpd, row: int) -> str:
    parts = [f"{cpd.intercepts[row]:.3f}"]
    for j, parent in enumerate(cpd.continuous_parents):
        coeff = cpd.coefficients[row, j]
        sign = "-" if coeff < 0 else "+"
        parts.append(f"{sign} {abs(coeff):.3f}*{parent}")
    return " ".join(parts)


def render_fit_report(net: Network, report: FitReport) -> str:
    """Per-node parameter tables: one row per parent configuration,
    mean expression and sd for continuous nodes, probabilities for
    discrete ones."""
    lines = [f"fitted on {report.n_rows} rows"]
    info_by_node = {info.node: info for info in report.nodes}
    for node in net.nodes:
        cpd = net.cpds[node]
        info = info_by_node[node]
        header = f"\n{node}"
        if info.parents:
            header += f" | {', '.join(info.parents)}"
        lines.append(header)
        if info.n_dropped:
            lines.append(f"  rows used: {info.n_used} (dropped {info.n_dropped})")
        if isinstance(cpd, CategoricalCpt):
            for i, config in enumerate(cpd.configs()):
                label = (
                    ", ".join(
                        f"{p}={v}" for p, v in zip(cpd.parents, config)
                    )
                    or "(marginal)"
                )
                probs = ", ".join(
                    f"P({node}={s})={cpd.probs[i, j]:.4f}"
                    for j, s in enumerate(cpd.states)
                )
                lines.append(f"  {label}: {probs}")
        else:
            for i, config in enumerate(cpd.configs()):
                label = (
                    ", ".join(
                        f"{p}={v}" for p, v in zip(cpd.discrete_parents, config)
                    )
                    or "(single case)"
                )
                lines.append(
                    f"  {label}: mean = {_mean_expression(cpd, i)}, "
                    f"sd = {cpd.sds[i]:.3f}"
                )
        for note in info.warnings:
            lines.append(f"  warning: {note}")
    return "\n".join(lines)
