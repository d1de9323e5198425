"""Conditional probability queries with point and interval evidence.

Three estimators cover the query space:

* exact enumeration - all-discrete networks with point evidence; sums
  the factorized joint over every completion.
* rejection sampling - forward-sample the full joint, keep the samples
  satisfying every evidence constraint; unbiased for interval evidence.
* likelihood weighting - clamp point-evidence nodes and weight each
  sample by the conditional density/probability of the clamped values;
  the only workable estimator for point evidence on continuous nodes
  (rejection would keep nothing). Interval constraints zero out the
  weights of samples falling outside.

Monte Carlo results carry a standard error: sqrt(p(1-p)/n_kept) for
rejection and its weighted generalization sqrt(p(1-p) sum(w^2)/sum(w)^2)
for likelihood weighting. Queries are deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .cpd import CategoricalCpt, config_rows
from .errors import (
    ContinuousNodePresentError,
    InvalidEvidenceError,
    InvalidTargetError,
    NoSamplesKeptError,
    ZeroProbabilityEvidenceError,
)
from .network import Network

_EXACT_STATE_SPACE_BOUND = 10**6


@dataclass(frozen=True)
class Point:
    """Observed exact value: a state label for discrete nodes, a real
    number for continuous nodes."""

    value: object


@dataclass(frozen=True)
class Interval:
    """Observed range for a continuous node; bounds default to open,
    infinite endpoints allowed."""

    lo: float = float("-inf")
    hi: float = float("inf")
    closed_lo: bool = False
    closed_hi: bool = False

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not lo < hi:
            raise InvalidEvidenceError(f"empty interval: lo={lo!r}, hi={hi!r}")

    def contains(self, values: np.ndarray) -> np.ndarray:
        low = values >= self.lo if self.closed_lo else values > self.lo
        high = values <= self.hi if self.closed_hi else values < self.hi
        return low & high


Evidence = Mapping[str, "Point | Interval"]


@dataclass(frozen=True)
class QueryOptions:
    method: str = "auto"
    n_samples: int = 200_000
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvalidEvidenceError("n_samples must be >= 1")


@dataclass(frozen=True)
class QueryResult:
    estimate: float
    std_error: float
    n_kept: int
    n_drawn: int
    method: str


@dataclass(frozen=True)
class JointRow:
    states: tuple[str, ...]
    probability: float
    std_error: float


@dataclass(frozen=True)
class JointDistribution:
    targets: tuple[str, ...]
    rows: tuple[JointRow, ...]
    n_kept: int
    n_drawn: int
    method: str


# -- validation --------------------------------------------------------------


def _check_target(net: Network, target: Mapping[str, object]) -> dict[str, int]:
    """Target as node -> state code; must be non-empty, discrete, known."""
    if not target:
        raise InvalidTargetError("empty target")
    codes: dict[str, int] = {}
    for node, value in target.items():
        if node not in net.dag:
            raise InvalidTargetError(f"unknown target node {node!r}")
        spec = net.specs[node]
        if not spec.is_discrete:
            raise InvalidTargetError(
                f"target node {node!r} is continuous; only discrete targets "
                f"are supported"
            )
        state = str(value)
        if state not in spec.states:
            raise InvalidTargetError(
                f"target {node!r}: {value!r} is not one of {spec.states}"
            )
        codes[node] = spec.states.index(state)
    return codes


def _check_evidence(net: Network, evidence: Evidence) -> dict[str, tuple]:
    """Evidence in canonical form:
    node -> ("point_d", code) | ("point_c", x) | ("interval", Interval)."""
    canon: dict[str, tuple] = {}
    for node, term in (evidence or {}).items():
        if node not in net.dag:
            raise InvalidEvidenceError(f"evidence on unknown node {node!r}")
        spec = net.specs[node]
        if isinstance(term, Point):
            if spec.is_discrete:
                state = str(term.value)
                if state not in spec.states:
                    raise InvalidEvidenceError(
                        f"evidence {node!r}: {term.value!r} is not one of "
                        f"{spec.states}"
                    )
                canon[node] = ("point_d", spec.states.index(state))
            else:
                try:
                    canon[node] = ("point_c", float(term.value))  # type: ignore[arg-type]
                except (TypeError, ValueError):
                    raise InvalidEvidenceError(
                        f"evidence {node!r}: expected a real number, got "
                        f"{term.value!r}"
                    ) from None
        elif isinstance(term, Interval):
            if spec.is_discrete:
                raise InvalidEvidenceError(
                    f"evidence {node!r}: interval evidence requires a "
                    f"continuous node"
                )
            canon[node] = ("interval", term)
        else:
            raise InvalidEvidenceError(
                f"evidence {node!r}: expected Point or Interval, got "
                f"{type(term).__name__}"
            )
    return canon


def _check_disjoint(target_codes, canon_evidence) -> None:
    overlap = sorted(set(target_codes) & set(canon_evidence))
    if overlap:
        raise InvalidTargetError(f"nodes {overlap} are both target and evidence")


# -- exact enumeration ----------------------------------------------------------


def _joint_table(net: Network) -> tuple[np.ndarray, np.ndarray]:
    """All-discrete joint: (codes matrix of every assignment, probability
    vector). Assignments are lexicographic, first node varying slowest."""
    non_discrete = [v for v in net.nodes if not net.specs[v].is_discrete]
    if non_discrete:
        raise ContinuousNodePresentError(
            f"exact enumeration needs an all-discrete network; continuous "
            f"nodes: {non_discrete}"
        )
    cards = [len(net.specs[v].states) for v in net.nodes]
    grids = np.meshgrid(*[np.arange(c) for c in cards], indexing="ij")
    codes = np.stack([g.reshape(-1) for g in grids], axis=1)
    n = codes.shape[0]
    col = {v: codes[:, i] for i, v in enumerate(net.nodes)}
    probs = np.ones(n)
    for node in net.nodes:
        cpd = net.cpds[node]
        assert isinstance(cpd, CategoricalCpt)
        rows = config_rows(cpd.parent_states, [col[p] for p in cpd.parents], n)
        probs *= cpd.probs[rows, col[node]]
    return codes, probs


def exact_enumeration(
    net: Network, target: Mapping[str, object], evidence: Evidence | None = None
) -> float:
    """P(target | evidence) on an all-discrete network, by summing the
    factorized joint over all completions."""
    target_codes = _check_target(net, target)
    canon = _check_evidence(net, evidence or {})
    _check_disjoint(target_codes, canon)
    for node, term in canon.items():
        if term[0] != "point_d":
            raise ContinuousNodePresentError(
                f"evidence on {node!r} is not a discrete point"
            )
    codes, probs = _joint_table(net)
    index = {v: i for i, v in enumerate(net.nodes)}
    ev_mask = np.ones(codes.shape[0], dtype=bool)
    for node, (_, code) in canon.items():
        ev_mask &= codes[:, index[node]] == code
    denom = float(probs[ev_mask].sum())
    if denom == 0.0:
        raise ZeroProbabilityEvidenceError(
            "evidence has probability zero under the network"
        )
    match = ev_mask.copy()
    for node, code in target_codes.items():
        match &= codes[:, index[node]] == code
    return float(probs[match].sum()) / denom


# -- Monte Carlo pool ---------------------------------------------------------------


def _resolve_method(net: Network, canon: dict[str, tuple], method: str) -> str:
    method = method.lower().replace("-", "_")
    if method == "lw":
        method = "likelihood_weighting"
    if method not in ("auto", "exact", "rejection", "likelihood_weighting"):
        raise InvalidEvidenceError(f"unknown method {method!r}")
    if method == "auto":
        state_space = 1
        all_discrete = True
        for v in net.nodes:
            spec = net.specs[v]
            if spec.is_discrete:
                state_space *= len(spec.states)
            else:
                all_discrete = False
        if all_discrete and state_space <= _EXACT_STATE_SPACE_BOUND:
            return "exact"
        if any(term[0] == "point_c" for term in canon.values()):
            return "likelihood_weighting"
        return "rejection"
    if method == "rejection" and any(
        term[0] == "point_c" for term in canon.values()
    ):
        raise InvalidEvidenceError(
            "rejection sampling cannot match point evidence on a continuous "
            "node (acceptance probability zero); use likelihood weighting"
        )
    return method


def _sample_pool(
    net: Network,
    canon: dict[str, tuple],
    method: str,
    n_samples: int,
    seed: int,
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Draw the shared sample pool; returns (columns, weights) where
    weights are zero for samples excluded by the evidence."""
    rng = np.random.default_rng(seed)
    if method == "rejection":
        columns, _ = net._sample_columns(n_samples, rng)
        weights = np.ones(n_samples)
    else:
        clamped = {
            node: term[1]
            for node, term in canon.items()
            if term[0] in ("point_d", "point_c")
        }
        columns, log_w = net._sample_columns(n_samples, rng, clamped)
        if log_w is None:
            weights = np.ones(n_samples)
        else:
            top = float(log_w.max())
            if top == float("-inf"):
                raise NoSamplesKeptError(
                    "every sample has zero weight under the evidence"
                )
            # scale-invariant downstream, so normalize for stability
            weights = np.exp(log_w - top)
    for node, term in canon.items():
        if term[0] == "interval":
            weights = weights * term[1].contains(columns[node])
        elif method == "rejection":
            weights = weights * (columns[node] == term[1])
    return columns, weights


def _weighted_estimate(
    match: np.ndarray, weights: np.ndarray
) -> tuple[float, float, int]:
    kept = weights > 0.0
    n_kept = int(kept.sum())
    if n_kept == 0:
        raise NoSamplesKeptError(
            "no samples satisfied the evidence; try more samples or "
            "likelihood weighting"
        )
    w = weights[kept]
    total = float(w.sum())
    p = float(w[match[kept]].sum()) / total
    ess_factor = float((w * w).sum()) / (total * total)
    se = math.sqrt(max(p * (1.0 - p), 0.0) * ess_factor)
    return p, se, n_kept


def _target_mask(
    columns: Mapping[str, np.ndarray], target_codes: Mapping[str, int], n: int
) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    for node, code in target_codes.items():
        mask &= columns[node] == code
    return mask


# -- public queries ------------------------------------------------------------------


def query_prob(
    net: Network,
    target: Mapping[str, object],
    evidence: Evidence | None = None,
    opts: QueryOptions = QueryOptions(),
) -> QueryResult:
    """P(target | evidence) with uncertainty quantification.

    ``auto`` picks exact enumeration for small all-discrete networks,
    likelihood weighting when any continuous node has point evidence,
    and rejection sampling otherwise.
    """
    target_codes = _check_target(net, target)
    canon = _check_evidence(net, evidence or {})
    _check_disjoint(target_codes, canon)
    method = _resolve_method(net, canon, opts.method)
    if method == "exact":
        estimate = exact_enumeration(net, target, evidence)
        return QueryResult(estimate, 0.0, 0, 0, "exact")
    columns, weights = _sample_pool(net, canon, method, opts.n_samples, opts.seed)
    match = _target_mask(columns, target_codes, opts.n_samples)
    estimate, se, n_kept = _weighted_estimate(match, weights)
    return QueryResult(estimate, se, n_kept, opts.n_samples, method)


def joint_state_distribution(
    net: Network,
    targets: Sequence[str],
    evidence: Evidence | None = None,
    opts: QueryOptions = QueryOptions(),
) -> JointDistribution:
    """Joint distribution of several discrete targets given evidence,
    one row per state combination, all rows computed from one shared
    sample pool (so marginalization identities hold exactly).

    Rows are ordered with the first target varying fastest.
    """
    targets = list(targets)
    if not targets:
        raise InvalidTargetError("empty target list")
    if len(set(targets)) != len(targets):
        raise InvalidTargetError(f"duplicate target nodes in {targets}")
    for node in targets:
        if node not in net.dag:
            raise InvalidTargetError(f"unknown target node {node!r}")
        if not net.specs[node].is_discrete:
            raise InvalidTargetError(
                f"target node {node!r} is continuous; only discrete targets "
                f"are supported"
            )
    canon = _check_evidence(net, evidence or {})
    _check_disjoint({t: 0 for t in targets}, canon)
    state_lists = [net.specs[t].states for t in targets]
    combos = [
        tuple(reversed(combo)) for combo in product(*reversed(state_lists))
    ]
    method = _resolve_method(net, canon, opts.method)
    if method == "exact":
        rows = tuple(
            JointRow(
                combo,
                exact_enumeration(net, dict(zip(targets, combo)), evidence),
                0.0,
            )
            for combo in combos
        )
        return JointDistribution(tuple(targets), rows, 0, 0, "exact")
    columns, weights = _sample_pool(net, canon, method, opts.n_samples, opts.seed)
    rows = []
    n_kept = 0
    for combo in combos:
        codes = {
            t: net.specs[t].states.index(s) for t, s in zip(targets, combo)
        }
        match = _target_mask(columns, codes, opts.n_samples)
        p, se, n_kept = _weighted_estimate(match, weights)
        rows.append(JointRow(combo, p, se))
    return JointDistribution(
        tuple(targets), tuple(rows), n_kept, opts.n_samples, method
    )


# -- rendering -----------------------------------------------------------------------


def render_query_result(result: QueryResult, label: str = "P") -> str:
    """Probability to 3 decimals with the standard error and sample
    counts always alongside."""
    if result.method == "exact":
        return f"{label} = {result.estimate:.3f} (exact)"
    return (
        f"{label} = {result.estimate:.3f} "
        f"(std error {result.std_error:.4f}, kept {result.n_kept} of "
        f"{result.n_drawn}, method {result.method})"
    )


def render_joint_distribution(dist: JointDistribution) -> str:
    lines = []
    total = 0.0
    for row in dist.rows:
        label = ", ".join(f"{t}={s}" for t, s in zip(dist.targets, row.states))
        total += row.probability
        if dist.method == "exact":
            lines.append(f"{label}: {row.probability:.3f}")
        else:
            lines.append(
                f"{label}: {row.probability:.3f} "
                f"(std error {row.std_error:.4f})"
            )
    lines.append(f"sum: {total:.3f}")
    if dist.method != "exact":
        lines.append(
            f"kept {dist.n_kept} of {dist.n_drawn} samples, method "
            f"{dist.method}"
        )
    else:
        lines.append("method exact")
    return "\n".join(lines)
