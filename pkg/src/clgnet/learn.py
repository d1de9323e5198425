"""Score-based structure learning: greedy hill climbing on BIC.

The search walks DAG space with add/delete/reverse moves, always taking
the single move with the largest positive score gain. Scores decompose
per family, so a move only re-scores the families it touches, and every
family score is cached across the whole run. Optional seeded random
restarts perturb the local optimum and re-climb, keeping the best
result. All tie-breaking is lexicographic, so runs are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cpd import VariableSpec
from .data import Dataset
from .errors import (
    ClgRestrictionError,
    EmptyDatasetError,
    GraphError,
    InsufficientRowsError,
    InvalidWhitelistError,
    NodeSetMismatchError,
    SingularDesignError,
)
from .fit import family_score
from .graph import Dag

_EPSILON = 1e-9

_OP_ORDER = {"add": 0, "delete": 1, "reverse": 2}


@dataclass(frozen=True, order=True)
class Move:
    """One structural step. ``source``/``target`` are the edge endpoints
    (the names `from`/`to` in file formats; `from` is a Python keyword)."""

    op: str
    source: str
    target: str

    def __post_init__(self):
        if self.op not in _OP_ORDER:
            raise ValueError(f"unknown move op {self.op!r}")
        if self.source == self.target:
            raise ValueError("move endpoints must differ")

    @property
    def sort_key(self):
        return (_OP_ORDER[self.op], self.source, self.target)


@dataclass(frozen=True)
class LearnConfig:
    max_iterations: int = 200
    restarts: int = 0
    perturbation_size: int = 2
    seed: int = 0
    whitelist: tuple[tuple[str, str], ...] = ()
    blacklist: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "whitelist", tuple((str(u), str(v)) for u, v in self.whitelist)
        )
        object.__setattr__(
            self, "blacklist", tuple((str(u), str(v)) for u, v in self.blacklist)
        )
        overlap = set(self.whitelist) & set(self.blacklist)
        if overlap:
            raise InvalidWhitelistError(
                f"edges {sorted(overlap)} are both whitelisted and blacklisted"
            )


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    move: Move
    score: float


@dataclass(frozen=True)
class LearnResult:
    dag: Dag
    score: float
    trace: tuple[TraceEntry, ...]


def apply_move(dag: Dag, move: Move) -> Dag:
    if move.op == "add":
        return dag.add_edge(move.source, move.target)
    if move.op == "delete":
        return dag.remove_edge(move.source, move.target)
    return dag.reverse_edge(move.source, move.target)


def enumerate_moves(
    dag: Dag,
    specs: Sequence[VariableSpec],
    config: LearnConfig = LearnConfig(),
) -> list[Move]:
    """All single moves that keep the graph a DAG, keep discrete nodes
    free of continuous parents, and respect the white/blacklists.
    Deterministic lexicographic order: op (add, delete, reverse), then
    both endpoints by name."""
    discrete = {s.name: s.is_discrete for s in specs}
    whitelist = set(config.whitelist)
    blacklist = set(config.blacklist)

    def edge_allowed(u: str, v: str) -> bool:
        if (u, v) in blacklist:
            return False
        # CLG restriction: never point a continuous node at a discrete one
        return discrete[u] or not discrete[v]

    moves = []
    for u in dag.nodes:
        for v in dag.nodes:
            if u == v:
                continue
            if dag.has_edge(u, v):
                if (u, v) in whitelist:
                    continue
                moves.append(Move("delete", u, v))
                without = dag.remove_edge(u, v)
                if edge_allowed(v, u) and not without._reaches(u, v):
                    moves.append(Move("reverse", u, v))
            elif edge_allowed(u, v) and not dag._reaches(v, u):
                moves.append(Move("add", u, v))
    moves.sort(key=lambda m: m.sort_key)
    return moves


class _ScoreCache:
    """Family-score memo; unfittable families score negative infinity."""

    def __init__(self, data: Dataset):
        self.data = data
        self._memo: dict[tuple[str, frozenset[str]], float] = {}

    def family(self, node: str, parents: Sequence[str]) -> float:
        key = (node, frozenset(parents))
        if key not in self._memo:
            try:
                value = family_score(self.data, node, tuple(parents)).bic
            except (
                InsufficientRowsError,
                SingularDesignError,
                EmptyDatasetError,
                ClgRestrictionError,
            ):
                value = float("-inf")
            self._memo[key] = value
        return self._memo[key]

    def total(self, dag: Dag) -> float:
        return sum(
            self.family(node, dag.ordered_parents(node)) for node in dag.nodes
        )


def _climb(
    dag: Dag,
    specs: Sequence[VariableSpec],
    config: LearnConfig,
    cache: _ScoreCache,
    trace: list[TraceEntry],
    iteration_base: int,
) -> tuple[Dag, float, int]:
    """Greedy ascent from ``dag``; extends ``trace`` in place."""
    score = cache.total(dag)
    iterations = 0
    while iterations < config.max_iterations:
        best_move = None
        best_delta = _EPSILON
        for move in enumerate_moves(dag, specs, config):
            delta = _move_delta(dag, move, cache)
            if delta > best_delta:
                best_move = move
                best_delta = delta
        if best_move is None:
            break
        dag = apply_move(dag, best_move)
        score = cache.total(dag)
        iterations += 1
        trace.append(TraceEntry(iteration_base + iterations, best_move, score))
    return dag, score, iterations


def _move_delta(dag: Dag, move: Move, cache: _ScoreCache) -> float:
    u, v = move.source, move.target
    if move.op == "add":
        old = cache.family(v, dag.ordered_parents(v))
        new = cache.family(v, dag.add_edge(u, v).ordered_parents(v))
        return new - old
    if move.op == "delete":
        old = cache.family(v, dag.ordered_parents(v))
        new = cache.family(v, dag.remove_edge(u, v).ordered_parents(v))
        return new - old
    after = dag.reverse_edge(u, v)
    old = cache.family(u, dag.ordered_parents(u)) + cache.family(
        v, dag.ordered_parents(v)
    )
    new = cache.family(u, after.ordered_parents(u)) + cache.family(
        v, after.ordered_parents(v)
    )
    return new - old


def hill_climb(
    data: Dataset,
    specs: Sequence[VariableSpec] | None = None,
    config: LearnConfig = LearnConfig(),
) -> LearnResult:
    """Greedy BIC hill climbing from the whitelist-only graph.

    With ``restarts`` > 0, each restart applies ``perturbation_size``
    random valid moves (seeded) to the best graph found so far and
    climbs again, keeping the higher-scoring result. The returned trace
    is the move sequence of the winning climb. Unknown nodes in the
    blacklist are ignored (those edges cannot occur); unknown nodes in
    the whitelist are an error.
    """
    if specs is None:
        specs = [col.to_spec() for col in data.schema]
    specs = list(specs)
    names = tuple(s.name for s in specs)
    for name in names:
        data.column_schema(name)
    known = set(names)
    for u, v in config.whitelist:
        if u not in known or v not in known:
            raise InvalidWhitelistError(f"whitelisted edge ({u}, {v}) names unknown nodes")
    discrete = {s.name: s.is_discrete for s in specs}
    for u, v in config.whitelist:
        if discrete[v] and not discrete[u]:
            raise InvalidWhitelistError(
                f"whitelisted edge ({u}, {v}) would give a discrete node a "
                f"continuous parent"
            )
    try:
        start = Dag(names, config.whitelist)
    except GraphError as exc:
        raise InvalidWhitelistError(f"whitelist is not a DAG: {exc}") from exc

    cache = _ScoreCache(data)
    trace: list[TraceEntry] = []
    best_dag, best_score, iterations = _climb(start, specs, config, cache, trace, 0)
    best_trace = tuple(trace)

    rng = np.random.default_rng(config.seed)
    for _ in range(config.restarts):
        perturbed = best_dag
        for _ in range(config.perturbation_size):
            options = enumerate_moves(perturbed, specs, config)
            if not options:
                break
            perturbed = apply_move(
                perturbed, options[int(rng.integers(len(options)))]
            )
        retrace: list[TraceEntry] = []
        candidate, cand_score, _ = _climb(
            perturbed, specs, config, cache, retrace, 0
        )
        if cand_score > best_score:
            best_dag, best_score = candidate, cand_score
            best_trace = tuple(retrace)
    return LearnResult(best_dag, best_score, best_trace)


# -- structural comparison ----------------------------------------------------


@dataclass(frozen=True)
class StructureReport:
    """Skeleton precision/recall plus v-structure agreement between a
    learned DAG and a reference DAG."""

    skeleton_precision: float
    skeleton_recall: float
    common_edges: tuple[frozenset[str], ...]
    missing_edges: tuple[frozenset[str], ...]
    extra_edges: tuple[frozenset[str], ...]
    v_structures_learned: tuple[tuple[str, str, str], ...]
    v_structures_reference: tuple[tuple[str, str, str], ...]
    v_structures_matched: tuple[tuple[str, str, str], ...]


def _skeleton(dag: Dag) -> set[frozenset[str]]:
    return {frozenset(edge) for edge in dag.edges}


def _v_structures(dag: Dag) -> set[tuple[str, str, str]]:
    """Triples (a, c, b), a < b, with a -> c <- b and a, b non-adjacent."""
    found = set()
    skeleton = _skeleton(dag)
    for c in dag.nodes:
        ps = sorted(dag.parents(c))
        for i, a in enumerate(ps):
            for b in ps[i + 1 :]:
                if frozenset((a, b)) not in skeleton:
                    found.add((a, c, b))
    return found


def _sorted_edges(edges: set[frozenset[str]]) -> tuple[frozenset[str], ...]:
    return tuple(sorted(edges, key=lambda e: tuple(sorted(e))))


def compare_structures(learned: Dag, reference: Dag) -> StructureReport:
    if set(learned.nodes) != set(reference.nodes):
        raise NodeSetMismatchError(
            f"node sets differ: {sorted(learned.nodes)} vs "
            f"{sorted(reference.nodes)}"
        )
    ls, rs = _skeleton(learned), _skeleton(reference)
    common = ls & rs
    precision = len(common) / len(ls) if ls else 1.0
    recall = len(common) / len(rs) if rs else 1.0
    lv, rv = _v_structures(learned), _v_structures(reference)
    return StructureReport(
        precision,
        recall,
        _sorted_edges(common),
        _sorted_edges(rs - ls),
        _sorted_edges(ls - rs),
        tuple(sorted(lv)),
        tuple(sorted(rv)),
        tuple(sorted(lv & rv)),
    )
