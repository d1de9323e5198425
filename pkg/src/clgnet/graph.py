"""Directed acyclic graph core.

Nodes are plain strings. A Dag is a value: it is immutable after
construction and every mutating operation returns a new Dag, so graphs can
be shared across threads and structure search can generate candidates
cheaply. Acyclicity is enforced at construction/mutation time, never at
use time.

Deterministic tie-breaking is by node insertion order throughout
(topological sort in particular), so downstream sampling and learning are
reproducible.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .errors import (
    CycleError,
    DuplicateEdgeError,
    DuplicateNodeError,
    OverlappingSetsError,
    UnknownNodeError,
)


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named nodes.

    ``nodes`` keeps insertion order; ``edges`` keeps the order edges were
    added. Construction validates node uniqueness, edge endpoints,
    duplicate/self edges, and acyclicity.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...] = ()

    _index: dict[str, int] = field(init=False, repr=False, compare=False)
    _parents: dict[str, frozenset[str]] = field(init=False, repr=False, compare=False)
    _children: dict[str, frozenset[str]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        edges = tuple((str(u), str(v)) for u, v in self.edges)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

        index: dict[str, int] = {}
        for name in nodes:
            if not name:
                raise DuplicateNodeError("node names must be non-empty")
            if name in index:
                raise DuplicateNodeError(f"duplicate node {name!r}")
            index[name] = len(index)

        parents: dict[str, set[str]] = {v: set() for v in nodes}
        children: dict[str, set[str]] = {v: set() for v in nodes}
        seen: set[tuple[str, str]] = set()
        for u, v in edges:
            if u not in index:
                raise UnknownNodeError(f"unknown node {u!r}")
            if v not in index:
                raise UnknownNodeError(f"unknown node {v!r}")
            if u == v:
                raise CycleError(f"self-edge {u!r} -> {v!r}")
            if (u, v) in seen:
                raise DuplicateEdgeError(f"duplicate edge {u!r} -> {v!r}")
            seen.add((u, v))
            parents[v].add(u)
            children[u].add(v)

        object.__setattr__(self, "_index", index)
        object.__setattr__(
            self, "_parents", {v: frozenset(ps) for v, ps in parents.items()}
        )
        object.__setattr__(
            self, "_children", {v: frozenset(cs) for v, cs in children.items()}
        )

        # Kahn's algorithm doubles as the acyclicity check.
        order = self._kahn()
        if len(order) != len(nodes):
            in_cycle = sorted(set(nodes) - set(order))
            raise CycleError(f"graph contains a directed cycle through {in_cycle}")

    # -- relational queries ---------------------------------------------

    def __contains__(self, node: str) -> bool:
        return node in self._index

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def has_edge(self, source: str, target: str) -> bool:
        return target in self._children.get(source, frozenset())

    def parents(self, node: str) -> frozenset[str]:
        self._require(node)
        return self._parents[node]

    def children(self, node: str) -> frozenset[str]:
        self._require(node)
        return self._children[node]

    def family(self, node: str) -> frozenset[str]:
        """The node together with its parents."""
        self._require(node)
        return self._parents[node] | {node}

    def ordered_parents(self, node: str) -> tuple[str, ...]:
        """Parents in node insertion order; the canonical CPD parent order."""
        ps = self.parents(node)
        return tuple(v for v in self.nodes if v in ps)

    def ancestors(self, node: str) -> frozenset[str]:
        """All strict ancestors of ``node``."""
        self._require(node)
        out: set[str] = set()
        stack = list(self._parents[node])
        while stack:
            u = stack.pop()
            if u not in out:
                out.add(u)
                stack.extend(self._parents[u])
        return frozenset(out)

    # -- mutation (value semantics) ---------------------------------------

    def add_node(self, node: str) -> "Dag":
        if node in self._index:
            raise DuplicateNodeError(f"duplicate node {node!r}")
        return Dag(self.nodes + (node,), self.edges)

    def add_edge(self, source: str, target: str) -> "Dag":
        """Return a new Dag with the edge; fails fast on cycles."""
        self._require(source)
        self._require(target)
        if source == target:
            raise CycleError(f"self-edge {source!r} -> {target!r}")
        if self.has_edge(source, target):
            raise DuplicateEdgeError(f"duplicate edge {source!r} -> {target!r}")
        if self._reaches(target, source):
            raise CycleError(
                f"edge {source!r} -> {target!r} would close a directed cycle"
            )
        return Dag(self.nodes, self.edges + ((source, target),))

    def remove_edge(self, source: str, target: str) -> "Dag":
        if not self.has_edge(source, target):
            raise UnknownNodeError(f"no edge {source!r} -> {target!r}")
        kept = tuple(e for e in self.edges if e != (source, target))
        return Dag(self.nodes, kept)

    def reverse_edge(self, source: str, target: str) -> "Dag":
        return self.remove_edge(source, target).add_edge(target, source)

    # -- ordering ----------------------------------------------------------

    def topological_order(self) -> list[str]:
        """Parents before children; ties broken by node insertion order."""
        return self._kahn()

    def _kahn(self) -> list[str]:
        index = self._index
        indegree = {v: len(self._parents[v]) for v in self.nodes}
        ready = [index[v] for v in self.nodes if indegree[v] == 0]
        heapq.heapify(ready)
        order: list[str] = []
        while ready:
            v = self.nodes[heapq.heappop(ready)]
            order.append(v)
            for w in self._children[v]:
                indegree[w] -= 1
                if indegree[w] == 0:
                    heapq.heappush(ready, index[w])
        return order

    # -- d-separation -------------------------------------------------------

    def d_separated(
        self, x: Iterable[str], y: Iterable[str], z: Iterable[str]
    ) -> bool:
        """Whether node sets ``x`` and ``y`` are d-separated by ``z``.

        Implemented as reachability in the moralized ancestral graph
        (Lauritzen et al.): restrict to ancestors of x|y|z, marry parents,
        drop directions, delete z, then check whether any x can reach any y.
        """
        xs, ys, zs = frozenset(x), frozenset(y), frozenset(z)
        for name in xs | ys | zs:
            self._require(name)
        if xs & ys or xs & zs or ys & zs:
            raise OverlappingSetsError("x, y, z must be pairwise disjoint")

        relevant = set(xs | ys | zs)
        for v in xs | ys | zs:
            relevant |= self.ancestors(v)

        adjacency: dict[str, set[str]] = {v: set() for v in relevant}
        for u, v in self.edges:
            if u in relevant and v in relevant:
                adjacency[u].add(v)
                adjacency[v].add(u)
        for v in relevant:
            for a, b in combinations(self._parents[v] & relevant, 2):
                adjacency[a].add(b)
                adjacency[b].add(a)

        visited = set(xs)
        stack = list(xs)
        while stack:
            u = stack.pop()
            if u in ys:
                return False
            for w in adjacency[u]:
                if w not in visited and w not in zs:
                    visited.add(w)
                    stack.append(w)
        return not (visited & ys)

    def _reaches(self, start: str, goal: str) -> bool:
        if start == goal:
            return True
        visited = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in self._children[u]:
                if w == goal:
                    return True
                if w not in visited:
                    visited.add(w)
                    stack.append(w)
        return False

    def _require(self, node: str) -> None:
        if node not in self._index:
            raise UnknownNodeError(f"unknown node {node!r}")


def to_dot(dag: Dag, graph_name: str = "G") -> str:
    """Render a Dag as Graphviz DOT, one line per node and per edge."""
    lines = [f"digraph {graph_name} {{"]
    for v in dag.nodes:
        lines.append(f'  "{v}";')
    for u, v in dag.edges:
        lines.append(f'  "{u}" -> "{v}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
