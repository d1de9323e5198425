"""Variable declarations and per-node conditional distributions.

Two distribution kinds cover the conditional linear Gaussian family:

* CategoricalCpt: discrete node, one probability row per configuration of
  its (discrete) parents.
* ClgCpd: continuous node, normal with mean linear in the continuous
  parents; intercept, coefficients and standard deviation switch on the
  configuration of the discrete parents.

Parent configurations are enumerated lexicographically over the parents'
state lists (first parent varies slowest), and every row of a table is
addressed by that order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .errors import ArityMismatchError, TypeMismatchError, UnknownConfigError

Config = tuple[str, ...]


@dataclass(frozen=True)
class VariableSpec:
    """A named random variable: discrete with ordered states, or continuous."""

    name: str
    states: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.name:
            raise TypeMismatchError("variable name must be non-empty")
        if self.states is not None:
            states = tuple(str(s) for s in self.states)
            if len(states) < 2:
                raise TypeMismatchError(
                    f"{self.name!r}: discrete variable needs >= 2 states"
                )
            if len(set(states)) != len(states):
                raise TypeMismatchError(f"{self.name!r}: duplicate state labels")
            object.__setattr__(self, "states", states)

    @property
    def is_discrete(self) -> bool:
        return self.states is not None

    @property
    def cardinality(self) -> int:
        if self.states is None:
            raise TypeMismatchError(f"{self.name!r} is continuous")
        return len(self.states)

    @staticmethod
    def discrete(name: str, states: Sequence[str]) -> "VariableSpec":
        return VariableSpec(name, tuple(states))

    @staticmethod
    def continuous(name: str) -> "VariableSpec":
        return VariableSpec(name, None)


def iter_configs(state_lists: Sequence[Sequence[str]]) -> Iterator[Config]:
    """Lexicographic parent configurations; a single empty config if no parents."""
    yield from product(*state_lists)


def config_count(state_lists: Sequence[Sequence[str]]) -> int:
    n = 1
    for states in state_lists:
        n *= len(states)
    return n


def config_index(config: Config, state_lists: Sequence[Sequence[str]]) -> int:
    """Mixed-radix row index of a configuration (first parent most significant)."""
    if len(config) != len(state_lists):
        raise ArityMismatchError(
            f"configuration {config} has {len(config)} entries, "
            f"expected {len(state_lists)}"
        )
    idx = 0
    for value, states in zip(config, state_lists):
        try:
            pos = states.index(value)
        except ValueError:
            raise UnknownConfigError(
                f"state {value!r} not among {tuple(states)}"
            ) from None
        idx = idx * len(states) + pos
    return idx


def config_rows(
    state_lists: Sequence[Sequence[str]],
    code_arrays: Sequence[np.ndarray],
    n: int,
) -> np.ndarray:
    """Vectorized config_index: row index per sample from parent code arrays.

    All codes must be valid (>= 0); missing markers are the caller's concern.
    """
    rows = np.zeros(n, dtype=np.int64)
    for states, codes in zip(state_lists, code_arrays):
        rows = rows * len(states) + codes
    return rows


def _frozen_array(values, shape: tuple[int, ...], what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != shape:
        raise ArityMismatchError(f"{what}: expected shape {shape}, got {arr.shape}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CategoricalCpt:
    """Conditional probability table of a discrete node.

    ``probs`` has one row per parent configuration (lexicographic order)
    and one column per node state. A parentless node has exactly one row:
    its marginal distribution.
    """

    node: str
    states: tuple[str, ...]
    parents: tuple[str, ...] = ()
    parent_states: tuple[tuple[str, ...], ...] = ()
    probs: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(
            self, "parent_states", tuple(tuple(str(s) for s in ss) for ss in self.parent_states)
        )
        if len(self.parents) != len(self.parent_states):
            raise ArityMismatchError(
                f"{self.node!r}: {len(self.parents)} parents but "
                f"{len(self.parent_states)} state lists"
            )
        shape = (config_count(self.parent_states), len(self.states))
        object.__setattr__(
            self, "probs", _frozen_array(self.probs, shape, f"{self.node!r} cpt")
        )

    @property
    def n_configs(self) -> int:
        return self.probs.shape[0]

    def configs(self) -> list[Config]:
        return list(iter_configs(self.parent_states))

    def config_index(self, config: Config) -> int:
        return config_index(config, self.parent_states)

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise TypeMismatchError(
                f"{self.node!r}: unknown state {state!r}"
            ) from None

    def prob(self, config: Config, state: str) -> float:
        return float(self.probs[self.config_index(config), self.state_index(state)])

    def check(self) -> list[str]:
        """Numeric invariant violations (empty list when valid)."""
        problems = []
        if not np.isfinite(self.probs).all():
            problems.append(f"{self.node}: non-finite probability entry")
            return problems
        if np.any(self.probs < 0):
            problems.append(f"{self.node}: negative probability entry")
        bad = np.where(np.abs(self.probs.sum(axis=1) - 1.0) > 1e-9)[0]
        for row in bad:
            problems.append(
                f"{self.node}: row {tuple(self.configs()[row])} sums to "
                f"{self.probs[row].sum():.12g}, not 1"
            )
        return problems

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CategoricalCpt)
            and self.node == other.node
            and self.states == other.states
            and self.parents == other.parents
            and self.parent_states == other.parent_states
            and np.array_equal(self.probs, other.probs)
        )


@dataclass(frozen=True, eq=False)
class ClgCpd:
    """Conditional linear Gaussian distribution of a continuous node.

    For discrete-parent configuration c and continuous parent values x:

        node | c, x  ~  Normal(intercepts[c] + coefficients[c] . x, sds[c]^2)
    """

    node: str
    discrete_parents: tuple[str, ...] = ()
    discrete_parent_states: tuple[tuple[str, ...], ...] = ()
    continuous_parents: tuple[str, ...] = ()
    intercepts: np.ndarray = field(default=None)  # type: ignore[assignment]
    coefficients: np.ndarray = field(default=None)  # type: ignore[assignment]
    sds: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "discrete_parents", tuple(self.discrete_parents))
        object.__setattr__(
            self,
            "discrete_parent_states",
            tuple(tuple(str(s) for s in ss) for ss in self.discrete_parent_states),
        )
        object.__setattr__(self, "continuous_parents", tuple(self.continuous_parents))
        if len(self.discrete_parents) != len(self.discrete_parent_states):
            raise ArityMismatchError(
                f"{self.node!r}: {len(self.discrete_parents)} discrete parents "
                f"but {len(self.discrete_parent_states)} state lists"
            )
        n_cfg = config_count(self.discrete_parent_states)
        n_cont = len(self.continuous_parents)
        object.__setattr__(
            self,
            "intercepts",
            _frozen_array(self.intercepts, (n_cfg,), f"{self.node!r} intercepts"),
        )
        object.__setattr__(
            self,
            "coefficients",
            _frozen_array(
                self.coefficients, (n_cfg, n_cont), f"{self.node!r} coefficients"
            ),
        )
        object.__setattr__(
            self, "sds", _frozen_array(self.sds, (n_cfg,), f"{self.node!r} sds")
        )

    @property
    def n_configs(self) -> int:
        return self.intercepts.shape[0]

    def configs(self) -> list[Config]:
        return list(iter_configs(self.discrete_parent_states))

    def config_index(self, config: Config) -> int:
        return config_index(config, self.discrete_parent_states)

    def conditional_mean(self, config: Config, parent_values: Sequence[float]) -> float:
        """intercept + coefficients . parent_values for the selected row."""
        row = self.config_index(config)
        values = np.asarray(parent_values, dtype=float)
        if values.shape != (len(self.continuous_parents),):
            raise ArityMismatchError(
                f"{self.node!r}: got {values.size} parent values, "
                f"expected {len(self.continuous_parents)}"
            )
        return float(self.intercepts[row] + self.coefficients[row] @ values)

    def check(self) -> list[str]:
        problems = []
        if not (
            np.isfinite(self.intercepts).all()
            and np.isfinite(self.coefficients).all()
            and np.isfinite(self.sds).all()
        ):
            problems.append(f"{self.node}: non-finite parameter entry")
            return problems
        bad = np.where(~(self.sds > 0))[0]
        for row in bad:
            problems.append(
                f"{self.node}: sd for row {tuple(self.configs()[row])} is "
                f"{self.sds[row]:.12g}, must be > 0"
            )
        return problems

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ClgCpd)
            and self.node == other.node
            and self.discrete_parents == other.discrete_parents
            and self.discrete_parent_states == other.discrete_parent_states
            and self.continuous_parents == other.continuous_parents
            and np.array_equal(self.intercepts, other.intercepts)
            and np.array_equal(self.coefficients, other.coefficients)
            and np.array_equal(self.sds, other.sds)
        )
