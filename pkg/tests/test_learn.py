"""Hill-climbing structure search and structure comparison."""

import numpy as np
import pytest

from clgnet import (
    Dataset,
    LearnConfig,
    Move,
    VariableSpec,
    bic_score,
    compare_structures,
    hill_climb,
)
from clgnet.data import ColumnSchema
from clgnet.errors import InvalidWhitelistError, NodeSetMismatchError
from clgnet.graph import Dag
from clgnet.learn import apply_move, enumerate_moves

from helpers import continuous_pair, two_node_discrete


def dependent_pair(n=2000, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = 2.0 * x + rng.normal(scale=0.3, size=n)
    return continuous_pair(x, y)


def independent_pair(n=2000, seed=0):
    rng = np.random.default_rng(seed)
    return continuous_pair(rng.normal(size=n), rng.normal(size=n))


def mixed_specs():
    return (
        VariableSpec.discrete("d", ("0", "1")),
        VariableSpec.continuous("c"),
    )


class TestMove:
    def test_validation(self):
        with pytest.raises(ValueError):
            Move("grow", "a", "b")
        with pytest.raises(ValueError):
            Move("add", "a", "a")

    def test_ordering_add_delete_reverse_then_endpoints(self):
        moves = [
            Move("reverse", "a", "b"),
            Move("delete", "a", "b"),
            Move("add", "b", "a"),
            Move("add", "a", "c"),
            Move("add", "a", "b"),
        ]
        ordered = sorted(moves, key=lambda m: m.sort_key)
        assert [(m.op, m.source, m.target) for m in ordered] == [
            ("add", "a", "b"),
            ("add", "a", "c"),
            ("add", "b", "a"),
            ("delete", "a", "b"),
            ("reverse", "a", "b"),
        ]

    def test_apply_move(self):
        dag = Dag(("a", "b"))
        grown = apply_move(dag, Move("add", "a", "b"))
        assert grown.edges == (("a", "b"),)
        assert apply_move(grown, Move("reverse", "a", "b")).edges == (("b", "a"),)
        assert apply_move(grown, Move("delete", "a", "b")).edges == ()


class TestEnumerateMoves:
    def test_empty_two_node_graph(self):
        specs = (VariableSpec.continuous("a"), VariableSpec.continuous("b"))
        moves = enumerate_moves(Dag(("a", "b")), specs)
        assert [(m.op, m.source, m.target) for m in moves] == [
            ("add", "a", "b"), ("add", "b", "a")
        ]

    def test_existing_edge_offers_delete_and_reverse(self):
        specs = (VariableSpec.continuous("a"), VariableSpec.continuous("b"))
        moves = enumerate_moves(Dag(("a", "b"), (("a", "b"),)), specs)
        assert [(m.op, m.source, m.target) for m in moves] == [
            ("delete", "a", "b"), ("reverse", "a", "b")
        ]

    def test_no_move_may_create_a_cycle(self):
        specs = tuple(VariableSpec.continuous(v) for v in ("a", "b", "c"))
        dag = Dag(("a", "b", "c"), (("a", "b"), ("b", "c")))
        moves = enumerate_moves(dag, specs)
        assert ("add", "c", "a") not in [(m.op, m.source, m.target) for m in moves]

    def test_continuous_to_discrete_adds_excluded(self):
        moves = enumerate_moves(Dag(("d", "c")), mixed_specs())
        assert [(m.op, m.source, m.target) for m in moves] == [("add", "d", "c")]

    def test_reverse_onto_discrete_excluded(self):
        # d -> c exists; reversing would point continuous c at discrete d
        moves = enumerate_moves(Dag(("d", "c"), (("d", "c"),)), mixed_specs())
        assert [(m.op, m.source, m.target) for m in moves] == [("delete", "d", "c")]

    def test_blacklist_blocks_add_and_reverse(self):
        specs = (VariableSpec.continuous("a"), VariableSpec.continuous("b"))
        config = LearnConfig(blacklist=(("b", "a"),))
        moves = enumerate_moves(Dag(("a", "b"), (("a", "b"),)), specs, config)
        assert [(m.op, m.source, m.target) for m in moves] == [("delete", "a", "b")]

    def test_whitelisted_edge_is_not_deletable(self):
        specs = (VariableSpec.continuous("a"), VariableSpec.continuous("b"))
        config = LearnConfig(whitelist=(("a", "b"),))
        moves = enumerate_moves(Dag(("a", "b"), (("a", "b"),)), specs, config)
        assert all(m.op == "add" or m.target != "b" for m in moves)
        assert ("delete", "a", "b") not in [(m.op, m.source, m.target) for m in moves]


class TestLearnConfig:
    def test_overlapping_lists_rejected(self):
        with pytest.raises(InvalidWhitelistError):
            LearnConfig(whitelist=(("a", "b"),), blacklist=(("a", "b"),))

    def test_defaults(self):
        config = LearnConfig()
        assert config.max_iterations == 200
        assert config.restarts == 0
        assert config.seed == 0


class TestHillClimb:
    def test_dependent_pair_learns_one_edge(self):
        result = hill_climb(dependent_pair(), None, LearnConfig())
        assert len(result.dag.edges) == 1
        skeleton = {frozenset(e) for e in result.dag.edges}
        assert skeleton == {frozenset(("X", "Y"))}

    def test_independent_pair_learns_nothing(self):
        result = hill_climb(independent_pair(), None, LearnConfig())
        assert result.dag.edges == ()
        assert result.trace == ()

    def test_score_matches_bic_of_returned_graph(self):
        data = dependent_pair()
        result = hill_climb(data, None, LearnConfig())
        assert result.score == pytest.approx(bic_score(data, result.dag), rel=1e-12)

    def test_trace_scores_strictly_increase(self):
        data = dependent_pair(seed=3)
        result = hill_climb(data, None, LearnConfig())
        scores = [entry.score for entry in result.trace]
        assert all(b > a for a, b in zip(scores, scores[1:]))
        if result.trace:
            assert result.trace[-1].score == result.score

    def test_replaying_trace_reproduces_graph(self):
        data = dependent_pair(seed=4)
        result = hill_climb(data, None, LearnConfig())
        dag = Dag(("X", "Y"))
        for entry in result.trace:
            dag = apply_move(dag, entry.move)
        assert sorted(dag.edges) == sorted(result.dag.edges)

    def test_whitelist_respected(self):
        # force the edge the data dislikes; it must survive
        result = hill_climb(
            independent_pair(), None, LearnConfig(whitelist=(("X", "Y"),))
        )
        assert ("X", "Y") in result.dag.edges

    def test_blacklist_respected(self):
        config = LearnConfig(blacklist=(("X", "Y"), ("Y", "X")))
        result = hill_climb(dependent_pair(), None, config)
        assert result.dag.edges == ()

    def test_blacklist_all_gives_empty_graph(self):
        net = two_node_discrete()
        data = net.forward_sample(500, seed=2)
        config = LearnConfig(blacklist=(("A", "B"), ("B", "A")))
        assert hill_climb(data, None, config).dag.edges == ()

    def test_whitelist_errors(self):
        data = dependent_pair()
        with pytest.raises(InvalidWhitelistError):
            hill_climb(data, None, LearnConfig(whitelist=(("X", "Z"),)))
        with pytest.raises(InvalidWhitelistError):
            hill_climb(
                data, None, LearnConfig(whitelist=(("X", "Y"), ("Y", "X")))
            )

    def test_whitelist_clg_violation(self):
        net = two_node_discrete()
        schema = [
            ColumnSchema("A", ("0", "1")),
            ColumnSchema("hr"),
        ]
        rows = net.forward_sample(50, seed=1)
        data = Dataset.from_labels(
            schema,
            {"A": rows.labels("A"), "hr": list(np.linspace(0, 1, 50))},
        )
        with pytest.raises(InvalidWhitelistError):
            hill_climb(data, None, LearnConfig(whitelist=(("hr", "A"),)))

    def test_determinism(self):
        data = dependent_pair(seed=5)
        config = LearnConfig(restarts=2, seed=9)
        a = hill_climb(data, None, config)
        b = hill_climb(data, None, config)
        assert a.dag == b.dag
        assert a.score == b.score
        assert a.trace == b.trace

    def test_restarts_never_hurt(self):
        net = two_node_discrete()
        data = net.forward_sample(800, seed=6)
        base = hill_climb(data, None, LearnConfig())
        more = hill_climb(data, None, LearnConfig(restarts=3, seed=1))
        assert more.score >= base.score

    def test_local_optimality_at_fixpoint(self):
        data = dependent_pair(seed=7)
        result = hill_climb(data, None, LearnConfig())
        specs = (VariableSpec.continuous("X"), VariableSpec.continuous("Y"))
        base = bic_score(data, result.dag)
        for move in enumerate_moves(result.dag, specs):
            neighbor = apply_move(result.dag, move)
            assert bic_score(data, neighbor) <= base + 1e-9

    def test_max_iterations_bounds_trace(self):
        net = two_node_discrete()
        data = net.forward_sample(500, seed=8)
        result = hill_climb(data, None, LearnConfig(max_iterations=0))
        assert result.trace == ()
        assert result.dag.edges == ()


class TestCompareStructures:
    def test_identical_graphs(self):
        dag = Dag(("a", "b", "c"), (("a", "b"), ("b", "c")))
        report = compare_structures(dag, dag)
        assert report.skeleton_precision == 1.0
        assert report.skeleton_recall == 1.0
        assert report.missing_edges == ()
        assert report.extra_edges == ()

    def test_hand_counts(self):
        learned = Dag(("a", "b", "c"), (("a", "b"),))
        reference = Dag(("a", "b", "c"), (("b", "a"), ("b", "c")))
        report = compare_structures(learned, reference)
        # skeleton {a,b} matches; {b,c} missed; nothing extra
        assert report.skeleton_precision == 1.0
        assert report.skeleton_recall == 0.5
        assert report.common_edges == (frozenset(("a", "b")),)
        assert report.missing_edges == (frozenset(("b", "c")),)

    def test_v_structures(self):
        learned = Dag(("a", "b", "c"), (("a", "c"), ("b", "c")))
        reference = Dag(("a", "b", "c"), (("a", "c"), ("b", "c")))
        report = compare_structures(learned, reference)
        assert report.v_structures_learned == (("a", "c", "b"),)
        assert report.v_structures_reference == (("a", "c", "b"),)
        assert report.v_structures_matched == (("a", "c", "b"),)
        # a -> b -> c is no collider
        chain = Dag(("a", "b", "c"), (("a", "b"), ("b", "c")))
        assert compare_structures(chain, reference).v_structures_learned == ()

    def test_adjacent_parents_are_no_v_structure(self):
        dag = Dag(("a", "b", "c"), (("a", "c"), ("b", "c"), ("a", "b")))
        report = compare_structures(dag, dag)
        assert report.v_structures_learned == ()

    def test_node_set_mismatch(self):
        with pytest.raises(NodeSetMismatchError):
            compare_structures(Dag(("a",)), Dag(("b",)))
