"""Conditional probability queries: exact enumeration and the two
Monte Carlo estimators, checked against closed-form oracles."""

import math

import numpy as np
import pytest
from scipy import stats

from clgnet import (
    CategoricalCpt,
    Evidence,
    Interval,
    JointDistribution,
    Network,
    Point,
    QueryOptions,
    VariableSpec,
    exact_enumeration,
    joint_state_distribution,
    query_prob,
    render_joint_distribution,
    render_query_result,
)
from clgnet.errors import (
    ContinuousNodePresentError,
    InvalidEvidenceError,
    InvalidTargetError,
    NoSamplesKeptError,
    ZeroProbabilityEvidenceError,
)
from clgnet.graph import Dag

from helpers import chain_net, mixture_net, two_node_discrete

# P(A=1 | X=2) on the mixture net: the two component densities at x=2
# are N(2; 0, 1) and N(2; 2, 1), so the posterior odds are e^2 : 1.
POSTERIOR_AT_TWO = 1.0 / (1.0 + math.exp(-2.0))


def wide_discrete_net(n_nodes=21):
    """Independent fair coins; the joint state space is 2**n_nodes."""
    specs = tuple(
        VariableSpec.discrete(f"n{i}", ("0", "1")) for i in range(n_nodes)
    )
    cpds = tuple(
        CategoricalCpt(s.name, ("0", "1"), probs=np.array([[0.5, 0.5]]))
        for s in specs
    )
    return Network(Dag(tuple(s.name for s in specs)), specs, cpds)


class TestEvidenceTypes:
    def test_interval_must_be_nonempty(self):
        with pytest.raises(InvalidEvidenceError):
            Interval(2.0, 2.0)
        with pytest.raises(InvalidEvidenceError):
            Interval(3.0, 1.0)

    def test_interval_bounds_open_by_default(self):
        values = np.array([0.0, 1.0, 2.0, 3.0])
        assert Interval(1.0, 3.0).contains(values).tolist() == [
            False, False, True, False
        ]
        closed = Interval(1.0, 3.0, closed_lo=True, closed_hi=True)
        assert closed.contains(values).tolist() == [False, True, True, True]

    def test_interval_half_infinite(self):
        values = np.array([-10.0, 0.0, 10.0])
        assert Interval(lo=0.0).contains(values).tolist() == [False, False, True]
        assert Interval(hi=0.0).contains(values).tolist() == [True, False, False]

    def test_options_reject_nonpositive_sample_count(self):
        with pytest.raises(InvalidEvidenceError):
            QueryOptions(n_samples=0)


class TestExactEnumeration:
    def test_marginal(self):
        # P(B=1) = 0.3*0.1 + 0.7*0.8
        net = two_node_discrete()
        assert exact_enumeration(net, {"B": "1"}) == pytest.approx(0.59, abs=1e-15)

    def test_conditional(self):
        # P(A=1 | B=1) = 0.56 / 0.59
        net = two_node_discrete()
        got = exact_enumeration(net, {"A": "1"}, {"B": Point("1")})
        assert got == pytest.approx(0.56 / 0.59, abs=1e-15)

    def test_joint_target(self):
        net = two_node_discrete()
        got = exact_enumeration(net, {"A": "1", "B": "0"})
        assert got == pytest.approx(0.7 * 0.2, abs=1e-15)

    def test_continuous_network_rejected(self):
        with pytest.raises(ContinuousNodePresentError):
            exact_enumeration(chain_net(), {"A": "1"})

    def test_interval_evidence_rejected(self):
        with pytest.raises(ContinuousNodePresentError):
            exact_enumeration(chain_net(), {"A": "1"}, {"X": Interval(0, 1)})

    def test_zero_probability_evidence(self):
        specs = (
            VariableSpec.discrete("A", ("0", "1")),
            VariableSpec.discrete("C", ("0", "1")),
        )
        net = Network(
            Dag(("A", "C")),
            specs,
            (
                CategoricalCpt("A", ("0", "1"), probs=np.array([[1.0, 0.0]])),
                CategoricalCpt("C", ("0", "1"), probs=np.array([[0.5, 0.5]])),
            ),
        )
        with pytest.raises(ZeroProbabilityEvidenceError):
            exact_enumeration(net, {"C": "1"}, {"A": Point("1")})


class TestValidation:
    def test_unknown_evidence_node(self):
        with pytest.raises(InvalidEvidenceError):
            query_prob(two_node_discrete(), {"A": "1"}, {"Z": Point("1")})

    def test_unknown_target_node(self):
        with pytest.raises(InvalidTargetError):
            query_prob(two_node_discrete(), {"Z": "1"})

    def test_empty_target(self):
        with pytest.raises(InvalidTargetError):
            query_prob(two_node_discrete(), {})

    def test_continuous_target(self):
        with pytest.raises(InvalidTargetError):
            query_prob(chain_net(), {"X": 1.0})

    def test_unknown_target_state(self):
        with pytest.raises(InvalidTargetError):
            query_prob(two_node_discrete(), {"A": "2"})

    def test_target_evidence_overlap(self):
        with pytest.raises(InvalidTargetError):
            query_prob(two_node_discrete(), {"A": "1"}, {"A": Point("0")})

    def test_interval_on_discrete_node(self):
        with pytest.raises(InvalidEvidenceError):
            query_prob(two_node_discrete(), {"A": "1"}, {"B": Interval(0, 1)})

    def test_unknown_evidence_state(self):
        with pytest.raises(InvalidEvidenceError):
            query_prob(two_node_discrete(), {"A": "1"}, {"B": Point("2")})

    def test_nonnumeric_point_on_continuous_node(self):
        with pytest.raises(InvalidEvidenceError):
            query_prob(chain_net(), {"A": "1"}, {"X": Point("tall")})

    def test_unknown_method(self):
        with pytest.raises(InvalidEvidenceError):
            query_prob(
                two_node_discrete(), {"A": "1"}, opts=QueryOptions(method="gibbs")
            )


class TestMethodSelection:
    def test_small_discrete_goes_exact(self):
        res = query_prob(two_node_discrete(), {"B": "1"})
        assert res.method == "exact"
        assert res.std_error == 0.0
        assert res.n_drawn == 0

    def test_huge_discrete_falls_back_to_rejection(self):
        net = wide_discrete_net(21)  # 2**21 > 10**6 joint states
        res = query_prob(net, {"n0": "1"}, opts=QueryOptions(n_samples=2000))
        assert res.method == "rejection"

    def test_hybrid_without_point_evidence_goes_rejection(self):
        res = query_prob(
            mixture_net(), {"A": "1"}, {"X": Interval(lo=1.0)},
            QueryOptions(n_samples=2000),
        )
        assert res.method == "rejection"

    def test_continuous_point_evidence_goes_lw(self):
        res = query_prob(
            mixture_net(), {"A": "1"}, {"X": Point(2.0)},
            QueryOptions(n_samples=2000),
        )
        assert res.method == "likelihood_weighting"

    def test_forced_exact_on_hybrid_fails(self):
        with pytest.raises(ContinuousNodePresentError):
            query_prob(
                mixture_net(), {"A": "1"}, opts=QueryOptions(method="exact")
            )

    def test_forced_rejection_with_continuous_point_fails(self):
        with pytest.raises(InvalidEvidenceError):
            query_prob(
                mixture_net(), {"A": "1"}, {"X": Point(2.0)},
                QueryOptions(method="rejection"),
            )

    def test_lw_alias(self):
        res = query_prob(
            mixture_net(), {"A": "1"}, {"X": Point(2.0)},
            QueryOptions(method="lw", n_samples=1000),
        )
        assert res.method == "likelihood_weighting"


class TestEstimatorAccuracy:
    def test_rejection_agrees_with_exact(self):
        net = two_node_discrete()
        opts = QueryOptions(method="rejection", n_samples=200_000, seed=11)
        res = query_prob(net, {"A": "1"}, {"B": Point("1")}, opts)
        truth = 0.56 / 0.59
        assert abs(res.estimate - truth) < 4 * res.std_error
        assert res.std_error < 0.01

    def test_rejection_standard_error_formula(self):
        net = two_node_discrete()
        opts = QueryOptions(method="rejection", n_samples=50_000, seed=3)
        res = query_prob(net, {"A": "1"}, {"B": Point("1")}, opts)
        p = res.estimate
        assert res.std_error == pytest.approx(
            math.sqrt(p * (1 - p) / res.n_kept), rel=1e-12
        )
        assert 0 < res.n_kept < res.n_drawn == 50_000

    def test_lw_recovers_gaussian_posterior(self):
        opts = QueryOptions(n_samples=400_000, seed=5)
        res = query_prob(mixture_net(), {"A": "1"}, {"X": Point(2.0)}, opts)
        assert res.method == "likelihood_weighting"
        assert res.n_kept == res.n_drawn == 400_000  # points never reject
        assert abs(res.estimate - POSTERIOR_AT_TWO) < 4 * res.std_error
        assert res.std_error < 0.005

    def test_interval_posterior_matches_normal_tails(self):
        # P(A=1 | X > 1) = sf(-1) / (sf(1) + sf(-1)) with equal priors
        truth = stats.norm.sf(-1.0) / (stats.norm.sf(1.0) + stats.norm.sf(-1.0))
        opts = QueryOptions(n_samples=400_000, seed=8)
        res = query_prob(mixture_net(), {"A": "1"}, {"X": Interval(lo=1.0)}, opts)
        assert res.method == "rejection"
        assert abs(res.estimate - truth) < 4 * res.std_error

    def test_widening_interval_keeps_more_samples(self):
        opts = QueryOptions(n_samples=50_000, seed=2)
        narrow = query_prob(
            mixture_net(), {"A": "1"}, {"X": Interval(1.5, 2.5)}, opts
        )
        wide = query_prob(
            mixture_net(), {"A": "1"}, {"X": Interval(0.5, 3.5)}, opts
        )
        assert narrow.n_kept < wide.n_kept

    def test_no_samples_kept_rejection(self):
        opts = QueryOptions(n_samples=2_000, seed=1)
        with pytest.raises(NoSamplesKeptError):
            query_prob(mixture_net(), {"A": "1"}, {"X": Interval(1e9, 1e10)}, opts)

    def test_no_samples_kept_lw(self):
        opts = QueryOptions(method="likelihood_weighting", n_samples=2_000, seed=1)
        with pytest.raises(NoSamplesKeptError):
            query_prob(mixture_net(), {"A": "1"}, {"X": Interval(1e9, 1e10)}, opts)

    def test_determinism(self):
        opts = QueryOptions(n_samples=20_000, seed=7)
        first = query_prob(mixture_net(), {"A": "1"}, {"X": Interval(lo=0.5)}, opts)
        second = query_prob(mixture_net(), {"A": "1"}, {"X": Interval(lo=0.5)}, opts)
        assert first == second
        other = query_prob(
            mixture_net(), {"A": "1"}, {"X": Interval(lo=0.5)},
            QueryOptions(n_samples=20_000, seed=8),
        )
        assert other.estimate != first.estimate


class TestJointDistribution:
    def test_exact_rows_first_target_fastest(self):
        net = two_node_discrete()
        dist = joint_state_distribution(net, ["A", "B"])
        assert [r.states for r in dist.rows] == [
            ("0", "0"), ("1", "0"), ("0", "1"), ("1", "1")
        ]
        expected = [0.3 * 0.9, 0.7 * 0.2, 0.3 * 0.1, 0.7 * 0.8]
        for row, p in zip(dist.rows, expected):
            assert row.probability == pytest.approx(p, abs=1e-15)
            assert row.std_error == 0.0
        assert dist.method == "exact"
        assert sum(r.probability for r in dist.rows) == pytest.approx(1.0, abs=1e-12)

    def test_sampled_rows_sum_to_one(self):
        opts = QueryOptions(n_samples=30_000, seed=4)
        dist = joint_state_distribution(
            mixture_net(), ["A"], {"X": Interval(lo=0.0)}, opts
        )
        assert sum(r.probability for r in dist.rows) == pytest.approx(1.0, abs=1e-12)
        assert dist.method == "rejection"
        assert dist.n_kept > 0

    def test_marginal_matches_single_query_from_shared_pool(self):
        # same seed, same pool: summing joint rows equals the scalar
        # query up to one double rounding
        opts = QueryOptions(n_samples=50_000, seed=12)
        evidence = {"X": Interval(lo=0.0)}
        dist = joint_state_distribution(mixture_net(), ["A"], evidence, opts)
        single = query_prob(mixture_net(), {"A": "1"}, evidence, opts)
        row = next(r for r in dist.rows if r.states == ("1",))
        assert row.probability == pytest.approx(
            single.estimate, abs=2 * np.finfo(float).eps
        )

    def test_validation(self):
        net = two_node_discrete()
        with pytest.raises(InvalidTargetError):
            joint_state_distribution(net, [])
        with pytest.raises(InvalidTargetError):
            joint_state_distribution(net, ["A", "A"])
        with pytest.raises(InvalidTargetError):
            joint_state_distribution(net, ["Z"])
        with pytest.raises(InvalidTargetError):
            joint_state_distribution(chain_net(), ["X"])
        with pytest.raises(InvalidTargetError):
            joint_state_distribution(net, ["A"], {"A": Point("1")})


class TestRendering:
    def test_query_result_exact(self):
        res = query_prob(two_node_discrete(), {"B": "1"})
        text = render_query_result(res, label="P(B=1)")
        assert "P(B=1)" in text
        assert "0.590" in text
        assert "(exact)" in text

    def test_query_result_sampled(self):
        opts = QueryOptions(method="rejection", n_samples=10_000, seed=1)
        res = query_prob(two_node_discrete(), {"B": "1"}, opts=opts)
        text = render_query_result(res)
        assert "method rejection" in text
        assert "std error" in text
        assert f"kept {res.n_kept} of 10000" in text

    def test_joint_distribution_table(self):
        dist = joint_state_distribution(two_node_discrete(), ["A", "B"])
        text = render_joint_distribution(dist)
        lines = text.splitlines()
        assert lines[0] == "A=0, B=0: 0.270"
        assert lines[1] == "A=1, B=0: 0.140"
        assert lines[4] == "sum: 1.000"
        assert lines[5] == "method exact"
