"""Maximum-likelihood parameter estimation and BIC scoring."""

import math
import warnings

import numpy as np
import pytest
import scipy.stats

from clgnet import (
    Dataset,
    VariableSpec,
    bic_score,
    family_score,
    fit_categorical,
    fit_clg,
    fit_network,
    log_likelihood,
    render_fit_report,
)
from clgnet.data import ColumnSchema
from clgnet.errors import (
    ClgRestrictionError,
    EmptyDatasetError,
    FitWarning,
    InsufficientRowsError,
    NotDiscreteError,
    SchemaMismatchError,
    SingularDesignError,
)
from clgnet.fit import fit_family, param_count
from clgnet.graph import Dag

from helpers import chain_net, continuous_pair, discrete_column, two_node_discrete


def xy_with_groups():
    """g in {0,1}; y = 2 + 3x on g=0 rows, y = -1 - 0.5x on g=1 rows."""
    schema = [ColumnSchema("g", ("0", "1")), ColumnSchema("x"), ColumnSchema("y")]
    x = [0.0, 1.0, 2.0, 3.0, 0.0, 1.0, 2.0, 3.0]
    g = ["0", "0", "0", "0", "1", "1", "1", "1"]
    y = [2 + 3 * v for v in x[:4]] + [-1 - 0.5 * v for v in x[4:]]
    return Dataset.from_labels(schema, {"g": g, "x": x, "y": y})


class TestFitCategorical:
    def test_marginal_mle(self):
        cpt = fit_categorical(discrete_column("s", [1, 1, 1, 0]), "s")
        assert cpt.probs[0].tolist() == [0.25, 0.75]

    def test_conditional_counts(self):
        schema = [ColumnSchema("a", ("0", "1")), ColumnSchema("b", ("0", "1"))]
        data = Dataset.from_labels(
            schema,
            {"a": ["0", "0", "0", "1", "1"], "b": ["0", "0", "1", "1", "1"]},
        )
        cpt = fit_categorical(data, "b", ("a",))
        assert cpt.probs[0].tolist() == pytest.approx([2 / 3, 1 / 3])
        assert cpt.probs[1].tolist() == [0.0, 1.0]

    def test_pseudo_count_smoothing(self):
        cpt = fit_categorical(discrete_column("s", [1, 1, 1, 0]), "s",
                              pseudo_count=1.0)
        # (1+1)/(4+2), (3+1)/(4+2)
        assert cpt.probs[0].tolist() == pytest.approx([2 / 6, 4 / 6])

    def test_unseen_config_gets_uniform_row_with_warning(self):
        schema = [ColumnSchema("a", ("0", "1")), ColumnSchema("b", ("0", "1"))]
        data = Dataset.from_labels(
            schema, {"a": ["0", "0"], "b": ["0", "1"]}
        )
        with pytest.warns(FitWarning):
            cpt = fit_categorical(data, "b", ("a",))
        assert cpt.probs[1].tolist() == [0.5, 0.5]

    def test_incomplete_family_rows_dropped(self):
        schema = [ColumnSchema("a", ("0", "1")), ColumnSchema("b", ("0", "1"))]
        data = Dataset.from_labels(
            schema, {"a": ["0", None, "0"], "b": ["1", "1", None]}
        )
        with pytest.warns(FitWarning):  # the a=1 branch is never observed
            cpt = fit_categorical(data, "b", ("a",))
        # only the first row is complete for the family
        assert cpt.probs[0].tolist() == [0.0, 1.0]

    def test_continuous_node_rejected(self):
        with pytest.raises(NotDiscreteError):
            fit_categorical(continuous_pair([1.0], [2.0]), "X")

    def test_all_rows_missing(self):
        data = Dataset.from_labels([ColumnSchema("s", ("0", "1"))], {"s": [None]})
        with pytest.raises(EmptyDatasetError):
            fit_categorical(data, "s")


class TestFitClg:
    def test_noiseless_line_recovered_exactly(self):
        x = [0.0, 1.0, 2.0, 3.0]
        y = [2.0 + 3.0 * v for v in x]
        cpd = fit_clg(continuous_pair(x, y), "Y", continuous_parents=("X",))
        assert cpd.intercepts[0] == pytest.approx(2.0, abs=1e-9)
        assert cpd.coefficients[0, 0] == pytest.approx(3.0, abs=1e-9)
        assert cpd.sds[0] == pytest.approx(1e-6)  # floored, not zero

    def test_matches_reference_regression(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=200)
        y = 1.5 - 2.0 * x + rng.normal(scale=0.7, size=200)
        cpd = fit_clg(continuous_pair(x, y), "Y", continuous_parents=("X",))
        ref = scipy.stats.linregress(x, y)
        assert cpd.intercepts[0] == pytest.approx(ref.intercept, abs=1e-9)
        assert cpd.coefficients[0, 0] == pytest.approx(ref.slope, abs=1e-9)
        # MLE sd uses the n (not n-2) denominator
        resid = y - (cpd.intercepts[0] + cpd.coefficients[0, 0] * x)
        assert cpd.sds[0] == pytest.approx(math.sqrt(np.mean(resid**2)), abs=1e-12)

    def test_mean_only_family(self):
        cpd = fit_clg(continuous_pair([1.0, 2.0, 3.0], [0, 0, 0]), "X")
        assert cpd.intercepts[0] == pytest.approx(2.0)
        assert cpd.sds[0] == pytest.approx(math.sqrt(2 / 3), abs=1e-12)

    def test_per_config_parameters(self):
        cpd = fit_clg(
            xy_with_groups(), "y",
            continuous_parents=("x",), discrete_parents=("g",),
        )
        assert cpd.intercepts.tolist() == pytest.approx([2.0, -1.0], abs=1e-9)
        assert cpd.coefficients[:, 0].tolist() == pytest.approx([3.0, -0.5], abs=1e-9)

    def test_insufficient_rows_for_config(self):
        data = continuous_pair([1.0, 2.0], [1.0, 2.0])
        with pytest.raises(InsufficientRowsError) as err:
            fit_clg(data, "Y", continuous_parents=("X",))
        assert err.value.needed == 3

    def test_singular_design(self):
        schema = [ColumnSchema("x"), ColumnSchema("x2"), ColumnSchema("y")]
        x = [0.0, 1.0, 2.0, 3.0, 4.0]
        data = Dataset.from_labels(
            schema, {"x": x, "x2": [2 * v for v in x], "y": [1.0] * 5}
        )
        with pytest.raises(SingularDesignError):
            fit_clg(data, "y", continuous_parents=("x", "x2"))

    def test_discrete_node_rejected(self):
        with pytest.raises(Exception):
            fit_clg(discrete_column("s", [0, 1]), "s")


class TestLogLikelihood:
    def test_bernoulli_oracle(self):
        # 3 ln 0.75 + ln 0.25
        net_data = discrete_column("A", [1, 1, 1, 0])
        dag = Dag(("A",))
        from clgnet import Network
        from clgnet.cpd import CategoricalCpt

        net = Network(
            dag,
            (VariableSpec.discrete("A", ("0", "1")),),
            (CategoricalCpt("A", ("0", "1"), (), (), np.array([[0.25, 0.75]])),),
        )
        expect = 3 * math.log(0.75) + math.log(0.25)
        assert log_likelihood(net, net_data) == pytest.approx(expect, abs=1e-12)

    def test_gaussian_matches_reference_density(self):
        net = chain_net()
        data = net.forward_sample(300, seed=9)
        a = data.column("A")
        x = data.column("X")
        y = data.column("Y")
        ref = math.log(0.6) * int(np.sum(a == 0)) + math.log(0.4) * int(np.sum(a == 1))
        ref += scipy.stats.norm.logpdf(x[a == 0], loc=1.0, scale=2.0).sum()
        ref += scipy.stats.norm.logpdf(x[a == 1], loc=-1.0, scale=0.5).sum()
        ref += scipy.stats.norm.logpdf(y, loc=1.0 + 0.5 * x, scale=0.8).sum()
        assert log_likelihood(net, data) == pytest.approx(ref, rel=1e-12)


class TestFamilyScore:
    def test_bernoulli_bic_oracle(self):
        # ll = 3 ln 0.75 + ln 0.25; one free parameter; n = 4
        score = family_score(discrete_column("s", [1, 1, 1, 0]), "s")
        expect = 3 * math.log(0.75) + math.log(0.25) - 0.5 * math.log(4)
        assert score.bic == pytest.approx(expect, abs=1e-12)
        assert score.param_count == 1

    def test_param_counts(self):
        data = xy_with_groups()
        # discrete node, one binary parent: (2-1)*2
        assert param_count(data, "g", ()) == 1
        # continuous node, 1 cont parent, 1 binary discrete parent:
        # 2 configs * (1 + 2)
        assert param_count(data, "y", ("x", "g")) == 6
        assert param_count(data, "y", ()) == 2

    def test_clg_restriction(self):
        with pytest.raises(ClgRestrictionError):
            fit_family(xy_with_groups(), "g", ("x",))

    def test_decomposability(self):
        net = chain_net()
        data = net.forward_sample(400, seed=13)
        dag = net.dag
        total = bic_score(data, dag)
        parts = sum(
            family_score(data, v, dag.ordered_parents(v)).bic for v in dag.nodes
        )
        assert total == pytest.approx(parts, rel=1e-12)

    def test_score_equivalence_between_directions(self):
        # for two continuous variables, X->Y and Y->X carry the same
        # gaussian likelihood and the same parameter count
        rng = np.random.default_rng(21)
        x = rng.normal(size=500)
        y = 0.8 * x + rng.normal(scale=0.5, size=500)
        data = continuous_pair(x, y)
        fwd = bic_score(data, Dag(("X", "Y"), (("X", "Y"),)))
        rev = bic_score(data, Dag(("X", "Y"), (("Y", "X"),)))
        assert fwd == pytest.approx(rev, rel=1e-6)

    def test_specs_cross_checked(self):
        data = xy_with_groups()
        wrong = [VariableSpec.continuous("g"), VariableSpec.continuous("x"),
                 VariableSpec.continuous("y")]
        with pytest.raises(SchemaMismatchError):
            bic_score(data, Dag(("g", "x", "y")), wrong)


class TestFitNetwork:
    def test_round_trip_recovers_parameters(self):
        net = chain_net()
        data = net.forward_sample(60_000, seed=17)
        refit, report = fit_network(data, net.dag)
        assert report.n_rows == 60_000
        got = refit.cpds["Y"]
        assert got.intercepts[0] == pytest.approx(1.0, abs=0.02)
        assert got.coefficients[0, 0] == pytest.approx(0.5, abs=0.02)
        assert got.sds[0] == pytest.approx(0.8, abs=0.02)
        a = refit.cpds["A"]
        assert a.probs[0, 1] == pytest.approx(0.4, abs=0.01)

    def test_refit_model_is_valid(self):
        net = chain_net()
        data = net.forward_sample(500, seed=19)
        refit, _ = fit_network(data, net.dag)
        assert refit.validate() == []

    def test_dag_with_unknown_column(self):
        data = xy_with_groups()
        dag = Dag(("g", "x", "y", "z"))
        with pytest.raises(SchemaMismatchError):
            fit_network(data, dag)

    def test_incomplete_rows_counted_per_family(self):
        schema = [ColumnSchema("x"), ColumnSchema("y")]
        data = Dataset.from_labels(
            schema,
            {"x": [0.0, 1.0, 2.0, 3.0, None], "y": [0.0, 1.1, 2.2, None, 4.0]},
        )
        _, report = fit_network(data, Dag(("x", "y"), (("x", "y"),)))
        by_node = {nf.node: nf for nf in report.nodes}
        assert by_node["x"].n_used == 4
        assert by_node["y"].n_used == 3
        assert by_node["y"].n_dropped == 2

    def test_fit_warnings_recorded_in_report(self):
        schema = [ColumnSchema("a", ("0", "1")), ColumnSchema("b", ("0", "1"))]
        data = Dataset.from_labels(schema, {"a": ["0", "0"], "b": ["0", "1"]})
        with warnings.catch_warnings():
            warnings.simplefilter("error")  # must not leak out of fit_network
            _, report = fit_network(data, Dag(("a", "b"), (("a", "b"),)))
        by_node = {nf.node: nf for nf in report.nodes}
        assert by_node["b"].warnings


class TestFitReport:
    def test_report_layout(self):
        data = xy_with_groups()
        dag = Dag(("g", "x", "y"), (("g", "y"), ("x", "y")))
        net, report = fit_network(data, dag)
        text = render_fit_report(net, report)
        assert "y | g, x" in text
        assert "g=0:" in text and "g=1:" in text
        # noiseless within-group lines are recovered exactly
        assert "2.000 + 3.000*x" in text
        assert "-1.000 - 0.500*x" in text
        assert "(marginal)" in text
