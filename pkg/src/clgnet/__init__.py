"""Conditional linear Gaussian network toolkit.

Discrete variables are categorical; continuous variables are Gaussian
with a mean that is linear in their continuous parents, one parameter
row per configuration of their discrete parents. The package covers
graph handling, parameter fitting, BIC-guided structure search, forward
sampling, and Monte Carlo / exact probability queries, plus a small
HTTP service and CLI wrapping the same operations.
"""

__version__ = "0.1.0"

from .cpd import CategoricalCpt, ClgCpd, VariableSpec, config_index, iter_configs
from .data import (
    ColumnSchema,
    CorrelationResult,
    Dataset,
    binarize,
    correlation_matrix,
    csv_text,
    load_csv,
    load_csv_text,
    load_schema,
    render_correlation,
    render_summary,
    save_csv,
    save_schema,
    schema_from_dict,
    schema_from_specs,
    schema_to_dict,
    specs_from_schema,
    summarize,
)
from .errors import (
    ClgnetError,
    DataError,
    FitError,
    GraphError,
    InferenceError,
    LearnError,
    ModelError,
    error_category,
)
from .fit import (
    FamilyScore,
    FitReport,
    bic_score,
    family_score,
    fit_categorical,
    fit_clg,
    fit_network,
    log_likelihood,
    render_fit_report,
)
from .fixture import DEFAULT_SAMPLE_ROWS, driver_network, fixture_path, load_fixture
from .graph import Dag, to_dot
from .infer import (
    Evidence,
    Interval,
    JointDistribution,
    Point,
    QueryOptions,
    QueryResult,
    exact_enumeration,
    joint_state_distribution,
    query_prob,
    render_joint_distribution,
    render_query_result,
)
from .learn import (
    LearnConfig,
    LearnResult,
    Move,
    StructureReport,
    compare_structures,
    hill_climb,
)
from .modelio import (
    dag_from_dict,
    dag_to_dict,
    load_dag,
    load_model,
    model_from_dict,
    model_to_dict,
    save_dag,
    save_model,
)
from .network import Network

__all__ = [
    "DEFAULT_SAMPLE_ROWS",
    "CategoricalCpt",
    "ClgCpd",
    "ClgnetError",
    "ColumnSchema",
    "CorrelationResult",
    "Dag",
    "DataError",
    "Dataset",
    "Evidence",
    "FamilyScore",
    "FitError",
    "FitReport",
    "GraphError",
    "InferenceError",
    "Interval",
    "JointDistribution",
    "LearnConfig",
    "LearnError",
    "LearnResult",
    "ModelError",
    "Move",
    "Network",
    "Point",
    "QueryOptions",
    "QueryResult",
    "StructureReport",
    "VariableSpec",
    "__version__",
    "bic_score",
    "binarize",
    "compare_structures",
    "config_index",
    "correlation_matrix",
    "csv_text",
    "dag_from_dict",
    "dag_to_dict",
    "driver_network",
    "error_category",
    "exact_enumeration",
    "family_score",
    "fit_categorical",
    "fit_clg",
    "fit_network",
    "fixture_path",
    "hill_climb",
    "iter_configs",
    "joint_state_distribution",
    "load_csv",
    "load_csv_text",
    "load_dag",
    "load_fixture",
    "load_model",
    "load_schema",
    "log_likelihood",
    "model_from_dict",
    "model_to_dict",
    "query_prob",
    "render_correlation",
    "render_fit_report",
    "render_joint_distribution",
    "render_query_result",
    "render_summary",
    "save_csv",
    "save_dag",
    "save_model",
    "save_schema",
    "schema_from_dict",
    "schema_from_specs",
    "schema_to_dict",
    "specs_from_schema",
    "summarize",
    "to_dot",
]
