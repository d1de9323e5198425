"""Exception hierarchy for the whole package.

Every error raised on purpose derives from ClgnetError; the second level
(GraphError, ModelError, DataError, FitError, LearnError, InferenceError)
groups errors by the layer that raises them, which is also how the service
and CLI map failures to exit codes.
"""


class ClgnetError(Exception):
    """Base class for all package errors."""


# -- graph ------------------------------------------------------------------


class GraphError(ClgnetError):
    pass


class CycleError(GraphError):
    """An edge or edge set would create a directed cycle."""


class DuplicateEdgeError(GraphError):
    pass


class DuplicateNodeError(GraphError):
    pass


class UnknownNodeError(GraphError):
    pass


class OverlappingSetsError(GraphError):
    """Node sets passed to a separation query are not pairwise disjoint."""


# -- model ------------------------------------------------------------------


class ModelError(ClgnetError):
    pass


class IncompleteAssignmentError(ModelError):
    pass


class TypeMismatchError(ModelError):
    pass


class UnknownConfigError(ModelError):
    pass


class ArityMismatchError(ModelError):
    pass


class ModelFormatError(ModelError):
    """A model document could not be parsed or fails validation."""


class ZeroProbabilityWarning(UserWarning):
    """A log-density hit a zero probability table entry; -inf was returned."""


# -- data -------------------------------------------------------------------


class DataError(ClgnetError):
    pass


class HeaderMismatchError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, row: int, column: str, message: str):
        super().__init__(f"row {row}, column {column!r}: {message}")
        self.row = row
        self.column = column


class NotContinuousError(DataError):
    pass


class OutOfRangeValueError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class ZeroVarianceError(DataError):
    pass


class SchemaFormatError(DataError):
    pass


class IoError(DataError):
    pass


# -- fit --------------------------------------------------------------------


class FitError(ClgnetError):
    pass


class NotDiscreteError(FitError):
    pass


class EmptyDatasetError(FitError):
    pass


class InsufficientRowsError(FitError):
    def __init__(self, node: str, config: tuple, n_rows: int, needed: int):
        super().__init__(
            f"node {node!r}, configuration {config}: {n_rows} usable rows, "
            f"need at least {needed}"
        )
        self.node = node
        self.config = config
        self.n_rows = n_rows
        self.needed = needed


class SingularDesignError(FitError):
    pass


class SchemaMismatchError(FitError):
    pass


class ClgRestrictionError(FitError):
    """A discrete node was given a continuous parent."""


class FitWarning(UserWarning):
    """Non-fatal fitting issue, e.g. an unobserved parent configuration."""


# -- learn ------------------------------------------------------------------


class LearnError(ClgnetError):
    pass


class NodeSetMismatchError(LearnError):
    pass


class InvalidWhitelistError(LearnError):
    pass


# -- infer ------------------------------------------------------------------


class InferenceError(ClgnetError):
    pass


class ContinuousNodePresentError(InferenceError):
    pass


class ZeroProbabilityEvidenceError(InferenceError):
    pass


class NoSamplesKeptError(InferenceError):
    """Every sample was rejected; the estimate would carry no information."""


class InvalidTargetError(InferenceError):
    pass


class InvalidEvidenceError(InferenceError):
    pass


# -- categorization ------------------------------------------------------------


def error_category(exc: BaseException) -> str:
    """Layer name of an error: graph, model, data, fit, learn, inference,
    or internal for anything outside the hierarchy. Drives the service
    error payloads and the CLI exit codes."""
    for cls, name in (
        (GraphError, "graph"),
        (ModelError, "model"),
        (DataError, "data"),
        (FitError, "fit"),
        (LearnError, "learn"),
        (InferenceError, "inference"),
    ):
        if isinstance(exc, cls):
            return name
    return "internal"
