"""Request and response models for the HTTP service.

Every operation the CLI exposes is a (request model, response model)
pair so local calls and remote calls move the same payloads. Model
documents, DAG documents, and column schemas travel as the same JSON
dictionaries the file formats use; datasets travel as CSV text.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

_NO_PROTECTED = ConfigDict(protected_namespaces=())


class EvidenceTerm(BaseModel):
    """One observed constraint: ``eq`` carries ``value`` (state label or
    number), ``gt``/``lt`` carry ``value`` as an open bound, ``between``
    carries ``lo``/``hi`` as a closed interval."""

    node: str
    op: Literal["eq", "gt", "lt", "between"]
    value: Optional[str | float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None


class QuerySettings(BaseModel):
    method: str = "auto"
    n_samples: int = 200_000
    seed: int = 0


class ModelRef(BaseModel):
    """Either a registered model id or an inline model document."""

    model_config = _NO_PROTECTED

    model_id: Optional[str] = None
    model_doc: Optional[dict] = None


class RegisterRequest(BaseModel):
    model_config = _NO_PROTECTED

    model_doc: dict


class ModelInfo(BaseModel):
    model_config = _NO_PROTECTED

    model_id: str
    nodes: list[str]
    n_edges: int


class ModelList(BaseModel):
    models: list[ModelInfo]


class QueryRequest(ModelRef):
    target: dict[str, str]
    evidence: list[EvidenceTerm] = []
    settings: QuerySettings = QuerySettings()


class QueryResponse(BaseModel):
    estimate: float
    std_error: float
    n_kept: int
    n_drawn: int
    method: str
    rendered: str


class DistributionRequest(ModelRef):
    targets: list[str]
    evidence: list[EvidenceTerm] = []
    settings: QuerySettings = QuerySettings()


class DistributionRow(BaseModel):
    states: list[str]
    probability: float
    std_error: float


class DistributionResponse(BaseModel):
    targets: list[str]
    rows: list[DistributionRow]
    n_kept: int
    n_drawn: int
    method: str
    rendered: str


class SampleRequest(ModelRef):
    n: int
    seed: int


class SampleResponse(BaseModel):
    csv: str
    schema_doc: dict
    n_rows: int


class DescribeRequest(BaseModel):
    csv: str
    schema_doc: dict
    delimiter: str = ","
    missing_token: str = ""
    correlation_columns: Optional[list[str]] = None


class DescribeResponse(BaseModel):
    n_rows: int
    summary: str
    correlation: Optional[str] = None
    correlation_note: Optional[str] = None
    missing_counts: dict[str, int]


class FitRequest(BaseModel):
    csv: str
    schema_doc: dict
    dag_doc: dict
    pseudo_count: float = 0.0
    delimiter: str = ","
    missing_token: str = ""


class FitResponse(BaseModel):
    model_config = _NO_PROTECTED

    model_doc: dict
    report: str


class LearnSettings(BaseModel):
    max_iterations: int = 200
    restarts: int = 0
    perturbation_size: int = 2
    seed: int = 0
    whitelist: list[list[str]] = []
    blacklist: list[list[str]] = []


class LearnRequest(BaseModel):
    csv: str
    schema_doc: dict
    settings: LearnSettings = LearnSettings()
    delimiter: str = ","
    missing_token: str = ""


class TraceStep(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    iteration: int
    op: str
    source: str = Field(alias="from")
    target: str = Field(alias="to")
    score: float


class LearnResponse(BaseModel):
    dag_doc: dict
    score: float
    trace: list[TraceStep]
    dot: str


class DotRequest(ModelRef):
    dag_doc: Optional[dict] = None


class DotResponse(BaseModel):
    dot: str


class ErrorPayload(BaseModel):
    category: str
    error_type: str
    message: str
