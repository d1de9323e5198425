"""Operation handlers shared by the HTTP app and the local CLI path.

Each handler is a plain function from a request model to a response
model. The CLI calls them directly in process; the FastAPI app exposes
them as routes. Handlers that accept a model reference resolve either a
registered model id or an inline model document.
"""

from __future__ import annotations

import hashlib
import json

from .. import fit as fit_mod
from .. import infer as infer_mod
from ..data import (
    csv_text,
    load_csv_text,
    schema_from_dict,
    schema_to_dict,
    summarize,
    correlation_matrix,
    render_correlation,
    render_summary,
)
from ..errors import (
    InsufficientDataError,
    InvalidEvidenceError,
    ModelError,
    ZeroVarianceError,
)
from ..graph import to_dot
from ..learn import LearnConfig, hill_climb
from ..modelio import dag_from_dict, dag_to_dict, model_from_dict, model_to_dict
from ..network import Network
from . import schemas as sm


class ModelRegistry:
    """In-memory store of loaded models, keyed by a content hash so the
    same document always gets the same id."""

    def __init__(self):
        self._models: dict[str, tuple[Network, dict]] = {}

    def register(self, net: Network) -> str:
        doc = model_to_dict(net)
        digest = hashlib.sha256(
            json.dumps(doc, sort_keys=True).encode("utf-8")
        ).hexdigest()
        model_id = digest[:12]
        self._models[model_id] = (net, doc)
        return model_id

    def get(self, model_id: str) -> Network:
        try:
            return self._models[model_id][0]
        except KeyError:
            raise ModelError(f"unknown model id {model_id!r}") from None

    def infos(self) -> list[sm.ModelInfo]:
        return [
            sm.ModelInfo(
                model_id=model_id,
                nodes=list(net.dag.nodes),
                n_edges=len(net.dag.edges),
            )
            for model_id, (net, _) in sorted(self._models.items())
        ]


def resolve_network(ref: sm.ModelRef, registry: ModelRegistry | None) -> Network:
    if (ref.model_id is None) == (ref.model_doc is None):
        raise ModelError("provide exactly one of model_id or model_doc")
    if ref.model_doc is not None:
        return model_from_dict(ref.model_doc)
    if registry is None:
        raise ModelError("model_id given but no model registry is available")
    return registry.get(ref.model_id)


def evidence_from_terms(terms: list[sm.EvidenceTerm]) -> dict:
    """Structured evidence terms -> Point/Interval map (node names are
    validated later against the network)."""
    evidence: dict[str, object] = {}
    for term in terms:
        if term.node in evidence:
            raise InvalidEvidenceError(f"duplicate evidence for node {term.node!r}")
        if term.op == "eq":
            if term.value is None:
                raise InvalidEvidenceError(f"{term.node}: eq needs a value")
            evidence[term.node] = infer_mod.Point(term.value)
        elif term.op == "gt":
            if term.value is None:
                raise InvalidEvidenceError(f"{term.node}: gt needs a value")
            evidence[term.node] = infer_mod.Interval(lo=float(term.value))
        elif term.op == "lt":
            if term.value is None:
                raise InvalidEvidenceError(f"{term.node}: lt needs a value")
            evidence[term.node] = infer_mod.Interval(hi=float(term.value))
        else:
            if term.lo is None or term.hi is None:
                raise InvalidEvidenceError(f"{term.node}: between needs lo and hi")
            evidence[term.node] = infer_mod.Interval(
                lo=term.lo, hi=term.hi, closed_lo=True, closed_hi=True
            )
    return evidence


def _query_label(target: dict, evidence: list[sm.EvidenceTerm]) -> str:
    target_part = ", ".join(f"{k}={v}" for k, v in target.items())
    if not evidence:
        return f"P({target_part})"
    op_text = {"eq": "=", "gt": ">", "lt": "<"}
    parts = []
    for term in evidence:
        if term.op == "between":
            parts.append(f"{term.node} in [{term.lo:g}, {term.hi:g}]")
        else:
            parts.append(f"{term.node}{op_text[term.op]}{term.value}")
    return f"P({target_part} | {', '.join(parts)})"


# -- handlers ---------------------------------------------------------------


def handle_register(
    req: sm.RegisterRequest, registry: ModelRegistry
) -> sm.ModelInfo:
    net = model_from_dict(req.model_doc)
    model_id = registry.register(net)
    return sm.ModelInfo(
        model_id=model_id, nodes=list(net.dag.nodes), n_edges=len(net.dag.edges)
    )


def handle_list_models(registry: ModelRegistry) -> sm.ModelList:
    return sm.ModelList(models=registry.infos())


def handle_query(
    req: sm.QueryRequest, registry: ModelRegistry | None = None
) -> sm.QueryResponse:
    net = resolve_network(req, registry)
    evidence = evidence_from_terms(req.evidence)
    opts = infer_mod.QueryOptions(
        method=req.settings.method,
        n_samples=req.settings.n_samples,
        seed=req.settings.seed,
    )
    result = infer_mod.query_prob(net, req.target, evidence, opts)
    rendered = infer_mod.render_query_result(
        result, _query_label(req.target, req.evidence)
    )
    return sm.QueryResponse(
        estimate=result.estimate,
        std_error=result.std_error,
        n_kept=result.n_kept,
        n_drawn=result.n_drawn,
        method=result.method,
        rendered=rendered,
    )


def handle_distribution(
    req: sm.DistributionRequest, registry: ModelRegistry | None = None
) -> sm.DistributionResponse:
    net = resolve_network(req, registry)
    evidence = evidence_from_terms(req.evidence)
    opts = infer_mod.QueryOptions(
        method=req.settings.method,
        n_samples=req.settings.n_samples,
        seed=req.settings.seed,
    )
    dist = infer_mod.joint_state_distribution(net, req.targets, evidence, opts)
    return sm.DistributionResponse(
        targets=list(dist.targets),
        rows=[
            sm.DistributionRow(
                states=list(row.states),
                probability=row.probability,
                std_error=row.std_error,
            )
            for row in dist.rows
        ],
        n_kept=dist.n_kept,
        n_drawn=dist.n_drawn,
        method=dist.method,
        rendered=infer_mod.render_joint_distribution(dist),
    )


def handle_sample(
    req: sm.SampleRequest, registry: ModelRegistry | None = None
) -> sm.SampleResponse:
    net = resolve_network(req, registry)
    data = net.forward_sample(req.n, req.seed)
    return sm.SampleResponse(
        csv=csv_text(data),
        schema_doc=schema_to_dict(data.schema),
        n_rows=data.n_rows,
    )


def handle_describe(req: sm.DescribeRequest) -> sm.DescribeResponse:
    schema = schema_from_dict(req.schema_doc)
    data = load_csv_text(
        req.csv, schema, delimiter=req.delimiter, missing_token=req.missing_token
    )
    summary = render_summary(summarize(data))
    correlation = None
    note = None
    continuous = [c.name for c in data.schema if not c.is_discrete]
    columns = req.correlation_columns
    if columns is not None:
        # explicitly requested: propagate failures
        correlation = render_correlation(correlation_matrix(data, columns))
    elif len(continuous) >= 2:
        try:
            correlation = render_correlation(correlation_matrix(data, continuous))
        except (InsufficientDataError, ZeroVarianceError) as exc:
            note = f"correlation table skipped: {exc}"
    return sm.DescribeResponse(
        n_rows=data.n_rows,
        summary=summary,
        correlation=correlation,
        correlation_note=note,
        missing_counts=data.missing_counts(),
    )


def handle_fit(req: sm.FitRequest) -> sm.FitResponse:
    schema = schema_from_dict(req.schema_doc)
    data = load_csv_text(
        req.csv, schema, delimiter=req.delimiter, missing_token=req.missing_token
    )
    dag = dag_from_dict(req.dag_doc)
    net, report = fit_mod.fit_network(data, dag, pseudo_count=req.pseudo_count)
    return sm.FitResponse(
        model_doc=model_to_dict(net),
        report=fit_mod.render_fit_report(net, report),
    )


def handle_learn(req: sm.LearnRequest) -> sm.LearnResponse:
    schema = schema_from_dict(req.schema_doc)
    data = load_csv_text(
        req.csv, schema, delimiter=req.delimiter, missing_token=req.missing_token
    )
    config = LearnConfig(
        max_iterations=req.settings.max_iterations,
        restarts=req.settings.restarts,
        perturbation_size=req.settings.perturbation_size,
        seed=req.settings.seed,
        whitelist=tuple(tuple(e) for e in req.settings.whitelist),
        blacklist=tuple(tuple(e) for e in req.settings.blacklist),
    )
    result = hill_climb(data, None, config)
    trace = [
        sm.TraceStep(
            iteration=entry.iteration,
            op=entry.move.op,
            source=entry.move.source,
            target=entry.move.target,
            score=entry.score,
        )
        for entry in result.trace
    ]
    return sm.LearnResponse(
        dag_doc=dag_to_dict(result.dag),
        score=result.score,
        trace=trace,
        dot=to_dot(result.dag),
    )


def handle_export_dot(
    req: sm.DotRequest, registry: ModelRegistry | None = None
) -> sm.DotResponse:
    given = [
        x for x in (req.model_id, req.model_doc, req.dag_doc) if x is not None
    ]
    if len(given) != 1:
        raise ModelError("provide exactly one of model_id, model_doc, dag_doc")
    if req.dag_doc is not None:
        dag = dag_from_dict(req.dag_doc)
    else:
        dag = resolve_network(req, registry).dag
    return sm.DotResponse(dot=to_dot(dag))
