"""Model and DAG file formats.

Both formats are JSON: human-readable, structured, and value-exact for
floats because numbers are written with Python's shortest round-trip
repr. A model file lists variables (name, kind, states), edges, and one
CPD block per node with explicit row configurations. Loading validates
the assembled network and fails on any violated invariant.
"""

from __future__ import annotations

import json

from .cpd import CategoricalCpt, ClgCpd, VariableSpec, config_count, iter_configs
from .errors import IoError, ModelFormatError
from .graph import Dag
from .network import Network

MODEL_FORMAT = "clgnet-model"
DAG_FORMAT = "clgnet-dag"
FORMAT_VERSION = 1


# -- serialization -------------------------------------------------------------


def model_to_dict(net: Network) -> dict:
    variables = []
    for name in net.dag.nodes:
        spec = net.specs[name]
        entry: dict = {"name": name}
        if spec.is_discrete:
            entry["kind"] = "discrete"
            entry["states"] = list(spec.states)
        else:
            entry["kind"] = "continuous"
        variables.append(entry)
    cpds = {}
    for name in net.dag.nodes:
        cpd = net.cpds[name]
        if isinstance(cpd, CategoricalCpt):
            cpds[name] = {
                "kind": "categorical",
                "parents": list(cpd.parents),
                "rows": [
                    {
                        "config": list(config),
                        "probs": [float(p) for p in cpd.probs[i]],
                    }
                    for i, config in enumerate(cpd.configs())
                ],
            }
        else:
            cpds[name] = {
                "kind": "clg",
                "discrete_parents": list(cpd.discrete_parents),
                "continuous_parents": list(cpd.continuous_parents),
                "rows": [
                    {
                        "config": list(config),
                        "intercept": float(cpd.intercepts[i]),
                        "coefficients": [float(c) for c in cpd.coefficients[i]],
                        "sd": float(cpd.sds[i]),
                    }
                    for i, config in enumerate(cpd.configs())
                ],
            }
    return {
        "format": MODEL_FORMAT,
        "version": FORMAT_VERSION,
        "variables": variables,
        "edges": [list(edge) for edge in net.dag.edges],
        "cpds": cpds,
    }


def model_from_dict(payload: dict) -> Network:
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"not a {MODEL_FORMAT} document")
    if payload.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format version {payload.get('version')!r}"
        )
    specs: list[VariableSpec] = []
    for entry in payload.get("variables", []):
        name = entry.get("name")
        kind = entry.get("kind")
        if not name or kind not in ("discrete", "continuous"):
            raise ModelFormatError(f"bad variable entry {entry!r}")
        if kind == "discrete":
            specs.append(VariableSpec(name, tuple(entry.get("states", ()))))
        else:
            if "states" in entry:
                raise ModelFormatError(f"{name!r}: continuous variable lists states")
            specs.append(VariableSpec(name, None))
    by_name = {s.name: s for s in specs}
    if len(by_name) != len(specs):
        raise ModelFormatError("duplicate variable names")
    edges = [tuple(e) for e in payload.get("edges", [])]
    for edge in edges:
        if len(edge) != 2:
            raise ModelFormatError(f"bad edge {edge!r}")
    dag = Dag(tuple(s.name for s in specs), tuple(edges))

    cpd_blocks = payload.get("cpds", {})
    cpds: list[CategoricalCpt | ClgCpd] = []
    for name in dag.nodes:
        block = cpd_blocks.get(name)
        if block is None:
            raise ModelFormatError(f"missing cpd block for {name!r}")
        cpds.append(_cpd_from_block(name, block, by_name))
    return Network(dag, specs, cpds).require_valid()


def _states_of(parent: str, by_name: dict, node: str) -> tuple[str, ...]:
    spec = by_name.get(parent)
    if spec is None:
        raise ModelFormatError(f"{node!r}: unknown parent {parent!r}")
    if not spec.is_discrete:
        raise ModelFormatError(
            f"{node!r}: parent {parent!r} is continuous, expected discrete"
        )
    return spec.states


def _rows_by_config(name, rows, parent_states) -> list[dict]:
    """Order row dicts by their declared config, requiring exactly one
    row per configuration."""
    expected = {config: i for i, config in enumerate(iter_configs(parent_states))}
    if len(rows) != config_count(parent_states):
        raise ModelFormatError(
            f"{name!r}: {len(rows)} rows, expected {config_count(parent_states)}"
        )
    ordered: list = [None] * len(expected)
    for row in rows:
        config = tuple(str(v) for v in row.get("config", ()))
        if config not in expected:
            raise ModelFormatError(f"{name!r}: unknown row config {config}")
        slot = expected[config]
        if ordered[slot] is not None:
            raise ModelFormatError(f"{name!r}: duplicate row config {config}")
        ordered[slot] = row
    return ordered


def _cpd_from_block(name: str, block: dict, by_name: dict) -> CategoricalCpt | ClgCpd:
    kind = block.get("kind")
    spec = by_name[name]
    if kind == "categorical":
        if not spec.is_discrete:
            raise ModelFormatError(f"{name!r}: categorical cpd on continuous node")
        parents = tuple(block.get("parents", ()))
        parent_states = tuple(_states_of(p, by_name, name) for p in parents)
        rows = _rows_by_config(name, block.get("rows", []), parent_states)
        try:
            return CategoricalCpt(
                name,
                spec.states,
                parents,
                parent_states,
                [row.get("probs", ()) for row in rows],
            )
        except Exception as exc:
            raise ModelFormatError(f"{name!r}: {exc}") from exc
    if kind == "clg":
        if spec.is_discrete:
            raise ModelFormatError(f"{name!r}: clg cpd on discrete node")
        discrete_parents = tuple(block.get("discrete_parents", ()))
        continuous_parents = tuple(block.get("continuous_parents", ()))
        parent_states = tuple(
            _states_of(p, by_name, name) for p in discrete_parents
        )
        rows = _rows_by_config(name, block.get("rows", []), parent_states)
        try:
            return ClgCpd(
                name,
                discrete_parents,
                parent_states,
                continuous_parents,
                [row.get("intercept") for row in rows],
                [row.get("coefficients", ()) for row in rows],
                [row.get("sd") for row in rows],
            )
        except Exception as exc:
            raise ModelFormatError(f"{name!r}: {exc}") from exc
    raise ModelFormatError(f"{name!r}: unknown cpd kind {kind!r}")


# -- files ----------------------------------------------------------------------


def _write_json(payload: dict, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_json(path, expected_format: str) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != expected_format:
        raise ModelFormatError(f"{path}: not a {expected_format} file")
    return payload


def save_model(net: Network, path) -> None:
    _write_json(model_to_dict(net), path)


def load_model(path) -> Network:
    return model_from_dict(_read_json(path, MODEL_FORMAT))


def dag_to_dict(dag: Dag) -> dict:
    return {
        "format": DAG_FORMAT,
        "version": FORMAT_VERSION,
        "nodes": list(dag.nodes),
        "edges": [list(edge) for edge in dag.edges],
    }


def dag_from_dict(payload: dict) -> Dag:
    if not isinstance(payload, dict) or payload.get("format") != DAG_FORMAT:
        raise ModelFormatError(f"not a {DAG_FORMAT} document")
    nodes = payload.get("nodes", [])
    edges = payload.get("edges", [])
    for edge in edges:
        if not isinstance(edge, list) or len(edge) != 2:
            raise ModelFormatError(f"bad edge {edge!r}")
    return Dag(tuple(nodes), tuple(tuple(e) for e in edges))


def save_dag(dag: Dag, path) -> None:
    _write_json(dag_to_dict(dag), path)


def load_dag(path) -> Dag:
    return dag_from_dict(_read_json(path, DAG_FORMAT))
