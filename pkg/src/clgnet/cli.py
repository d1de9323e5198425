"""Command line interface.

Every subcommand builds the same request model the HTTP service
accepts, then either calls the handler in process (the default) or
posts it to a running service (``--server URL``), so local and remote
runs produce identical output. Each run writes a manifest recording the
arguments, the seed actually used, dependency versions, and digests of
input and output files.

Exit codes: 0 success, 2 malformed input (files, schemas, graphs,
models), 3 fitting or structure learning failure, 4 query failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from . import __version__
from .errors import (
    ClgnetError,
    InvalidEvidenceError,
    InvalidTargetError,
    IoError,
    ModelFormatError,
    error_category,
)
from .fixture import DEFAULT_SAMPLE_ROWS
from .service import handlers as h
from .service import schemas as sm

DEFAULT_SEED = 0

_EXIT_BY_CATEGORY = {
    "graph": 2,
    "model": 2,
    "data": 2,
    "fit": 3,
    "learn": 3,
    "inference": 4,
}


class _RemoteError(Exception):
    """Error payload returned by a remote service."""

    def __init__(self, category: str, error_type: str, message: str):
        super().__init__(message)
        self.category = category
        self.error_type = error_type
        self.message = message


# -- small file helpers ------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            return handle.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_json_doc(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    return doc


def _read_edge_list(path: str) -> list[list[str]]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON: {exc}") from exc
    ok = isinstance(doc, list) and all(
        isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)
        for e in doc
    )
    if not ok:
        raise ModelFormatError(f"{path}: expected a JSON list of [from, to] pairs")
    return doc


def _ensure_newline(text: str) -> str:
    return text if text.endswith("\n") else text + "\n"


# -- evidence / target mini-grammar ------------------------------------------


def _split_terms(text: str) -> list[str]:
    """Split on top-level commas; commas inside [..] belong to intervals."""
    parts: list[str] = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth = max(depth - 1, 0)
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts if p.strip()]


def parse_evidence(text: str) -> list[sm.EvidenceTerm]:
    """Comma-separated terms: ``name=value``, ``name>value``,
    ``name<value``, or ``name in [lo,hi]``."""
    terms: list[sm.EvidenceTerm] = []
    for raw in _split_terms(text):
        name, sep, rest = raw.partition(" in ")
        if sep:
            name = name.strip()
            rest = rest.strip()
            if (
                name
                and rest.startswith("[")
                and rest.endswith("]")
                and rest.count(",") == 1
            ):
                lo_text, _, hi_text = rest[1:-1].partition(",")
                try:
                    lo, hi = float(lo_text), float(hi_text)
                except ValueError:
                    raise InvalidEvidenceError(
                        f"interval bounds in {raw!r} are not numbers"
                    ) from None
                terms.append(
                    sm.EvidenceTerm(node=name, op="between", lo=lo, hi=hi)
                )
                continue
            raise InvalidEvidenceError(
                f"cannot parse evidence term {raw!r}; expected name in [lo,hi]"
            )
        for sym, op in ((">", "gt"), ("<", "lt"), ("=", "eq")):
            if sym in raw:
                name, _, value = raw.partition(sym)
                name, value = name.strip(), value.strip()
                if not name or not value:
                    raise InvalidEvidenceError(
                        f"cannot parse evidence term {raw!r}"
                    )
                if op == "eq":
                    terms.append(sm.EvidenceTerm(node=name, op="eq", value=value))
                else:
                    try:
                        bound = float(value)
                    except ValueError:
                        raise InvalidEvidenceError(
                            f"bound in {raw!r} is not a number"
                        ) from None
                    terms.append(sm.EvidenceTerm(node=name, op=op, value=bound))
                break
        else:
            raise InvalidEvidenceError(
                f"cannot parse evidence term {raw!r}; expected name=value, "
                f"name>value, name<value, or name in [lo,hi]"
            )
    return terms


def parse_target(text: str) -> dict[str, str]:
    """Comma-separated ``name=state`` pairs."""
    target: dict[str, str] = {}
    for raw in _split_terms(text):
        name, sep, value = raw.partition("=")
        name, value = name.strip(), value.strip()
        if not sep or not name or not value:
            raise InvalidTargetError(
                f"cannot parse target term {raw!r}; expected name=state"
            )
        if name in target:
            raise InvalidTargetError(f"duplicate target node {name!r}")
        target[name] = value
    if not target:
        raise InvalidTargetError("empty target")
    return target


def _split_names(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [t.strip() for t in text.split(",") if t.strip()]


# -- run manifest -------------------------------------------------------------


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(
    args,
    subcommand: str,
    seed: int | None,
    inputs: Sequence[str],
    outputs: Sequence[str],
) -> None:
    if args.no_manifest:
        return
    path = args.manifest or f"clgnet-{subcommand}.manifest.json"
    doc = {
        "format": "clgnet-manifest",
        "subcommand": subcommand,
        "argv": list(args._argv),
        "seed": seed,
        "server": args.server,
        "versions": {
            "clgnet": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
        "created": datetime.now(timezone.utc).isoformat(),
        "inputs": {p: _sha256(p) for p in inputs},
        "outputs": {p: _sha256(p) for p in outputs},
    }
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def _resolve_seed(args) -> int:
    if args.seed is None:
        print(f"no --seed given; using default seed {DEFAULT_SEED}", file=sys.stderr)
        return DEFAULT_SEED
    return args.seed


# -- local/remote dispatch -----------------------------------------------------


def _call(server: str | None, route: str, request, response_type, local):
    if server is None:
        return local()
    import httpx

    url = server.rstrip("/") + "/" + route
    try:
        resp = httpx.post(url, json=request.model_dump(mode="json"), timeout=None)
    except httpx.HTTPError as exc:
        raise _RemoteError(
            "internal", type(exc).__name__, f"cannot reach {url}: {exc}"
        ) from exc
    if resp.status_code >= 400:
        try:
            payload = resp.json()
            category = payload["category"]
            error_type = payload["error_type"]
            message = payload["message"]
        except (ValueError, KeyError):
            raise _RemoteError(
                "internal",
                "HTTPError",
                f"{url} returned status {resp.status_code}: {resp.text[:500]}",
            ) from None
        raise _RemoteError(category, error_type, message)
    return response_type.model_validate(resp.json())


# -- subcommands ---------------------------------------------------------------


def _cmd_describe(args) -> int:
    req = sm.DescribeRequest(
        csv=_read_text(args.data),
        schema_doc=_read_json_doc(args.schema),
        delimiter=args.delimiter,
        missing_token=args.missing_token,
        correlation_columns=_split_names(args.correlation_columns),
    )
    resp = _call(
        args.server, "describe", req, sm.DescribeResponse,
        lambda: h.handle_describe(req),
    )
    print(f"rows: {resp.n_rows}")
    if resp.summary:
        print(resp.summary)
    if resp.correlation:
        print()
        print(resp.correlation)
    elif resp.correlation_note:
        print()
        print(resp.correlation_note)
    _write_manifest(args, "describe", None, [args.data, args.schema], [])
    return 0


def _cmd_fit(args) -> int:
    req = sm.FitRequest(
        csv=_read_text(args.data),
        schema_doc=_read_json_doc(args.schema),
        dag_doc=_read_json_doc(args.dag),
        pseudo_count=args.pseudo_count,
        delimiter=args.delimiter,
        missing_token=args.missing_token,
    )
    resp = _call(args.server, "fit", req, sm.FitResponse, lambda: h.handle_fit(req))
    _write_text(args.out, json.dumps(resp.model_doc, indent=2) + "\n")
    outputs = [args.out]
    if args.report:
        _write_text(args.report, _ensure_newline(resp.report))
        outputs.append(args.report)
    print(resp.report)
    _write_manifest(args, "fit", None, [args.data, args.schema, args.dag], outputs)
    return 0


def _cmd_learn(args) -> int:
    seed = _resolve_seed(args)
    inputs = [args.data, args.schema]
    whitelist: list[list[str]] = []
    blacklist: list[list[str]] = []
    if args.whitelist:
        whitelist = _read_edge_list(args.whitelist)
        inputs.append(args.whitelist)
    if args.blacklist:
        blacklist = _read_edge_list(args.blacklist)
        inputs.append(args.blacklist)
    settings = sm.LearnSettings(
        max_iterations=args.max_iterations,
        restarts=args.restarts,
        perturbation_size=args.perturbation_size,
        seed=seed,
        whitelist=whitelist,
        blacklist=blacklist,
    )
    req = sm.LearnRequest(
        csv=_read_text(args.data),
        schema_doc=_read_json_doc(args.schema),
        settings=settings,
        delimiter=args.delimiter,
        missing_token=args.missing_token,
    )
    resp = _call(args.server, "learn", req, sm.LearnResponse, lambda: h.handle_learn(req))
    _write_text(args.out, json.dumps(resp.dag_doc, indent=2) + "\n")
    outputs = [args.out]
    if args.trace:
        trace_doc = {
            "format": "clgnet-trace",
            "score": resp.score,
            "steps": [step.model_dump(by_alias=True) for step in resp.trace],
        }
        _write_text(args.trace, json.dumps(trace_doc, indent=2) + "\n")
        outputs.append(args.trace)
    if args.dot:
        _write_text(args.dot, _ensure_newline(resp.dot))
        outputs.append(args.dot)
    n_edges = len(resp.dag_doc.get("edges", []))
    print(f"learned {n_edges} edges in {len(resp.trace)} moves, score {resp.score:.6f}")
    _write_manifest(args, "learn", seed, inputs, outputs)
    return 0


def _cmd_query(args) -> int:
    seed = _resolve_seed(args)
    model_doc = _read_json_doc(args.model)
    settings = sm.QuerySettings(
        method=args.method, n_samples=args.n_samples, seed=seed
    )
    evidence = parse_evidence(args.evidence) if args.evidence else []
    if args.target is not None:
        req = sm.QueryRequest(
            model_doc=model_doc,
            target=parse_target(args.target),
            evidence=evidence,
            settings=settings,
        )
        resp = _call(
            args.server, "query", req, sm.QueryResponse,
            lambda: h.handle_query(req),
        )
    else:
        targets = _split_names(args.targets) or []
        if not targets:
            raise InvalidTargetError("empty --targets")
        req = sm.DistributionRequest(
            model_doc=model_doc,
            targets=targets,
            evidence=evidence,
            settings=settings,
        )
        resp = _call(
            args.server, "distribution", req, sm.DistributionResponse,
            lambda: h.handle_distribution(req),
        )
    print(resp.rendered)
    _write_manifest(args, "query", seed, [args.model], [])
    return 0


def _cmd_sample(args) -> int:
    seed = _resolve_seed(args)
    model_doc = _read_json_doc(args.model)
    req = sm.SampleRequest(model_doc=model_doc, n=args.n, seed=seed)
    resp = _call(
        args.server, "sample", req, sm.SampleResponse, lambda: h.handle_sample(req)
    )
    _write_text(args.out, resp.csv)
    outputs = [args.out]
    if args.schema_out:
        _write_text(args.schema_out, json.dumps(resp.schema_doc, indent=2) + "\n")
        outputs.append(args.schema_out)
    print(f"wrote {resp.n_rows} rows to {args.out}")
    _write_manifest(args, "sample", seed, [args.model], outputs)
    return 0


def _cmd_export_dot(args) -> int:
    if args.model:
        req = sm.DotRequest(model_doc=_read_json_doc(args.model))
        inputs = [args.model]
    else:
        req = sm.DotRequest(dag_doc=_read_json_doc(args.dag))
        inputs = [args.dag]
    resp = _call(
        args.server, "export-dot", req, sm.DotResponse,
        lambda: h.handle_export_dot(req),
    )
    dot = _ensure_newline(resp.dot)
    outputs = []
    if args.out:
        _write_text(args.out, dot)
        print(f"wrote {args.out}")
        outputs.append(args.out)
    else:
        sys.stdout.write(dot)
    _write_manifest(args, "export-dot", None, inputs, outputs)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


# -- parser --------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clgnet",
        description="Conditional linear Gaussian network toolkit.",
    )
    parser.add_argument(
        "--version", action="version", version=f"clgnet {__version__}"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--server",
        metavar="URL",
        help="send the operation to a running clgnet service instead of "
        "computing locally",
    )
    common.add_argument(
        "--manifest",
        metavar="PATH",
        help="run manifest path (default clgnet-<subcommand>.manifest.json)",
    )
    common.add_argument(
        "--no-manifest", action="store_true", help="skip writing the run manifest"
    )

    csvopts = argparse.ArgumentParser(add_help=False)
    csvopts.add_argument("--delimiter", default=",", help="CSV delimiter")
    csvopts.add_argument(
        "--missing-token", default="", help="cell text treated as missing"
    )

    p = sub.add_parser(
        "describe",
        parents=[common, csvopts],
        help="summary statistics and correlation table for a CSV dataset",
    )
    p.add_argument("--data", required=True, help="CSV file")
    p.add_argument("--schema", required=True, help="column schema JSON file")
    p.add_argument(
        "--correlation-columns",
        metavar="NAMES",
        help="comma-separated continuous columns for the correlation table "
        "(default: all continuous columns)",
    )
    p.set_defaults(func=_cmd_describe)

    p = sub.add_parser(
        "fit",
        parents=[common, csvopts],
        help="fit parameters for a fixed structure by maximum likelihood",
    )
    p.add_argument("--data", required=True, help="CSV file")
    p.add_argument("--schema", required=True, help="column schema JSON file")
    p.add_argument("--dag", required=True, help="structure JSON file")
    p.add_argument("--out", required=True, help="output model JSON file")
    p.add_argument("--report", help="also write the fit report to this file")
    p.add_argument(
        "--pseudo-count",
        type=float,
        default=0.0,
        help="additive smoothing for discrete counts (default 0)",
    )
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser(
        "learn",
        parents=[common, csvopts],
        help="hill-climbing structure search maximizing the BIC score",
    )
    p.add_argument("--data", required=True, help="CSV file")
    p.add_argument("--schema", required=True, help="column schema JSON file")
    p.add_argument("--out", required=True, help="output structure JSON file")
    p.add_argument("--trace", help="write the accepted moves to this JSON file")
    p.add_argument("--dot", help="write the learned structure as DOT to this file")
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--perturbation-size", type=int, default=2)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--whitelist", help="JSON list of [from, to] edges forced into the graph"
    )
    p.add_argument(
        "--blacklist", help="JSON list of [from, to] edges kept out of the graph"
    )
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser(
        "query",
        parents=[common],
        help="conditional probability of discrete targets given evidence",
    )
    p.add_argument("--model", required=True, help="model JSON file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--target",
        help='joint target assignment, e.g. "ML=1" or "ML=1,AF=0"',
    )
    group.add_argument(
        "--targets",
        help='target nodes for a full joint table, e.g. "ML,AF"',
    )
    p.add_argument(
        "--evidence",
        default="",
        help='comma-separated terms: name=value, name>value, name<value, '
        'name in [lo,hi]',
    )
    p.add_argument(
        "--method",
        default="auto",
        help="auto, exact, rejection, or likelihood-weighting",
    )
    p.add_argument("--n-samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser(
        "sample",
        parents=[common],
        help="forward-sample a dataset from a model",
    )
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--out", required=True, help="output CSV file")
    p.add_argument(
        "--schema-out", help="also write the sampled columns' schema JSON here"
    )
    p.add_argument(
        "--n",
        type=int,
        default=DEFAULT_SAMPLE_ROWS,
        help=f"number of rows (default {DEFAULT_SAMPLE_ROWS})",
    )
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser(
        "export-dot",
        parents=[common],
        help="render a model or structure file as Graphviz DOT",
    )
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", help="model JSON file")
    group.add_argument("--dag", help="structure JSON file")
    p.add_argument("--out", help="output DOT file (default: stdout)")
    p.set_defaults(func=_cmd_export_dot)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    args._argv = list(argv) if argv is not None else sys.argv[1:]
    try:
        return args.func(args)
    except _RemoteError as exc:
        print(f"error [{exc.category}/{exc.error_type}] {exc.message}", file=sys.stderr)
        return _EXIT_BY_CATEGORY.get(exc.category, 1)
    except ClgnetError as exc:
        category = error_category(exc)
        print(f"error [{category}/{type(exc).__name__}] {exc}", file=sys.stderr)
        return _EXIT_BY_CATEGORY.get(category, 1)


if __name__ == "__main__":
    sys.exit(main())
