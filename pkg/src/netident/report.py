"""Report documents: canonical JSON serialization and annotated DOT export.

The document echoes the analyzed graph, carries the verdicts and
per-sample diagnostics, and embeds every tolerance so results are
auditable. Serialization is canonical: fixed field order, floats with 17
significant digits, so identical analyses produce byte-identical output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from ._version import __version__
from .engine import IdentifiabilityReport
from .topology import NetworkTopology, SelectionSets, graph_dict, parse_graph

SCHEMA_VERSION = "1"
TOOL_NAME = "netident"

# dashed style plus this color marks edges that cannot be recovered
_UNIDENTIFIABLE_COLOR = "crimson"
_EXCITED_FILL = "lightblue"


class ReportError(ValueError):
    """Raised for unserializable values or malformed report documents."""


@dataclass(frozen=True)
class ReportSample:
    """Plain-number snapshot of one sample's diagnostics."""

    rank: int
    kernel_dim: int
    cond: float
    singular_values: tuple[float, ...]


@dataclass(frozen=True)
class ReportDocument:
    """Self-contained analysis record that round-trips through JSON.

    ``edges`` holds one verdict per topology edge, in canonical edge
    order. ``timing`` is wall-clock seconds or None; it stays None by
    default so equal inputs serialize to equal bytes. ``verification``
    holds the oracle cross-check summary when one was run.
    """

    topology: NetworkTopology
    sets: SelectionSets
    network: bool
    edges: tuple[bool, ...]
    samples: tuple[ReportSample, ...]
    params: dict = field(default_factory=dict)
    tool_version: str = __version__
    timing: Optional[float] = None
    verification: Optional[dict] = None


def build_document(
    topo: NetworkTopology,
    sets: SelectionSets,
    result: IdentifiabilityReport,
    *,
    timing: Optional[float] = None,
    verification: Optional[dict] = None,
) -> ReportDocument:
    """Wrap an analysis result into a serializable document."""
    samples = tuple(
        ReportSample(
            rank=int(s.rank),
            kernel_dim=int(s.kernel_dim),
            cond=float(s.cond),
            singular_values=tuple(float(v) for v in s.singular_values),
        )
        for s in result.samples
    )
    return ReportDocument(
        topology=topo,
        sets=sets,
        network=bool(result.network),
        edges=tuple(bool(v) for v in result.edges),
        samples=samples,
        params=dict(result.params),
        timing=timing,
        verification=verification,
    )


def _format_float(value: float) -> str:
    """17-significant-digit decimal form that parses back to the same double.

    Infinities become +/-1e400, which overflows back to inf on parse in
    both Python and JavaScript while staying valid JSON. NaN has no such
    representation and is rejected.
    """
    if math.isnan(value):
        raise ReportError("cannot serialize NaN")
    if math.isinf(value):
        return "1e400" if value > 0 else "-1e400"
    text = format(value, ".17g")
    if not any(ch in text for ch in ".eE"):
        text += ".0"
    return text


def _emit(value, pieces: list, indent: int) -> None:
    pad = " " * indent
    inner = " " * (indent + 2)
    if value is None:
        pieces.append("null")
    elif isinstance(value, (bool, np.bool_)):
        pieces.append("true" if value else "false")
    elif isinstance(value, (int, np.integer)):
        pieces.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        pieces.append(_format_float(float(value)))
    elif isinstance(value, str):
        pieces.append(json.dumps(value))
    elif isinstance(value, Mapping):
        if not value:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for idx, (key, item) in enumerate(value.items()):
            if not isinstance(key, str):
                raise ReportError(f"object keys must be strings, got {key!r}")
            pieces.append(f"{inner}{json.dumps(key)}: ")
            _emit(item, pieces, indent + 2)
            pieces.append(",\n" if idx < len(value) - 1 else "\n")
        pieces.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        if not len(value):
            pieces.append("[]")
            return
        pieces.append("[\n")
        for idx, item in enumerate(value):
            pieces.append(inner)
            _emit(item, pieces, indent + 2)
            pieces.append(",\n" if idx < len(value) - 1 else "\n")
        pieces.append(pad + "]")
    else:
        raise ReportError(f"cannot serialize {type(value).__name__} value {value!r}")


def dumps_canonical(value) -> bytes:
    """Deterministic JSON bytes: insertion-ordered keys, 2-space indent,
    floats at 17 significant digits, trailing newline."""
    pieces: list = []
    _emit(value, pieces, 0)
    pieces.append("\n")
    return "".join(pieces).encode("utf-8")


def document_dict(doc: ReportDocument) -> dict:
    """Canonically ordered JSON-ready dict for a document."""
    timing = None if doc.timing is None else {"analyze_seconds": float(doc.timing)}
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": TOOL_NAME, "version": doc.tool_version},
        "input": graph_dict(doc.topology, doc.sets),
        "params": dict(doc.params),
        "network": doc.network,
        "edges": list(doc.edges),
        "samples": [
            {
                "rank": s.rank,
                "kernel_dim": s.kernel_dim,
                "cond": s.cond,
                "singular_values": list(s.singular_values),
            }
            for s in doc.samples
        ],
        "timing": timing,
        "verification": doc.verification,
    }


def export_json(doc: ReportDocument) -> bytes:
    return dumps_canonical(document_dict(doc))


def _require(data: Mapping, key: str, kind, label: str):
    if key not in data:
        raise ReportError(f"report missing field {key!r}")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise ReportError(f"report field {key!r} must be {label}")
    return value


def parse_document(src: Union[bytes, str, Mapping]) -> ReportDocument:
    """Parse canonical report JSON back into a ReportDocument.

    Inverse of export_json: parse_document(export_json(doc)) == doc.
    """
    if isinstance(src, (bytes, str)):
        try:
            data = json.loads(src)
        except json.JSONDecodeError as err:
            raise ReportError(f"invalid report JSON: {err}") from err
    else:
        data = src
    if not isinstance(data, Mapping):
        raise ReportError("report document must be a JSON object")
    version = _require(data, "schema_version", str, "a string")
    if version != SCHEMA_VERSION:
        raise ReportError(f"unsupported schema version {version!r}")
    tool = _require(data, "tool", Mapping, "an object")
    topo, sets = parse_graph(_require(data, "input", Mapping, "an object"))
    params = dict(_require(data, "params", Mapping, "an object"))
    network = _require(data, "network", bool, "a boolean")
    edges_raw = _require(data, "edges", Sequence, "a list")
    if len(edges_raw) != topo.n_edges or not all(isinstance(v, bool) for v in edges_raw):
        raise ReportError("edge verdicts must be one boolean per topology edge")
    samples = []
    for entry in _require(data, "samples", Sequence, "a list"):
        if not isinstance(entry, Mapping):
            raise ReportError("each sample record must be an object")
        samples.append(
            ReportSample(
                rank=int(entry["rank"]),
                kernel_dim=int(entry["kernel_dim"]),
                cond=float(entry["cond"]),
                singular_values=tuple(float(v) for v in entry["singular_values"]),
            )
        )
    timing_raw = data.get("timing")
    if timing_raw is None:
        timing = None
    elif isinstance(timing_raw, Mapping) and "analyze_seconds" in timing_raw:
        timing = float(timing_raw["analyze_seconds"])
    else:
        raise ReportError("timing must be null or {\"analyze_seconds\": seconds}")
    verification = data.get("verification")
    if verification is not None and not isinstance(verification, Mapping):
        raise ReportError("verification must be null or an object")
    return ReportDocument(
        topology=topo,
        sets=sets,
        network=bool(network),
        edges=tuple(bool(v) for v in edges_raw),
        samples=tuple(samples),
        params=params,
        tool_version=str(tool.get("version", "")),
        timing=timing,
        verification=None if verification is None else dict(verification),
    )


def export_dot(doc: ReportDocument) -> str:
    """Annotated DOT rendering of the verdicts.

    Edges that are recoverable draw solid; the rest draw dashed in a
    distinct color. Excited nodes are filled, measured nodes get a double
    border, and labels carry [E]/[M]/[EM] so the markers survive
    monochrome rendering. Output order is nodes ascending then edges in
    canonical order, so equal documents give identical text.
    """
    excited = set(doc.sets.excited)
    measured = set(doc.sets.measured)
    lines = [
        "digraph network {",
        "  rankdir=LR;",
        "  node [shape=circle];",
    ]
    for v in range(1, doc.topology.n + 1):
        marks = ("E" if v in excited else "") + ("M" if v in measured else "")
        attrs = [f'label="{v}{f" [{marks}]" if marks else ""}"']
        if v in excited:
            attrs.append("style=filled")
            attrs.append(f'fillcolor="{_EXCITED_FILL}"')
        if v in measured:
            attrs.append("peripheries=2")
        lines.append(f"  {v} [{', '.join(attrs)}];")
    for (j, i), ok in zip(doc.topology.edges, doc.edges):
        if ok:
            lines.append(f"  {j} -> {i} [style=solid];")
        else:
            lines.append(
                f'  {j} -> {i} [style=dashed, color="{_UNIDENTIFIABLE_COLOR}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
