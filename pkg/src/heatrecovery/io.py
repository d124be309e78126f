"""Graph file format and CSV helpers.

Graph files are line oriented::

    graph <N>
    <u> <v> <b>
    ...
    metric              # optional
    <N rows of N distances>

Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .exceptions import GraphError, GraphFileError, IndexOutOfRange
from .graph import CompatibleMetric, WeightedGraph, build_graph, metric_from_matrix


def parse_graph(text: str) -> tuple[WeightedGraph, CompatibleMetric | None]:
    """Parse graph file contents; returns the graph and an optional metric."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append((lineno, content.split()))
    if not lines:
        raise GraphFileError("empty graph file")

    lineno, head = lines[0]
    if len(head) != 2 or head[0] != "graph":
        raise GraphFileError("expected header 'graph <N>'", lineno)
    n = _parse_int(head[1], lineno)
    if n < 1:
        raise GraphFileError(f"vertex count must be positive, got {n}", lineno)

    edges = []
    rows = []
    in_metric = False
    metric_line = None
    for lineno, tokens in lines[1:]:
        if tokens == ["metric"]:
            if in_metric:
                raise GraphFileError("duplicate 'metric' section", lineno)
            in_metric, metric_line = True, lineno
            continue
        if in_metric:
            if len(tokens) != n:
                raise GraphFileError(f"metric row needs {n} values, got {len(tokens)}", lineno)
            rows.append([_parse_float(tok, lineno) for tok in tokens])
            continue
        if len(tokens) != 3:
            raise GraphFileError("edge line must be '<u> <v> <b>'", lineno)
        u, v = _parse_int(tokens[0], lineno), _parse_int(tokens[1], lineno)
        w = _parse_float(tokens[2], lineno)
        edges.append((lineno, (u, v, w)))

    try:
        graph = build_graph(n, [e for _, e in edges])
    except (GraphError, IndexOutOfRange) as exc:
        lineno = _blame_edge(n, edges)
        raise GraphFileError(str(exc), lineno) from exc

    metric = None
    if in_metric:
        if len(rows) != n:
            raise GraphFileError(f"metric section has {len(rows)} rows, expected {n}", metric_line)
        try:
            metric = metric_from_matrix(graph, np.array(rows))
        except GraphError as exc:
            raise GraphFileError(str(exc), metric_line) from exc
    return graph, metric


def _blame_edge(n, edges):
    """Line number of the first edge that makes the edge list invalid, if any."""
    seen = set()
    for lineno, (u, v, w) in edges:
        key = (min(u, v), max(u, v))
        if not (0 <= u < n and 0 <= v < n) or u == v or not w > 0 or key in seen:
            return lineno
        seen.add(key)
    return None


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphFileError(f"expected an integer, got {tok!r}", lineno) from None


def _parse_float(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise GraphFileError(f"expected a number, got {tok!r}", lineno) from None


def read_graph(path) -> tuple[WeightedGraph, CompatibleMetric | None]:
    return parse_graph(Path(path).read_text())


def format_graph(graph: WeightedGraph, metric: CompatibleMetric | None = None) -> str:
    out = [f"graph {graph.n_vertices}"]
    out += [f"{u} {v} {w!r}" for u, v, w in graph.edges]
    if metric is not None:
        out.append("metric")
        out += [" ".join(repr(float(d)) for d in row) for row in metric.dist]
    return "\n".join(out) + "\n"


def write_graph(path, graph: WeightedGraph, metric: CompatibleMetric | None = None) -> None:
    Path(path).write_text(format_graph(graph, metric))


def read_vector(path) -> np.ndarray:
    """Read a vector stored one value per line, or comma/space separated."""
    text = Path(path).read_text().replace(",", " ")
    return np.array([float(tok) for tok in text.split()])


def matrix_csv(matrix: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(matrix):
        writer.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def vertex_values_csv(values) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["vertex", "value"])
    for i, x in enumerate(values):
        writer.writerow([i, repr(float(x))])
    return buf.getvalue()
