"""Edge-weighted finite graphs, weight-compatible metrics and the Laplacian.

Vertices are dense 0-based integers. Edges are stored once per unordered
pair as ``(u, v, weight)`` with ``u < v``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .exceptions import (
    DisconnectedGraph,
    DuplicateEdge,
    GraphError,
    IndexOutOfRange,
    InvalidMetric,
    NonPositiveWeight,
    SelfLoop,
    SingletonGraph,
)

# slack for validating user-supplied distances (decimal round-off in files)
METRIC_RTOL = 1e-9
COMPATIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class WeightedGraph:
    """Connected, undirected graph with positive symmetric edge weights.

    Use :func:`build_graph` to construct one; the constructor does not
    validate.
    """

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        """Number of incident edges per vertex (unweighted)."""
        deg = np.zeros(self.n_vertices, dtype=int)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def weight_matrix(self) -> np.ndarray:
        """Dense symmetric matrix of b(x, y), zero off the edge set."""
        W = np.zeros((self.n_vertices, self.n_vertices))
        for u, v, w in self.edges:
            W[u, v] = W[v, u] = w
        return W

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


@dataclass(frozen=True)
class CompatibleMetric:
    """Geodesic distance on the vertices compatible with the edge weights.

    Attributes
    ----------
    dist : (N, N) ndarray
        All-pairs distances.
    edge_lengths : (E,) ndarray
        Length assigned to each edge, aligned with ``graph.edges``.
    """

    graph: WeightedGraph
    dist: np.ndarray = field(repr=False)
    edge_lengths: np.ndarray = field(repr=False)

    def compatibility_sums(self) -> np.ndarray:
        """Per-vertex value of sum_y b(x, y) d(x, y)^2 over neighbours y."""
        sums = np.zeros(self.graph.n_vertices)
        for u, v, w in self.graph.edges:
            c = w * self.dist[u, v] ** 2
            sums[u] += c
            sums[v] += c
        return sums


def build_graph(n_vertices: int, edges: Iterable[Sequence]) -> WeightedGraph:
    """Validate an edge list and return a :class:`WeightedGraph`.

    Parameters
    ----------
    n_vertices : int
        Number of vertices N, at least 1.
    edges : iterable of (u, v, weight)
        Undirected edges; each unordered pair may appear once.

    Raises
    ------
    SelfLoop, DuplicateEdge, NonPositiveWeight, IndexOutOfRange
        On a malformed edge.
    DisconnectedGraph
        If some vertex cannot be reached from vertex 0.
    """
    n = int(n_vertices)
    if n < 1:
        raise GraphError(f"n_vertices must be >= 1, got {n_vertices}")
    seen = set()
    normalized = []
    for edge in edges:
        u, v, w = int(edge[0]), int(edge[1]), float(edge[2])
        if not (0 <= u < n and 0 <= v < n):
            raise IndexOutOfRange(f"edge ({u}, {v}) has a vertex outside [0, {n})")
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        if not (w > 0) or not np.isfinite(w):
            raise NonPositiveWeight(f"edge ({u}, {v}) has weight {w}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"edge {key} listed more than once")
        seen.add(key)
        normalized.append((key[0], key[1], w))
    graph = WeightedGraph(n, tuple(normalized))
    _check_connected(graph)
    return graph


def _check_connected(graph: WeightedGraph) -> None:
    adj = graph.neighbors()
    visited = np.zeros(graph.n_vertices, dtype=bool)
    visited[0] = True
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if not visited[y]:
                visited[y] = True
                queue.append(y)
    if not visited.all():
        missing = np.flatnonzero(~visited)
        raise DisconnectedGraph(
            f"vertices {missing[:10].tolist()} are not reachable from vertex 0"
        )


def compatible_metric(graph: WeightedGraph) -> CompatibleMetric:
    """Construct a geodesic distance compatible with the weights.

    Each edge gets length ``(b(u, v) * max(deg u, deg v)) ** -0.5`` and the
    distance is the shortest-path closure of these lengths. Every vertex
    then satisfies ``sum_y b(x, y) d(x, y)**2 <= 1`` since each neighbour
    contributes at most ``1 / deg(x)``.
    """
    deg = graph.degrees()
    lengths = np.array(
        [1.0 / np.sqrt(w * max(deg[u], deg[v])) for u, v, w in graph.edges]
    )
    dist = _geodesic(graph, lengths)
    return CompatibleMetric(graph, dist, lengths)


def _geodesic(graph: WeightedGraph, lengths: np.ndarray) -> np.ndarray:
    n = graph.n_vertices
    if graph.n_edges == 0:
        return np.zeros((n, n))
    rows = [u for u, _, _ in graph.edges]
    cols = [v for _, v, _ in graph.edges]
    adj = csr_matrix((lengths, (rows, cols)), shape=(n, n))
    dist = shortest_path(adj, method="D", directed=False)
    # both triangles hold valid path lengths; keep the matrix exactly symmetric
    dist = np.minimum(dist, dist.T)
    np.fill_diagonal(dist, 0.0)
    return dist


def metric_from_matrix(graph: WeightedGraph, dist) -> CompatibleMetric:
    """Accept a caller-supplied distance matrix after validating it.

    The matrix must be a metric, equal to the shortest-path closure of its
    own values on the edges, and satisfy the per-vertex compatibility
    inequality.

    Raises
    ------
    InvalidMetric
        If any of the three requirements fails.
    """
    n = graph.n_vertices
    D = np.array(dist, dtype=float)
    if D.shape != (n, n):
        raise InvalidMetric(f"distance matrix must be {n}x{n}, got {D.shape}")
    if not np.all(np.isfinite(D)):
        raise InvalidMetric("distance matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(D))))
    if np.max(np.abs(D - D.T)) > METRIC_RTOL * scale:
        raise InvalidMetric("distance matrix is not symmetric")
    D = 0.5 * (D + D.T)
    if np.any(np.diag(D) != 0):
        raise InvalidMetric("distance matrix has a nonzero diagonal entry")
    off = ~np.eye(n, dtype=bool)
    if np.any(D[off] <= 0):
        raise InvalidMetric("distinct vertices must have positive distance")
    # triangle inequality: D[x, y] <= D[x, z] + D[z, y] for all z
    for z in range(n):
        excess = D - (D[:, [z]] + D[[z], :])
        if np.max(excess) > METRIC_RTOL * scale:
            raise InvalidMetric(f"triangle inequality fails through vertex {z}")
    lengths = np.array([D[u, v] for u, v, _ in graph.edges])
    closure = _geodesic(graph, lengths)
    if np.max(np.abs(closure - D)) > METRIC_RTOL * scale:
        raise InvalidMetric("distance is not the shortest-path closure of edge lengths")
    metric = CompatibleMetric(graph, D, lengths)
    sums = metric.compatibility_sums()
    worst = int(np.argmax(sums)) if n else 0
    if n and sums[worst] > 1 + COMPATIBILITY_SLACK:
        raise InvalidMetric(
            f"vertex {worst}: sum of b*d^2 over neighbours is {sums[worst]:.6g} > 1"
        )
    return metric


def laplacian(graph: WeightedGraph) -> np.ndarray:
    """Dense graph Laplacian (negative semidefinite convention).

    Off-diagonal entries are ``b(x, y)`` on edges, the diagonal is minus the
    weighted degree, so ``<L f, f> = -1/2 sum_{x,y} b(x,y) |f(x) - f(y)|^2``.
    """
    W = graph.weight_matrix()
    return W - np.diag(W.sum(axis=1))


def dirichlet_form(graph: WeightedGraph, f) -> float:
    """Evaluate ``-sum_{edges} b(u, v) (f(u) - f(v))**2`` edge by edge.

    Summing over unordered edges once equals the symmetric double sum with
    its factor 1/2.
    """
    f = np.asarray(f, dtype=float)
    return -sum(w * (f[u] - f[v]) ** 2 for u, v, w in graph.edges)


def min_separation(metric: CompatibleMetric, support: Sequence[int]) -> float:
    """Minimum pairwise distance within ``support``; ``inf`` for fewer than 2."""
    support = list(support)
    if len(support) <= 1:
        return float("inf")
    return float(min(metric.dist[a, b] for a, b in combinations(support, 2)))


def min_vertex_distance(metric: CompatibleMetric) -> float:
    """Smallest distance between two distinct vertices."""
    n = metric.dist.shape[0]
    if n < 2:
        raise SingletonGraph("a single vertex has no pairwise distance")
    off = ~np.eye(n, dtype=bool)
    return float(metric.dist[off].min())
