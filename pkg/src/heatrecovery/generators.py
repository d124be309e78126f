"""Standard graph families and greedy support placement."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .exceptions import DisconnectedGraph, GenerationFailed
from .graph import CompatibleMetric, WeightedGraph, build_graph, min_separation

ER_MAX_ATTEMPTS = 100


def _weights(n_edges, weight=1.0, weight_range=None, rng=None):
    if weight_range is None:
        return [float(weight)] * n_edges
    lo, hi = weight_range
    if not 0 < lo <= hi:
        raise ValueError(f"weight range must satisfy 0 < lo <= hi, got {weight_range}")
    rng = np.random.default_rng(rng)
    return rng.uniform(lo, hi, n_edges).tolist()


def _weighted(n, pairs, weight, weight_range, seed):
    ws = _weights(len(pairs), weight, weight_range, seed)
    return build_graph(n, [(u, v, w) for (u, v), w in zip(pairs, ws)])


def path_graph(n, weight=1.0, weight_range=None, seed=None) -> WeightedGraph:
    return _weighted(n, [(i, i + 1) for i in range(n - 1)], weight, weight_range, seed)


def cycle_graph(n, weight=1.0, weight_range=None, seed=None) -> WeightedGraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    pairs = [(i, (i + 1) % n) for i in range(n)]
    return _weighted(n, pairs, weight, weight_range, seed)


def grid_graph(rows, cols, weight=1.0, weight_range=None, seed=None) -> WeightedGraph:
    pairs = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                pairs.append((i, i + 1))
            if r + 1 < rows:
                pairs.append((i, i + cols))
    return _weighted(rows * cols, pairs, weight, weight_range, seed)


def complete_graph(n, weight=1.0, weight_range=None, seed=None) -> WeightedGraph:
    return _weighted(n, list(combinations(range(n), 2)), weight, weight_range, seed)


def erdos_renyi(n, p, seed=None, weight=1.0, weight_range=None) -> WeightedGraph:
    """Connected G(n, p) sample; redraws up to 100 times until connected."""
    rng = np.random.default_rng(seed)
    all_pairs = list(combinations(range(n), 2))
    for _ in range(ER_MAX_ATTEMPTS):
        keep = rng.random(len(all_pairs)) < p
        pairs = [pr for pr, k in zip(all_pairs, keep) if k]
        try:
            return _weighted(n, pairs, weight, weight_range, rng)
        except DisconnectedGraph:
            continue
    raise GenerationFailed(
        f"no connected G({n}, {p}) sample in {ER_MAX_ATTEMPTS} attempts"
    )


GENERATORS = {
    "path": path_graph,
    "cycle": cycle_graph,
    "grid": grid_graph,
    "complete": complete_graph,
    "erdos_renyi": erdos_renyi,
}


def generate_graph(spec: dict) -> WeightedGraph:
    """Build a graph from a spec such as ``{"generator": "grid", "rows": 3, "cols": 4}``.

    Recognised keys besides ``generator``: ``n``, ``rows``, ``cols``, ``p``,
    ``seed``, ``weight`` and ``weight_range``.
    """
    spec = dict(spec)
    name = spec.pop("generator")
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    kwargs = {k: spec[k] for k in ("weight", "weight_range", "seed") if k in spec}
    try:
        if name == "grid":
            return grid_graph(spec["rows"], spec["cols"], **kwargs)
        if name == "erdos_renyi":
            return erdos_renyi(spec["n"], spec["p"], **kwargs)
        return GENERATORS[name](spec["n"], **kwargs)
    except KeyError as exc:
        raise ValueError(f"generator {name!r} needs parameter {exc.args[0]!r}") from None


def place_support(metric: CompatibleMetric, j: int, seed=None) -> tuple[list[int], float]:
    """Greedy farthest-point support of ``j`` vertices.

    A random vertex is drawn and the vertex farthest from it starts the
    set; each further vertex maximizes its distance to the vertices
    already chosen (ties go to the lowest index). Returns the support and
    its minimum separation.
    """
    n = metric.dist.shape[0]
    if not 1 <= j <= n:
        raise ValueError(f"support size must be in [1, {n}], got {j}")
    rng = np.random.default_rng(seed)
    probe = int(rng.integers(n))
    chosen = [int(np.argmax(metric.dist[probe]))]
    nearest = metric.dist[chosen[0]].copy()
    while len(chosen) < j:
        masked = nearest.copy()
        masked[chosen] = -np.inf
        nxt = int(np.argmax(masked))
        chosen.append(nxt)
        nearest = np.minimum(nearest, metric.dist[nxt])
    return chosen, min_separation(metric, chosen)
