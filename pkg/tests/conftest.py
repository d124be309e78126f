import itertools

import numpy as np
import pytest

from heatrecovery import bounds, graph, heat


def random_connected_graph(rng, n_min=2, n_max=40, weight_range=(0.5, 2.0)):
    """Sparse-ish random connected graph: random spanning tree plus extra edges."""
    n = int(rng.integers(n_min, n_max + 1))
    order = rng.permutation(n)
    edges = {}
    for i in range(1, n):
        u, v = int(order[i]), int(order[rng.integers(i)])
        edges[(min(u, v), max(u, v))] = rng.uniform(*weight_range)
    p = min(1.0, 2.0 / n)
    for u, v in itertools.combinations(range(n), 2):
        if (u, v) not in edges and rng.random() < p:
            edges[(u, v)] = rng.uniform(*weight_range)
    return graph.build_graph(n, [(u, v, w) for (u, v), w in edges.items()])


class Instance:
    def __init__(self, g):
        self.graph = g
        self.metric = graph.compatible_metric(g)
        self.L = graph.laplacian(g)
        self.spectral = heat.decompose(self.L)
        self.constants = bounds.graph_constants(self.spectral, self.metric)

    def profile(self, support):
        return bounds.support_profile(self.metric, support)

    def kernel(self, t):
        return heat.heat_operator(self.spectral, t)


@pytest.fixture
def k2():
    return Instance(graph.build_graph(2, [(0, 1, 1.0)]))


@pytest.fixture
def p3():
    return Instance(graph.build_graph(3, [(0, 1, 1.0), (1, 2, 1.0)]))


@pytest.fixture
def make_instance():
    return Instance


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
