"""scikit-learn style front end.

:class:`HeatSpikeRecovery` is fitted to a graph; ``transform`` maps
smoothed, noisy observations (one per row) to recovered sparse signals
and ``inverse_transform`` applies the heat operator::

    est = HeatSpikeRecovery(graph, t=0.01, eps=0.05).fit()
    G_hat = est.transform(F)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import bounds, certificate, heat, recovery
from .exceptions import DimensionMismatch, NegativeTime
from .graph import CompatibleMetric, WeightedGraph, build_graph, compatible_metric, laplacian, metric_from_matrix


def check_graph(graph) -> WeightedGraph:
    """Accept a :class:`WeightedGraph` or an ``(n_vertices, edges)`` pair."""
    if isinstance(graph, WeightedGraph):
        return graph
    if isinstance(graph, tuple) and len(graph) == 2:
        return build_graph(*graph)
    raise TypeError(f"expected a WeightedGraph or (n_vertices, edges), got {type(graph).__name__}")


def check_time(t) -> float:
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise NegativeTime(f"time must be a finite nonnegative number, got {t}")
    return t


class HeatSpikeRecovery(TransformerMixin, BaseEstimator):
    """Recover sparse vertex signals from heat-diffused observations.

    Parameters
    ----------
    graph : WeightedGraph or (n_vertices, edges)
        Connected edge-weighted graph.
    t : float, default=0.01
        Diffusion time of the observations.
    eps : float, default=0.0
        Bound on the l2 norm of the observation noise; 0 enforces exact
        consistency with the data.
    metric : array-like of shape (n_vertices, n_vertices), optional
        Compatible distance to use instead of the constructed one.
    gap_tol, max_iter, relaxation : solver settings.

    Attributes
    ----------
    spectral_ : SpectralData
    heat_ : HeatOperator
    metric_ : CompatibleMetric
    constants_ : GraphConstants
    results_ : list of RecoveryResult
        Solver diagnostics from the last ``transform`` call.
    """

    def __init__(
        self,
        graph=None,
        t=0.01,
        eps=0.0,
        metric=None,
        gap_tol=1e-8,
        max_iter=50_000,
        relaxation=1.8,
    ):
        self.graph = graph
        self.t = t
        self.eps = eps
        self.metric = metric
        self.gap_tol = gap_tol
        self.max_iter = max_iter
        self.relaxation = relaxation

    def fit(self, X=None, y=None):
        graph = check_graph(self.graph)
        t = check_time(self.t)
        if self.eps < 0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")
        if X is not None:
            X = check_array(X)
            if X.shape[1] != graph.n_vertices:
                raise DimensionMismatch(f"X has {X.shape[1]} columns, graph has {graph.n_vertices} vertices")
        if self.metric is None:
            self.metric_ = compatible_metric(graph)
        elif isinstance(self.metric, CompatibleMetric):
            self.metric_ = metric_from_matrix(graph, self.metric.dist)
        else:
            self.metric_ = metric_from_matrix(graph, self.metric)
        self.graph_ = graph
        self.spectral_ = heat.decompose(laplacian(graph))
        self.heat_ = heat.heat_operator(self.spectral_, t)
        self.constants_ = bounds.graph_constants(self.spectral_, self.metric_) if graph.n_vertices > 1 else None
        self.n_features_in_ = graph.n_vertices
        return self

    def _options(self) -> recovery.SolverOptions:
        return recovery.SolverOptions(gap_tol=self.gap_tol, max_iter=self.max_iter, relaxation=self.relaxation)

    def transform(self, X):
        """Solve the l1 program for each row of ``X``."""
        check_is_fitted(self)
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        opts = self._options()
        self.results_ = [
            recovery.solve(self.heat_, recovery.Observation(row, self.heat_.t, self.eps), opts)
            for row in X
        ]
        return np.vstack([r.g_hat for r in self.results_])

    def inverse_transform(self, X):
        """Diffuse each row of ``X`` for time ``t``."""
        check_is_fitted(self)
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return X @ self.heat_.kernel

    def profile(self, support) -> bounds.SupportProfile:
        check_is_fitted(self)
        return bounds.support_profile(self.metric_, support)

    def feasibility(self, support) -> bounds.FeasibilityReport:
        """Sufficient-condition report for ``support`` at the fitted time."""
        return bounds.check_certificate_condition(self.constants_, self.profile(support), self.heat_.t)

    def max_time(self, support) -> float:
        return bounds.max_admissible_time(self.constants_, self.profile(support))

    def certificate(self, support, signs):
        """Construct and verify the dual certificate at the fitted time."""
        check_is_fitted(self)
        cert = certificate.construct(self.heat_, support, signs)
        return cert, certificate.verify(cert)
