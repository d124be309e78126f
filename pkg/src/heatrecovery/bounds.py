"""Closed-form heat kernel bounds and the sufficient recovery conditions.

All conditions are evaluated with strict inequalities and no numerical
slack. For a single-vertex support the separation ``D`` is ``inf`` and
every separation-dependent term is 0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .exceptions import ConditionViolated, NegativeTime, NonPositiveDistance, NonPositiveTime
from .graph import CompatibleMetric, min_separation, min_vertex_distance
from .heat import SpectralData, check_support, operator_norm, spectral_gap

BISECTION_RTOL = 1e-9
MIN_TIME = 1e-15

FEASIBILITY_FIELDS = (
    "t",
    "cond1_lhs",
    "cond1_rhs",
    "cond2_lhs",
    "cond2_rhs",
    "cond1_ok",
    "cond2_ok",
    "inverse_norm_bound",
)


@dataclass(frozen=True)
class GraphConstants:
    """Vertex count, ``||L||``, spectral gap and smallest vertex distance."""

    n: int
    op_norm: float
    gap: float
    zeta: float


@dataclass(frozen=True)
class SupportProfile:
    """Support size ``j`` and minimum pairwise separation ``d_min``."""

    j: int
    d_min: float

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("support size must be at least 1")
        if not self.d_min > 0:
            raise ValueError("support separation must be positive")


@dataclass(frozen=True)
class FeasibilityReport:
    t: float
    cond1_lhs: float
    cond1_rhs: float
    cond2_lhs: float
    cond2_rhs: float
    cond1_ok: bool
    cond2_ok: bool
    inverse_norm_bound: float | None

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> list:
        return [getattr(self, name) for name in FEASIBILITY_FIELDS]


def graph_constants(spectral: SpectralData, metric: CompatibleMetric) -> GraphConstants:
    return GraphConstants(
        n=spectral.n,
        op_norm=operator_norm(spectral),
        gap=spectral_gap(spectral),
        zeta=min_vertex_distance(metric),
    )


def support_profile(metric: CompatibleMetric, support: Sequence[int]) -> SupportProfile:
    support = check_support(support, metric.dist.shape[0])
    return SupportProfile(len(support), min_separation(metric, support))


def diagonal_bounds(c: GraphConstants, t: float) -> tuple[float, float]:
    """Lower and upper bounds on every diagonal heat kernel entry."""
    if t < 0:
        raise NegativeTime(f"time must be nonnegative, got {t}")
    frac = (c.n - 1) / c.n
    lower = 1.0 / c.n + math.exp(-t * c.op_norm) * frac
    upper = 1.0 / c.n + math.exp(-t * c.gap) * frac
    return lower, upper


def folz_bound(dist: float, t: float, with_flag: bool = False):
    """Off-diagonal heat kernel bound ``(2 e t / dist) ** (dist / 2)``.

    Values above 1 carry no information; with ``with_flag=True`` a
    ``(value, vacuous)`` pair is returned so callers can tell.
    """
    if not dist > 0:
        raise NonPositiveDistance(f"distance must be positive, got {dist}")
    if not t > 0:
        raise NonPositiveTime(f"time must be positive, got {t}")
    value = math.exp(-0.5 * dist * math.log(dist / (2 * math.e * t)))
    if with_flag:
        return value, value > 1.0
    return value


def _decay(t: float, dist: float, scale: float) -> float:
    """``(scale e t / dist) ** (dist / scale)``; 0 when ``dist`` is infinite."""
    if math.isinf(dist):
        return 0.0
    return math.exp(-(dist / scale) * math.log(dist / (scale * math.e * t)))


def _cond1_terms(c: GraphConstants, p: SupportProfile, t: float) -> tuple[float, float]:
    lhs = (p.j - 1) * _decay(t, p.d_min, 2.0) if p.j > 1 else 0.0
    rhs = diagonal_bounds(c, t)[0]
    return lhs, rhs


def check_invertibility(c: GraphConstants, p: SupportProfile, t: float) -> tuple[bool, float]:
    """Sufficient condition for invertibility of the restricted kernel.

    Returns ``(ok, margin)`` with ``margin = rhs - lhs``.
    """
    if not t > 0:
        raise NonPositiveTime(f"time must be positive, got {t}")
    lhs, rhs = _cond1_terms(c, p, t)
    return lhs < rhs, rhs - lhs


def inverse_norm_bound(c: GraphConstants, p: SupportProfile, t: float) -> float:
    """Bound on both the l2 and l-infinity norms of the restricted inverse.

    At ``t == 0`` the restricted kernel is the identity and the bound is 1.
    """
    if t < 0:
        raise NegativeTime(f"time must be nonnegative, got {t}")
    if t == 0:
        return 1.0
    ok, margin = check_invertibility(c, p, t)
    if not ok:
        raise ConditionViolated(f"invertibility condition fails at t={t} (margin {margin:.3g})")
    return 1.0 / margin


def check_certificate_condition(c: GraphConstants, p: SupportProfile, t: float) -> FeasibilityReport:
    """Evaluate both sufficient conditions for certificate existence at ``t``."""
    if not t > 0:
        raise NonPositiveTime(f"time must be positive, got {t}")
    lhs1, rhs1 = _cond1_terms(c, p, t)
    near = _decay(t, c.zeta, 2.0)
    far = (p.j - 1) * _decay(t, p.d_min, 4.0) if p.j > 1 else 0.0
    lhs2 = near + far
    rhs2 = rhs1 - lhs1
    ok1 = lhs1 < rhs1
    return FeasibilityReport(
        t=float(t),
        cond1_lhs=lhs1,
        cond1_rhs=rhs1,
        cond2_lhs=lhs2,
        cond2_rhs=rhs2,
        cond1_ok=bool(ok1),
        cond2_ok=bool(lhs2 < rhs2),
        inverse_norm_bound=1.0 / rhs2 if ok1 else None,
    )


def _feasible(c: GraphConstants, p: SupportProfile, t: float) -> bool:
    r = check_certificate_condition(c, p, t)
    return r.cond1_ok and r.cond2_ok


def max_admissible_time(c: GraphConstants, p: SupportProfile) -> float:
    """Largest time at which both certificate conditions hold.

    Both left-hand sides increase and both right-hand sides decrease in
    ``t``, so the feasible set is an interval starting at 0 and its right
    end is located by bisection. Nothing is feasible beyond
    ``min(D, zeta) / (2e)`` because there a Folz term reaches 1. Returns 0
    if no time above 1e-15 is feasible.
    """
    cap = min(p.d_min, c.zeta) / (2 * math.e)
    if _feasible(c, p, cap):
        return cap
    lo, hi = MIN_TIME, cap
    if not _feasible(c, p, lo):
        return 0.0
    while hi - lo > BISECTION_RTOL * lo:
        mid = 0.5 * (lo + hi)
        if _feasible(c, p, mid):
            lo = mid
        else:
            hi = mid
    return lo


def gershgorin_lower_bound(matrix: np.ndarray) -> float:
    """Row-wise Gershgorin lower bound on the smallest eigenvalue.

    Diagnostic only; feasibility decisions use the closed forms above.
    """
    A = np.asarray(matrix, dtype=float)
    off = np.abs(A).sum(axis=1) - np.abs(np.diag(A))
    return float(np.min(np.diag(A) - off))
