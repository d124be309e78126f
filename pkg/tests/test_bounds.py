import math

import numpy as np
import pytest
from scipy.optimize import brentq

from heatrecovery import bounds, heat
from heatrecovery.bounds import GraphConstants, SupportProfile
from heatrecovery.exceptions import ConditionViolated, NegativeTime, NonPositiveDistance, NonPositiveTime

from conftest import Instance, random_connected_graph

E = math.e


def test_diagonal_bounds_examples(k2):
    assert bounds.diagonal_bounds(k2.constants, 0.0) == (1.0, 1.0)
    lo, hi = bounds.diagonal_bounds(k2.constants, 0.5)
    assert lo == pytest.approx((1 + math.exp(-1)) / 2)
    assert hi == pytest.approx((1 + math.exp(-1)) / 2)
    lo, hi = bounds.diagonal_bounds(k2.constants, 1e3)
    assert lo == pytest.approx(0.5) and hi == pytest.approx(0.5)
    with pytest.raises(NegativeTime):
        bounds.diagonal_bounds(k2.constants, -1)


def test_diagonal_bounds_ordered(rng):
    for _ in range(10):
        inst = Instance(random_connected_graph(rng, n_max=30))
        for t in (0.0, 0.01, 0.5, 3.0):
            lo, hi = bounds.diagonal_bounds(inst.constants, t)
            assert lo <= hi
            K = inst.kernel(t).kernel
            assert np.all(np.diag(K) >= lo - 1e-10)
            assert np.all(np.diag(K) <= hi + 1e-10)


def test_folz_examples():
    assert bounds.folz_bound(2 * E * 0.3, 0.3) == pytest.approx(1.0)
    # (2e * 0.05 / 1) ** 0.5 = sqrt(0.1 e)
    expected = math.sqrt(0.1 * E)
    assert expected == pytest.approx(0.521371, abs=1e-6)
    assert bounds.folz_bound(1.0, 0.05) == pytest.approx(expected, rel=1e-14)
    value, vacuous = bounds.folz_bound(0.1, 1.0, with_flag=True)
    assert vacuous and value > 1
    assert bounds.folz_bound(1.0, 0.05, with_flag=True) == (pytest.approx(expected), False)


def test_folz_monotone_in_time():
    ts = np.linspace(1e-4, 1.0, 50)
    vals = [bounds.folz_bound(0.7, t) for t in ts]
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("dist, t, exc", [(0.0, 0.1, NonPositiveDistance), (1.0, 0.0, NonPositiveTime)])
def test_folz_errors(dist, t, exc):
    with pytest.raises(exc):
        bounds.folz_bound(dist, t)


def test_invertibility_single_vertex(k2):
    p = SupportProfile(1, math.inf)
    for t in (1e-3, 1.0, 100.0):
        ok, margin = bounds.check_invertibility(k2.constants, p, t)
        assert ok
        assert margin == pytest.approx(bounds.diagonal_bounds(k2.constants, t)[0])


def test_invertibility_small_time(p3):
    ok, margin = bounds.check_invertibility(p3.constants, p3.profile([0, 2]), 1e-12)
    assert ok and margin == pytest.approx(1.0, abs=1e-6)


def test_invertibility_k2_plugin(k2):
    # J=2, D=1, N=2, ||L||=2 at t=0.01
    lhs = (2 * E * 0.01) ** 0.5
    rhs = 0.5 + 0.5 * math.exp(-0.02)
    ok, margin = bounds.check_invertibility(k2.constants, k2.profile([0, 1]), 0.01)
    assert ok
    assert margin == pytest.approx(rhs - lhs, rel=1e-13)
    bound = bounds.inverse_norm_bound(k2.constants, k2.profile([0, 1]), 0.01)
    assert bound == pytest.approx(1 / (rhs - lhs))
    inv = heat.invert_restricted(heat.restrict(k2.kernel(0.01), [0, 1]))
    assert inv.norm_2 <= bound and inv.norm_inf <= bound


def test_inverse_norm_bound_time_zero(k2):
    assert bounds.inverse_norm_bound(k2.constants, SupportProfile(1, math.inf), 0.0) == 1.0
    assert bounds.inverse_norm_bound(k2.constants, k2.profile([0, 1]), 0.0) == 1.0


def test_inverse_norm_bound_violation(k2):
    with pytest.raises(ConditionViolated):
        bounds.inverse_norm_bound(k2.constants, k2.profile([0, 1]), 0.5)


def test_certificate_condition_p3_plugin(p3):
    t, N, J, D, zeta, op = 0.001, 3, 2, math.sqrt(2), 1 / math.sqrt(2), 3.0
    lhs1 = (J - 1) * math.pow(2 * E * t / D, D / 2)
    rhs1 = 1 / N + math.exp(-t * op) * (N - 1) / N
    lhs2 = math.pow(2 * E * t / zeta, zeta / 2) + math.pow(4 * E * t / D, D / 4) * (J - 1)
    rhs2 = rhs1 - lhs1
    r = bounds.check_certificate_condition(p3.constants, p3.profile([0, 2]), t)
    assert (r.cond1_lhs, r.cond1_rhs) == (pytest.approx(lhs1, rel=1e-13), pytest.approx(rhs1, rel=1e-13))
    assert (r.cond2_lhs, r.cond2_rhs) == (pytest.approx(lhs2, rel=1e-13), pytest.approx(rhs2, rel=1e-13))
    assert r.cond1_ok == (lhs1 < rhs1) and r.cond2_ok == (lhs2 < rhs2)
    assert r.inverse_norm_bound == pytest.approx(1 / rhs2)


def test_certificate_condition_single_vertex(p3):
    r = bounds.check_certificate_condition(p3.constants, SupportProfile(1, math.inf), 0.01)
    assert r.cond1_lhs == 0.0
    assert r.cond2_lhs == pytest.approx((2 * E * 0.01 / p3.constants.zeta) ** (p3.constants.zeta / 2))
    assert r.cond2_rhs == pytest.approx(bounds.diagonal_bounds(p3.constants, 0.01)[0])


def test_certificate_condition_tiny_time(p3):
    r = bounds.check_certificate_condition(p3.constants, p3.profile([0, 2]), 1e-14)
    assert r.cond1_ok and r.cond2_ok


def test_report_serialization(p3):
    r = bounds.check_certificate_condition(p3.constants, p3.profile([0, 2]), 0.001)
    d = r.to_dict()
    assert list(d) == list(bounds.FEASIBILITY_FIELDS)
    assert r.csv_row() == [d[k] for k in bounds.FEASIBILITY_FIELDS]


def test_report_without_invertibility(k2):
    r = bounds.check_certificate_condition(k2.constants, k2.profile([0, 1]), 0.5)
    assert not r.cond1_ok and r.inverse_norm_bound is None and not r.cond2_ok


def _feasible(c, p, t):
    r = bounds.check_certificate_condition(c, p, t)
    return r.cond1_ok and r.cond2_ok


def test_max_time_bisection_contract(rng):
    for _ in range(20):
        inst = Instance(random_connected_graph(rng, n_min=3, n_max=30))
        J = int(rng.integers(1, 5))
        S = rng.choice(inst.graph.n_vertices, min(J, inst.graph.n_vertices), replace=False)
        p = inst.profile(S)
        T = bounds.max_admissible_time(inst.constants, p)
        assert T > 0
        assert _feasible(inst.constants, p, T)
        assert not _feasible(inst.constants, p, 1.01 * T)
        assert T <= p.d_min / (2 * E)


def test_max_time_single_vertex_k2(k2):
    # independent root of (2eT/zeta)^(zeta/2) = 1/2 + e^{-2T}/2 with zeta = 1
    root = brentq(lambda T: math.sqrt(2 * E * T) - (0.5 + 0.5 * math.exp(-2 * T)), 1e-12, 1 / (2 * E))
    T = bounds.max_admissible_time(k2.constants, SupportProfile(1, math.inf))
    assert T == pytest.approx(root, rel=1e-8)


def test_max_time_monotone_in_support_size(p3):
    c = GraphConstants(n=20, op_norm=6.0, gap=0.3, zeta=0.4)
    times = [bounds.max_admissible_time(c, SupportProfile(j, 1.5)) for j in range(1, 8)]
    assert all(b <= a for a, b in zip(times, times[1:]))


def test_max_time_zero_when_infeasible():
    # two spikes at the minimum distance on a huge graph with a large Laplacian
    c = GraphConstants(n=10**6, op_norm=1e9, gap=1e-3, zeta=1e-3)
    assert bounds.max_admissible_time(c, SupportProfile(50, 1e-3)) == 0.0


def test_gershgorin_diagnostic(rng):
    inst = Instance(random_connected_graph(rng, n_min=8, n_max=20))
    S = [0, inst.graph.n_vertices - 1]
    p = inst.profile(S)
    t = 0.5 * bounds.max_admissible_time(inst.constants, p)
    M = heat.restrict(inst.kernel(t), S).matrix
    g = bounds.gershgorin_lower_bound(M)
    assert g >= 1 / bounds.inverse_norm_bound(inst.constants, p, t) - 1e-12
    assert np.min(np.linalg.eigvalsh(M)) >= g - 1e-12
