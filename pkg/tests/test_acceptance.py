"""End-to-end acceptance checks; each prints one PASS/FAIL line.

Run alone with ``pytest -m acceptance -s`` to see the summary lines.
"""

import math
import subprocess
import sys

import numpy as np
import pytest

from heatrecovery import bounds, certificate, heat, recovery
from heatrecovery.graph import build_graph

from conftest import Instance, random_connected_graph

pytestmark = pytest.mark.acceptance

SEED = 20240611


def report(capsys, number, title, ok, detail=""):
    with capsys.disabled():
        print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip())
    assert ok, f"criterion {number} failed: {detail}"


@pytest.fixture(scope="module")
def graphs():
    rng = np.random.default_rng(SEED)
    return [Instance(random_connected_graph(rng, n_min=2, n_max=40)) for _ in range(50)]


def _random_support(rng, inst, j_max):
    n = inst.graph.n_vertices
    j = int(rng.integers(1, min(j_max, n) + 1))
    return sorted(rng.choice(n, j, replace=False).tolist())


@pytest.fixture(scope="module")
def feasible_instances():
    """100 random (graph, S, signs) draws at t = 0.9 T*."""
    rng = np.random.default_rng(SEED + 1)
    out = []
    while len(out) < 100:
        inst = Instance(random_connected_graph(rng, n_min=2, n_max=40))
        S = _random_support(rng, inst, 5)
        t_star = bounds.max_admissible_time(inst.constants, inst.profile(S))
        if t_star <= 0:
            continue
        t = 0.9 * t_star
        g = np.zeros(inst.graph.n_vertices)
        g[S] = rng.uniform(0.5, 2.0, len(S)) * rng.choice([-1.0, 1.0], len(S))
        out.append((inst, S, t, g))
    return out


def test_criterion_01_two_point_kernel(capsys):
    inst = Instance(build_graph(2, [(0, 1, 1.0)]))
    worst = 0.0
    for t in (0.0, 0.1, 0.5, 2.0):
        e = math.exp(-2 * t)
        exact = 0.5 * np.array([[1 + e, 1 - e], [1 - e, 1 + e]])
        worst = max(worst, float(np.max(np.abs(inst.kernel(t).kernel - exact))))
    report(capsys, 1, "two-point heat kernel", worst <= 1e-12, f"max error {worst:.2e}")


def test_criterion_02_diagonal_sandwich(capsys, graphs):
    worst = -math.inf
    for inst in graphs:
        for t in (0.01, 0.1, 1.0):
            lo, hi = bounds.diagonal_bounds(inst.constants, t)
            d = np.diag(inst.kernel(t).kernel)
            worst = max(worst, float(np.max(lo - d)), float(np.max(d - hi)))
    report(capsys, 2, "diagonal sandwich", worst <= 1e-10, f"worst excess {worst:.2e}")


def test_criterion_03_off_diagonal_dominance(capsys, graphs):
    worst, count = -math.inf, 0
    for inst in graphs:
        n = inst.graph.n_vertices
        if n < 2:
            continue
        iu = np.triu_indices(n, 1)
        dist = inst.metric.dist[iu]
        for t in (0.001, 0.01, 0.1):
            K = inst.kernel(t).kernel[iu]
            folz = np.array([bounds.folz_bound(d, t) for d in dist])
            worst = max(worst, float(np.max(K - folz)))
            count += K.size
    report(capsys, 3, "off-diagonal dominance", worst <= 1e-12, f"{count} pairs, worst excess {worst:.2e}")


@pytest.fixture(scope="module")
def invertible_instances(graphs):
    rng = np.random.default_rng(SEED + 2)
    out = []
    for inst in graphs:
        for _ in range(4):
            S = _random_support(rng, inst, 6)
            p = inst.profile(S)
            for t in np.geomspace(1e-6, 1.0, 12):
                if bounds.check_invertibility(inst.constants, p, t)[0]:
                    M = heat.restrict(inst.kernel(t), S).matrix
                    out.append((M, bounds.inverse_norm_bound(inst.constants, p, t)))
    return out


# the bound is attained on two-vertex graphs with J = 1; allow round-off there
ULP_SLACK = 8 * np.finfo(float).eps


def test_criterion_04_l2_inverse_bound(capsys, invertible_instances):
    bad = ties = 0
    for M, bound in invertible_instances:
        sigma_min = float(np.min(np.linalg.eigvalsh(M)))
        inv_norm = float(np.linalg.norm(np.linalg.inv(M), 2))
        bad += sigma_min < 1 / bound - 1e-10 or inv_norm > bound * (1 + ULP_SLACK)
        ties += bound < inv_norm <= bound * (1 + ULP_SLACK)
    n = len(invertible_instances)
    report(capsys, 4, "l2 inverse bound", n > 0 and bad == 0,
           f"{n - bad}/{n} instances, {ties} round-off ties")


def test_criterion_05_linf_inverse_bound(capsys, invertible_instances):
    bad = 0
    for M, bound in invertible_instances:
        bad += float(np.linalg.norm(np.linalg.inv(M), np.inf)) > bound + 1e-10
    n = len(invertible_instances)
    report(capsys, 5, "l-infinity inverse bound", n > 0 and bad == 0, f"{n - bad}/{n} instances")


def test_criterion_06_certificate(capsys, feasible_instances):
    passed = 0
    for inst, S, t, g in feasible_instances:
        cert = certificate.construct(inst.kernel(t), S, np.sign(g[S]))
        v = certificate.verify(cert)
        passed += v.unit_sup and v.interpolates and v.strictly_interior and 1 - cert.off_support_max > 0
    report(capsys, 6, "dual certificate at 0.9 T*", passed == 100, f"{passed}/100 trials")


def test_criterion_07_noiseless_recovery(capsys, feasible_instances):
    worst = 0.0
    for inst, S, t, g in feasible_instances:
        h = inst.kernel(t)
        res = recovery.solve(h, recovery.Observation(h.kernel @ g, t, 0.0))
        worst = max(worst, float(np.abs(res.g_hat - g).sum()))
    report(capsys, 7, "noiseless exact recovery", worst < 1e-5, f"max l1 error {worst:.2e}")


def test_criterion_08_oracle_equivalence(capsys):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for k in range(50):
        inst = Instance(random_connected_graph(rng, n_min=2, n_max=10))
        n = inst.graph.n_vertices
        S = _random_support(rng, inst, 2)
        h = inst.kernel(float(rng.uniform(0.01, 1.0)))
        eps = (0.0, 0.05)[k % 2]
        g = np.zeros(n)
        g[S] = rng.uniform(0.5, 2.0, len(S)) * rng.choice([-1.0, 1.0], len(S))
        obs = recovery.Observation(h.kernel @ g + recovery.sample_noise(n, eps, "sphere", rng), h.t, eps)
        gap = abs(recovery.solve(h, obs).l1_norm - recovery.brute_force(h, obs).l1_norm)
        worst = max(worst, gap)
    report(capsys, 8, "solver vs exhaustive oracle", worst <= 1e-6, f"max |difference| {worst:.2e}")


def test_criterion_09_noisy_bound(capsys):
    rng = np.random.default_rng(SEED + 4)
    passed = trials = 0
    worst_ratio = 0.0
    while trials < 100:
        inst = Instance(random_connected_graph(rng, n_min=2, n_max=40))
        S = _random_support(rng, inst, 5)
        t_star = bounds.max_admissible_time(inst.constants, inst.profile(S))
        if t_star <= 0:
            continue
        t = 0.9 * t_star
        h = inst.kernel(t)
        n = inst.graph.n_vertices
        eps = (0.01, 0.1)[trials % 2]
        g = np.zeros(n)
        g[S] = rng.uniform(0.5, 2.0, len(S)) * rng.choice([-1.0, 1.0], len(S))
        f = h.kernel @ g + recovery.sample_noise(n, eps, "sphere", rng)
        res = recovery.solve(h, recovery.Observation(f, t, eps))
        inv = heat.invert_restricted(heat.restrict(h, S))
        budget = recovery.error_budget(len(S), recovery.delta_from_inverse(inv), eps)
        cert = certificate.construct(h, S, np.sign(g[S]))
        audit = recovery.audit_recovery(g, res, budget, cert, tol=1e-6)
        passed += audit.bound_ok and audit.l2_le_l1 and audit.split_ok and bool(audit.cone_ok)
        worst_ratio = max(worst_ratio, audit.l1_error / budget.bound_l1)
        trials += 1
    report(capsys, 9, "noisy recovery bound", passed == 100,
           f"{passed}/100 trials, max error/bound {worst_ratio:.3f}")


def test_criterion_10_determinism(capsys, tmp_path):
    import json

    cfg = {
        "graph": {"generator": "erdos_renyi", "n": 15, "p": 0.3, "seed": 11},
        "support": {"j": 3, "seed": 5},
        "signal": {"seed": 6},
        "time": {"fraction_grid": [0.3, 0.9]},
        "noise": {"eps": [0.0, 0.05], "model": "gaussian", "seed": 7},
        "repeats": 2,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    outputs = []
    for k in range(2):
        target = tmp_path / f"run{k}.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "heatrecovery", "experiment", str(path), "--csv", str(target)],
            capture_output=True,
        )
        assert proc.returncode == 0, proc.stderr.decode()
        outputs.append(target.read_bytes())
    same = outputs[0] == outputs[1] and len(outputs[0]) > 0
    report(capsys, 10, "byte-identical experiment CSV", same, f"{len(outputs[0])} bytes")
