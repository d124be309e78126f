"""l1 recovery of spikes from heat-smoothed observations.

The program solved is

    minimize ||g||_1  subject to  ||K(t) g - f||_2 <= eps,

with ``eps = 0`` meaning the equality constraint ``K(t) g = f``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from itertools import combinations, product

import numpy as np

from .certificate import Certificate
from .exceptions import DimensionMismatch, MaxIterationsWarning, TooLarge
from .heat import HeatOperator, RestrictedInverse

OPTIMAL = "optimal"
MAX_ITER = "max_iter"
INFEASIBLE = "infeasible"

BRUTE_FORCE_MAX_N = 14
BRUTE_FORCE_MAX_CANDIDATES = 3**10


@dataclass(frozen=True)
class Observation:
    f: np.ndarray = field(repr=False)
    t: float
    eps: float = 0.0

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.ndim != 1 or not np.all(np.isfinite(f)):
            raise ValueError("observation must be a finite 1-d vector")
        if self.eps < 0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")
        object.__setattr__(self, "f", f)


@dataclass(frozen=True)
class SolverOptions:
    gap_tol: float = 1e-8
    max_iter: int = 50_000
    relaxation: float = 1.8
    rho: float = 1.0
    check_every: int = 10


@dataclass(frozen=True)
class RecoveryResult:
    g_hat: np.ndarray = field(repr=False)
    l1_norm: float
    residual: float
    iterations: int
    converged: bool
    status: str
    gap: float = float("nan")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["g_hat"] = self.g_hat.tolist()
        return out


@dataclass(frozen=True)
class ErrorBudget:
    j: int
    delta: float
    eps: float
    bound_l1: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AuditRecord:
    l1_error: float
    l2_error: float
    off_support_l1: float
    split_rhs: float
    split_ok: bool
    cone_lhs: float | None
    cone_rhs: float | None
    cone_ok: bool | None
    l2_le_l1: bool
    bound_l1: float
    bound_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.split_ok and self.l2_le_l1 and self.bound_ok and self.cone_ok is not False

    def to_dict(self) -> dict:
        return asdict(self)


def _check_dims(h_op: HeatOperator, obs: Observation) -> None:
    if obs.f.shape[0] != h_op.n:
        raise DimensionMismatch(f"observation has length {obs.f.shape[0]}, operator is {h_op.n}")
    if not math.isclose(obs.t, h_op.t, rel_tol=1e-12, abs_tol=1e-15):
        raise ValueError(f"observation time {obs.t} does not match operator time {h_op.t}")


class _Ellipsoid:
    """Euclidean projection onto ``{y : ||K y - f|| <= eps}``.

    Works in the eigenbasis of ``K``, where the constraint is diagonal; the
    multiplier of the active constraint solves a scalar secular equation.
    """

    def __init__(self, h_op: HeatOperator, f: np.ndarray, eps: float):
        self.V = h_op.spectral.eigenvectors
        self.k = h_op.multipliers()
        self.f_hat = self.V.T @ f
        self.eps = eps
        self.mu = 0.0

    def residual_norm(self, y: np.ndarray) -> float:
        return float(np.linalg.norm(self.k * (self.V.T @ y) - self.f_hat))

    def project(self, v: np.ndarray) -> np.ndarray:
        v_hat = self.V.T @ v
        r = self.k * v_hat - self.f_hat
        norm_r = np.linalg.norm(r)
        if norm_r <= self.eps:
            return v
        if self.eps == 0:
            return self.V @ (self.f_hat / self.k)
        mu = self._multiplier(r, norm_r)
        y_hat = v_hat - mu * self.k * r / (1.0 + mu * self.k**2)
        return self.V @ y_hat

    def _multiplier(self, r: np.ndarray, norm_r: float) -> float:
        k2 = self.k**2
        eps = self.eps
        lo, hi = 0.0, (norm_r / eps - 1.0) / k2.min()
        mu = min(max(self.mu, lo), hi)
        # Newton on 1/||r(mu)|| - 1/eps, safeguarded by bisection
        for _ in range(200):
            q = r / (1.0 + mu * k2)
            nq = np.linalg.norm(q)
            if abs(nq - eps) <= 1e-15 * eps:
                break
            if nq > eps:
                lo = mu
            else:
                hi = mu
            dnq = -np.dot(q, q * k2 / (1.0 + mu * k2)) / nq
            step = -(1.0 / nq - 1.0 / eps) / (-dnq / nq**2)
            new = mu + step
            if not (lo < new < hi):
                new = 0.5 * (lo + hi)
            if new == mu or hi - lo <= 1e-16 * max(hi, 1.0):
                break
            mu = new
        self.mu = mu
        return mu

    def dual_value(self, s: np.ndarray, f: np.ndarray) -> float:
        """Dual objective at ``lam = K^{-1} s`` for ``||s||_inf <= 1``."""
        lam = self.V @ ((self.V.T @ s) / self.k)
        return float(lam @ f - self.eps * np.linalg.norm(lam))


def _soft(x: np.ndarray, thresh: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)


def solve(h_op: HeatOperator, obs: Observation, opts: SolverOptions | None = None) -> RecoveryResult:
    """Minimize the l1 norm over all signals consistent with ``obs``.

    Over-relaxed ADMM splitting the l1 term (soft thresholding) from the
    data constraint (exact projection through the spectrum of ``K(t)``).
    Convergence is declared when the duality gap between the feasible
    iterate and the dual point read off the scaled multiplier drops below
    ``opts.gap_tol``.

    If the iteration cap is reached, a :class:`MaxIterationsWarning` is
    issued and the last feasible iterate is returned with
    ``status='max_iter'``.
    """
    opts = opts or SolverOptions()
    _check_dims(h_op, obs)
    f, eps = obs.f, float(obs.eps)
    n = h_op.n
    proj = _Ellipsoid(h_op, f, eps)
    rho, alpha = opts.rho, opts.relaxation

    z = proj.project(np.zeros(n))
    u = np.zeros(n)
    gap = math.inf
    it = 0
    for it in range(1, opts.max_iter + 1):
        x = _soft(z - u, 1.0 / rho)
        x_relaxed = alpha * x + (1.0 - alpha) * z
        z = proj.project(x_relaxed + u)
        u = u + x_relaxed - z
        if it % opts.check_every == 0 or it == opts.max_iter:
            gap = _duality_gap(proj, z, -rho * u, f)
            if gap <= opts.gap_tol:
                break
    if not np.all(np.isfinite(z)):
        return RecoveryResult(z, math.nan, math.nan, it, False, INFEASIBLE, gap)
    converged = gap <= opts.gap_tol
    if not converged:
        warnings.warn(
            f"solver stopped after {it} iterations with duality gap {gap:.3g}",
            MaxIterationsWarning,
            stacklevel=2,
        )
    return RecoveryResult(
        g_hat=z,
        l1_norm=float(np.abs(z).sum()),
        residual=proj.residual_norm(z),
        iterations=it,
        converged=converged,
        status=OPTIMAL if converged else MAX_ITER,
        gap=gap,
    )


def _duality_gap(proj: _Ellipsoid, z: np.ndarray, s: np.ndarray, f: np.ndarray) -> float:
    primal = float(np.abs(z).sum())
    scale = np.max(np.abs(s))
    if scale == 0:
        return primal
    dual = proj.dual_value(s / max(scale, 1.0), f)
    # the dual is linear in the scale of s on [0, 1/||s||_inf]
    if dual > 0 and scale < 1.0:
        dual /= scale
    return primal - dual


def brute_force(
    h_op: HeatOperator, obs: Observation, max_support: int | None = None
) -> RecoveryResult:
    """Exhaustive l1 minimization over small supports; a reference oracle.

    For every support ``T`` with ``|T| <= max_support`` and every sign
    pattern ``s`` on it, the minimum of ``s . x`` over the ellipsoid
    ``{x on T : ||K_T x - f|| <= eps}`` has a closed form. A candidate
    whose signs agree with ``s`` is a feasible point with l1 norm ``s . x``,
    and the global minimizer is among the candidates whenever its support
    has at most ``max_support`` vertices. ``max_support=None`` searches
    every support, which makes the result the exact optimum.

    Raises
    ------
    TooLarge
        If ``N > 14`` or the number of (support, signs) candidates exceeds
        ``3 ** 10``.
    """
    _check_dims(h_op, obs)
    n = h_op.n
    m = n if max_support is None else min(int(max_support), n)
    n_candidates = sum(math.comb(n, k) * 2**k for k in range(m + 1))
    if n > BRUTE_FORCE_MAX_N or n_candidates > BRUTE_FORCE_MAX_CANDIDATES:
        raise TooLarge(
            f"brute force limited to N <= {BRUTE_FORCE_MAX_N} and "
            f"{BRUTE_FORCE_MAX_CANDIDATES} candidates; got N={n} with "
            f"{n_candidates} candidates"
        )
    f, eps = obs.f, float(obs.eps)
    K = h_op.kernel
    feas_tol = 1e-9 * max(1.0, float(np.linalg.norm(f)))

    best_val, best_x = math.inf, None
    if np.linalg.norm(f) <= eps:
        best_val, best_x = 0.0, np.zeros(n)
    for size in range(1, m + 1):
        # columns are all sign patterns on a support of this size
        signs = np.array(list(product((-1.0, 1.0), repeat=size))).T
        for T in combinations(range(n), size):
            A = K[:, T]
            G = A.T @ A
            x0 = np.linalg.solve(G, A.T @ f)
            res2 = float(np.sum((A @ x0 - f) ** 2))
            if math.sqrt(res2) > eps + feas_tol:
                continue
            radius = math.sqrt(max(eps**2 - res2, 0.0))
            W = np.linalg.solve(G, signs)
            X = x0[:, None] - radius * W / np.sqrt(np.sum(signs * W, axis=0))
            consistent = np.all(signs * X >= 0, axis=0)
            if not consistent.any():
                continue
            vals = np.abs(X[:, consistent]).sum(axis=0)
            i = int(np.argmin(vals))
            if vals[i] < best_val:
                best_val = float(vals[i])
                best_x = np.zeros(n)
                best_x[list(T)] = X[:, consistent][:, i]
    if best_x is None:
        return RecoveryResult(np.zeros(n), math.nan, math.nan, n_candidates, False, INFEASIBLE)
    return RecoveryResult(
        g_hat=best_x,
        l1_norm=best_val,
        residual=float(np.linalg.norm(K @ best_x - f)),
        iterations=n_candidates,
        converged=True,
        status=OPTIMAL,
        gap=0.0,
    )


def delta_from_inverse(inv: RestrictedInverse) -> float:
    """Excess over 1 of the larger of the l2 and l-infinity inverse norms."""
    return max(inv.norm_2, inv.norm_inf) - 1.0


def error_budget(j: int, delta: float, eps: float) -> ErrorBudget:
    """Recovery error bound ``4 (1 + delta) sqrt(j) eps`` in the l1 norm."""
    if j < 1:
        raise ValueError("support size must be at least 1")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return ErrorBudget(j, delta, eps, 4.0 * (1.0 + delta) * math.sqrt(j) * eps)


def audit_recovery(
    g_true,
    result: RecoveryResult,
    budget: ErrorBudget,
    certificate: Certificate | None = None,
    tol: float = 1e-6,
) -> AuditRecord:
    """Evaluate each inequality of the noisy error analysis on one solve.

    ``tol`` is absolute slack for floating point and solver tolerance.
    With a certificate, the cone inequality
    ``||g_hat off S||_1 <= |<(g - g_hat) on S, h on S>|`` is also checked.
    """
    g = np.asarray(g_true, dtype=float)
    g_hat = np.asarray(result.g_hat, dtype=float)
    if g.shape != g_hat.shape:
        raise DimensionMismatch(f"shapes differ: {g.shape} vs {g_hat.shape}")
    S = np.flatnonzero(g)
    off = np.ones(g.shape[0], dtype=bool)
    off[S] = False

    diff = g_hat - g
    l1 = float(np.abs(diff).sum())
    l2 = float(np.linalg.norm(diff))
    off_l1 = float(np.abs(g_hat[off]).sum())
    split_rhs = 2.0 * math.sqrt(budget.j) * (1.0 + budget.delta) * budget.eps + off_l1

    cone_lhs = cone_rhs = cone_ok = None
    if certificate is not None:
        if sorted(certificate.support) != S.tolist():
            raise ValueError("certificate support differs from the signal support")
        idx = list(certificate.support)
        eta_S = (g - g_hat)[idx]
        cone_lhs = off_l1
        cone_rhs = abs(float(eta_S @ certificate.values[idx]))
        cone_ok = cone_lhs <= cone_rhs + tol

    return AuditRecord(
        l1_error=l1,
        l2_error=l2,
        off_support_l1=off_l1,
        split_rhs=split_rhs,
        split_ok=l1 <= split_rhs + tol,
        cone_lhs=cone_lhs,
        cone_rhs=cone_rhs,
        cone_ok=cone_ok,
        l2_le_l1=l2 <= l1 + 1e-15,
        bound_l1=budget.bound_l1,
        bound_ok=l1 <= budget.bound_l1 + tol,
    )


def sample_noise(n: int, eps: float, model: str = "sphere", rng=None) -> np.ndarray:
    """Noise with ``||w||_2 = eps`` (sphere) or ``<= eps`` (gaussian).

    The gaussian model draws i.i.d. entries with standard deviation
    ``eps / sqrt(n)`` and rescales onto the sphere if the draw leaves the ball.
    """
    rng = np.random.default_rng(rng)
    if eps == 0:
        return np.zeros(n)
    if model == "sphere":
        w = rng.standard_normal(n)
        return eps * w / np.linalg.norm(w)
    if model == "gaussian":
        w = rng.standard_normal(n) * eps / math.sqrt(n)
        norm = np.linalg.norm(w)
        return w * (eps / norm) if norm > eps else w
    raise ValueError(f"unknown noise model {model!r}")
