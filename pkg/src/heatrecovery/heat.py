"""Heat semigroup of a graph Laplacian via its eigendecomposition."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from .exceptions import (
    DimensionMismatch,
    EigensolverFailure,
    EmptySupport,
    IndexOutOfRange,
    NegativeTime,
    NumericallySingular,
)

ZERO_MODE_RTOL = 1e-10
INVERSE_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class SpectralData:
    """Eigenpairs of the Laplacian, eigenvalues ascending (all <= 0)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class HeatOperator:
    """The matrix ``exp(t L)`` together with the spectrum it came from."""

    t: float
    kernel: np.ndarray = field(repr=False)
    spectral: SpectralData = field(repr=False)

    @property
    def n(self) -> int:
        return self.kernel.shape[0]

    def multipliers(self) -> np.ndarray:
        """Eigenvalues ``exp(t * lambda_i)`` of the kernel, in (0, 1]."""
        return np.exp(self.t * self.spectral.eigenvalues)


@dataclass(frozen=True)
class RestrictedOperator:
    """Principal submatrix of the heat kernel on an ordered support."""

    support: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    t: float = 0.0


@dataclass(frozen=True)
class RestrictedInverse:
    matrix: np.ndarray = field(repr=False)
    norm_2: float
    norm_inf: float
    residual: float


def decompose(L: np.ndarray) -> SpectralData:
    """Full symmetric eigendecomposition of a Laplacian.

    Eigenvalues in ``(0, 1e-10 * ||L||]`` are round-off of the zero mode
    and are clamped to 0.
    """
    L = np.asarray(L, dtype=float)
    try:
        w, V = np.linalg.eigh(L)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(w)):
        raise EigensolverFailure("eigenvalues are not finite")
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    w = np.where((w > 0) & (w <= ZERO_MODE_RTOL * scale), 0.0, w)
    return SpectralData(w, V)


def operator_norm(s: SpectralData) -> float:
    return float(np.max(np.abs(s.eigenvalues)))


def spectral_gap(s: SpectralData) -> float:
    """Smallest nonzero eigenvalue of ``-L``."""
    neg = -s.eigenvalues
    tol = ZERO_MODE_RTOL * operator_norm(s)
    nonzero = neg[neg > tol]
    if nonzero.size == 0:
        raise ValueError("spectrum has no nonzero eigenvalue")
    return float(nonzero.min())


def heat_operator(s: SpectralData, t: float) -> HeatOperator:
    """Heat kernel ``K(t, x, y) = (exp(tL) delta_y)(x)`` at time ``t``."""
    t = float(t)
    if t < 0 or not np.isfinite(t):
        raise NegativeTime(f"time must be nonnegative, got {t}")
    V = s.eigenvectors
    K = (V * np.exp(t * s.eigenvalues)) @ V.T
    K = 0.5 * (K + K.T)
    return HeatOperator(t, K, s)


def apply(h: HeatOperator, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[0] != h.n:
        raise DimensionMismatch(f"expected length {h.n}, got {f.shape[0]}")
    return h.kernel @ f


def check_support(support: Sequence[int], n: int) -> tuple[int, ...]:
    support = tuple(int(v) for v in support)
    if not support:
        raise EmptySupport("support must contain at least one vertex")
    if len(set(support)) != len(support):
        raise ValueError(f"support has repeated vertices: {support}")
    for v in support:
        if not 0 <= v < n:
            raise IndexOutOfRange(f"vertex {v} outside [0, {n})")
    return support


def restrict(h: HeatOperator, support: Sequence[int]) -> RestrictedOperator:
    support = check_support(support, h.n)
    idx = np.asarray(support)
    return RestrictedOperator(support, h.kernel[np.ix_(idx, idx)].copy(), h.t)


def cholesky(m: RestrictedOperator):
    """Cholesky factor of ``M^t``; failure means it is numerically singular."""
    try:
        return linalg.cho_factor(m.matrix, lower=True, check_finite=True)
    except linalg.LinAlgError as exc:
        raise NumericallySingular(
            f"restricted heat operator at t={m.t} is not numerically positive definite"
        ) from exc


def invert_restricted(m: RestrictedOperator) -> RestrictedInverse:
    """Inverse of ``M^t`` with its l2 and l-infinity operator norms.

    Raises
    ------
    NumericallySingular
        If the factorization fails or the residual ``M M^-1 - I`` exceeds
        1e-8 in max norm.
    """
    J = m.matrix.shape[0]
    factor = cholesky(m)
    inv = linalg.cho_solve(factor, np.eye(J))
    inv = 0.5 * (inv + inv.T)
    residual = float(np.max(np.abs(m.matrix @ inv - np.eye(J))))
    if not residual < INVERSE_RESIDUAL_TOL:
        raise NumericallySingular(f"inverse residual {residual:.3g} too large")
    norm_2 = float(np.linalg.norm(inv, 2))
    norm_inf = float(np.max(np.abs(inv).sum(axis=1)))
    return RestrictedInverse(inv, norm_2, norm_inf, residual)
