"""Unscented Kalman filter with the plain ``lambda`` sigma-point scheme.

For state dimension ``n`` and spread parameter ``lambda`` the 2n+1 sigma
points are ``x``, ``x + col_i`` and ``x - col_i`` where ``col_i`` are the
columns of a Cholesky factor of ``(n + lambda) P``. Mean weights are
``lambda / (n + lambda)`` for the centre point and ``1 / (2 (n + lambda))``
for the rest.

Covariance weights are set equal to the mean weights. No ``alpha``/``beta``
scaling is applied, so ``lambda = 0`` gives a zero centre weight and
negative ``lambda`` a negative one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ekf import solve_gain
from .errors import DimensionError, EvaluationError, InvalidConfigError, NonPSDError, NumericError
from .statespace import MeasurementModel, ProcessModel, as_covariance, as_state, symmetrize

DEFAULT_LAMBDA = 1.0
JITTER_STEPS = (1e-9, 1e-6)


@dataclass(frozen=True)
class UkfConfig:
    state_dim: int
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if self.state_dim < 1:
            raise InvalidConfigError(f"state_dim must be >= 1, got {self.state_dim}")
        if not self.state_dim + self.lam > 0:
            raise InvalidConfigError(f"n + lambda must be > 0 (n={self.state_dim}, lambda={self.lam})")

    @property
    def scale(self) -> float:
        return self.state_dim + self.lam


@dataclass(frozen=True)
class SigmaPointSet:
    """``points`` has one sigma point per row, shape ``(2n+1, n)``."""

    points: np.ndarray
    mean_weights: np.ndarray
    cov_weights: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class UkfUpdateDiagnostics:
    innovation: np.ndarray
    innovation_cov: np.ndarray
    cross_cov: np.ndarray
    gain: np.ndarray
    predicted_measurement: np.ndarray


def compute_weights(config: UkfConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance weights (identical arrays of length 2n+1)."""
    n, scale = config.state_dim, config.scale
    wm = np.full(2 * n + 1, 1.0 / (2.0 * scale))
    wm[0] = config.lam / scale
    return wm, wm.copy()


def matrix_sqrt(P) -> np.ndarray:
    """Lower Cholesky factor ``L`` with ``L @ L.T == P``.

    If the factorisation fails, ``P + 1e-9 I`` and then ``P + 1e-6 I`` are
    tried. Raises :class:`NonPSDError` (carrying the smallest eigenvalue of
    ``P``) if all three attempts fail.
    """
    P = as_covariance(P, name="P")
    P = symmetrize(P)
    try:
        return np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        pass
    eye = np.eye(P.shape[0])
    for jitter in JITTER_STEPS:
        try:
            return np.linalg.cholesky(P + jitter * eye)
        except np.linalg.LinAlgError:
            continue
    lo = float(np.linalg.eigvalsh(P).min())
    raise NonPSDError(f"matrix is not PSD after jitter (smallest eigenvalue {lo:.3e})", lo)


def generate_sigma_points(mean, cov, config: UkfConfig) -> SigmaPointSet:
    mean = as_state(mean, "mean")
    n = config.state_dim
    if mean.size != n:
        raise DimensionError(f"mean has length {mean.size}, config expects {n}")
    cov = as_covariance(cov, n, "cov")
    L = matrix_sqrt(config.scale * cov)
    # rows: centre, then +columns, then -columns
    points = np.vstack([mean, mean + L.T, mean - L.T])
    wm, wc = compute_weights(config)
    return SigmaPointSet(points, wm, wc)


def _propagate(points: np.ndarray, f: Callable[[np.ndarray], np.ndarray], vectorized: bool) -> np.ndarray:
    if vectorized:
        out = np.asarray(f(points), dtype=float).reshape(points.shape[0], -1)
    else:
        out = np.array([np.atleast_1d(np.asarray(f(p), dtype=float)) for p in points])
    if not np.all(np.isfinite(out)):
        raise EvaluationError("function returned non-finite values at a sigma point")
    return out


def weighted_moments(points: np.ndarray, wm: np.ndarray, wc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean and weighted outer-product covariance of row vectors."""
    mean = wm @ points
    dev = points - mean
    cov = (dev * wc[:, None]).T @ dev
    return mean, symmetrize(cov)


def unscented_transform(sigma: SigmaPointSet, f: Callable[[np.ndarray], np.ndarray], additive_cov=None,
                        vectorized: bool = False):
    """Push ``sigma`` through ``f``.

    Returns ``(mean, cov, transformed_points)``; ``additive_cov`` (if given)
    is added to the covariance. With ``vectorized`` the whole ``(2n+1, n)``
    point array is passed to ``f`` at once.
    """
    transformed = _propagate(sigma.points, f, vectorized)
    mean, cov = weighted_moments(transformed, sigma.mean_weights, sigma.cov_weights)
    if additive_cov is not None:
        additive_cov = as_covariance(additive_cov, mean.size, "additive_cov")
        cov = symmetrize(cov + additive_cov)
    return mean, cov, transformed


def ukf_predict(mean, cov, model: ProcessModel, Q, dt: float, config: UkfConfig) -> tuple[np.ndarray, np.ndarray]:
    sigma = generate_sigma_points(mean, cov, config)
    Q = as_covariance(Q, config.state_dim, "Q")
    mean_p, cov_p, _ = unscented_transform(sigma, lambda x: model.transition(x, dt), Q, model.vectorized)
    if mean_p.size != config.state_dim:
        raise DimensionError(f"transition returned length {mean_p.size}, expected {config.state_dim}")
    return mean_p, cov_p


def ukf_update(mean, cov, z, model: MeasurementModel, R, config: UkfConfig):
    """Measurement update from the predicted ``(mean, cov)``.

    Sigma points are regenerated from the predicted moments, pushed through
    the measurement function, and combined into the innovation covariance
    ``S`` and the state/measurement cross-covariance. The posterior is
    ``mean + K y`` and ``cov - K S K^T`` with ``K = P_xz S^-1``.

    Returns ``(mean, cov, UkfUpdateDiagnostics)``.
    """
    z = as_state(z, "measurement")
    if z.size != model.dim:
        raise DimensionError(f"measurement has length {z.size}, model expects {model.dim}")
    R = as_covariance(R, model.dim, "R")
    sigma = generate_sigma_points(mean, cov, config)
    x_hat = sigma.points[0]
    cov = np.asarray(cov, dtype=float)

    z_hat, S, z_points = unscented_transform(sigma, model.observe, R, model.vectorized)
    if z_hat.size != model.dim:
        raise DimensionError(f"measurement function returned length {z_hat.size}, expected {model.dim}")
    innovation = z - z_hat
    x_dev = sigma.points - x_hat
    z_dev = z_points - z_hat
    P_xz = (x_dev * sigma.cov_weights[:, None]).T @ z_dev

    K = solve_gain(P_xz, S)
    new_mean = x_hat + K @ innovation
    new_cov = symmetrize(cov - K @ S @ K.T)
    if not (np.all(np.isfinite(new_mean)) and np.all(np.isfinite(new_cov))):
        raise NumericError("UKF update produced non-finite values")
    try:
        matrix_sqrt(new_cov)
    except NonPSDError as err:
        raise NonPSDError(f"UKF posterior covariance is not PSD: {err}", err.min_eigenvalue) from err
    return new_mean, new_cov, UkfUpdateDiagnostics(innovation, S, P_xz, K, z_hat)
