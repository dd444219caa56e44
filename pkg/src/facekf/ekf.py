"""Extended Kalman filter: predict/update on immutable states.

Prediction::

    x' = f(x, dt)
    P' = F P F^T + Q                 F = df/dx at x

Update::

    S = H P H^T + R                  H = dh/dx at the predicted mean
    K = P H^T S^-1                   (linear solve, no explicit inverse)
    x' = x + K (z - h(x))
    P' = (I - K H) P

Both covariance results are symmetrised as ``(M + M^T) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_factor, cho_solve, lapack

from .errors import DimensionError, NumericError, SingularUpdateError
from .statespace import MeasurementModel, ProcessModel, as_covariance, as_state, symmetrize

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class EkfState:
    """Posterior (or prior) mean and covariance after ``step_index`` updates."""

    mean: np.ndarray
    cov: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        mean = as_state(self.mean, "mean")
        cov = as_covariance(self.cov, mean.size, "cov")
        if self.step_index < 0:
            raise ValueError("step_index must be >= 0")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


@dataclass(frozen=True)
class EkfUpdateDiagnostics:
    gain: np.ndarray
    innovation: np.ndarray
    predicted_measurement: np.ndarray
    innovation_cov: np.ndarray


def solve_gain(cross_cov: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Return ``K = cross_cov @ inv(S)`` via a linear solve.

    The reciprocal condition number of ``S`` is estimated from its Cholesky
    factor (LAPACK ``pocon``); indefinite ``S`` falls back to the 2-norm
    condition number and an LU solve. Raises :class:`SingularUpdateError`
    when the condition estimate exceeds 1e12.
    """
    if S.size == 0:
        return np.zeros((cross_cov.shape[0], 0))
    try:
        factor = cho_factor(S, lower=True)
    except LinAlgError:
        factor = None
    if factor is not None:
        rcond, info = lapack.dpocon(factor[0], np.abs(S).sum(axis=0).max(), uplo="L")
        cond = 1.0 / rcond if info == 0 and rcond > 0 else np.inf
    else:
        cond = float(np.linalg.cond(S))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularUpdateError(f"innovation covariance is singular (condition estimate {cond:.3e})", cond)
    if factor is not None:
        return cho_solve(factor, cross_cov.T).T
    return np.linalg.solve(S.T, cross_cov.T).T


def ekf_predict(state: EkfState, model: ProcessModel, Q, dt: float) -> EkfState:
    """Propagate mean through ``model`` and covariance through its Jacobian.

    ``step_index`` is left unchanged; it advances on update.
    """
    n = state.mean.size
    Q = as_covariance(Q, n, "Q")
    mean = np.asarray(model.transition(state.mean, dt), dtype=float)
    if mean.shape != (n,):
        raise DimensionError(f"transition returned shape {mean.shape}, expected ({n},)")
    F = model.jacobian_at(state.mean, dt)
    if F.shape != (n, n):
        raise DimensionError(f"process Jacobian has shape {F.shape}, expected ({n}, {n})")
    cov = symmetrize(F @ state.cov @ F.T + Q)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise NumericError("EKF prediction produced non-finite values")
    return EkfState(mean, cov, state.step_index)


def ekf_update(state: EkfState, z, model: MeasurementModel, R) -> tuple[EkfState, EkfUpdateDiagnostics]:
    """Correct ``state`` with measurement ``z``; returns the posterior and diagnostics."""
    n = state.mean.size
    z = as_state(z, "measurement")
    m = model.dim
    if z.size != m:
        raise DimensionError(f"measurement has length {z.size}, model expects {m}")
    R = as_covariance(R, m, "R")
    H = model.jacobian_at(state.mean)
    if H.shape != (m, n):
        raise DimensionError(f"measurement Jacobian has shape {H.shape}, expected ({m}, {n})")
    z_pred = np.asarray(model.observe(state.mean), dtype=float)
    innovation = z - z_pred

    PHt = state.cov @ H.T
    S = symmetrize(H @ PHt + R)
    K = solve_gain(PHt, S)

    mean = state.mean + K @ innovation
    cov = symmetrize((np.eye(n) - K @ H) @ state.cov)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise NumericError("EKF update produced non-finite values")
    new_state = replace(state, mean=mean, cov=cov, step_index=state.step_index + 1)
    return new_state, EkfUpdateDiagnostics(K, innovation, z_pred, S)
