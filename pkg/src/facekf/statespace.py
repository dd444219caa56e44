"""State-space building blocks: process/measurement models and noise specs.

States are flat float arrays in landmark-major order
``[x_1, y_1, z_1, ..., x_N, y_N, z_N]`` (millimetres). Covariances are dense
``(3N, 3N)`` arrays. Noise enters additively after a noise-free transition,
so a process model only needs ``transition(x, dt)`` and its Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, EvaluationError, InvalidConfigError, InvalidStateError, NonPSDError

DEFAULT_DT = 0.01
FD_EPS = 1e-6
SYMMETRY_ATOL = 1e-9
PSD_ATOL = 1e-9


def as_state(x, name: str = "state") -> np.ndarray:
    """Return ``x`` as a 1-D float array, rejecting NaN/Inf."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidStateError(f"{name} contains non-finite values")
    return x


def as_covariance(P, dim: int | None = None, name: str = "covariance", check_psd: bool = False) -> np.ndarray:
    """Validate a covariance matrix and return it as a float array.

    Shape and symmetry (absolute tolerance 1e-9) are always checked. With
    ``check_psd`` the smallest eigenvalue must be >= -1e-9.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {P.shape}")
    if dim is not None and P.shape[0] != dim:
        raise DimensionError(f"{name} has dimension {P.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(P)):
        raise InvalidStateError(f"{name} contains non-finite values")
    if P.size and np.abs(P - P.T).max() > SYMMETRY_ATOL:
        raise InvalidStateError(f"{name} is not symmetric")
    if check_psd and P.size:
        lo = float(np.linalg.eigvalsh(P).min())
        if lo < -PSD_ATOL:
            raise NonPSDError(f"{name} is not PSD (smallest eigenvalue {lo:.3e})", lo)
    return P


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def finite_difference_jacobian(f: Callable[[np.ndarray], np.ndarray], x, eps: float = FD_EPS) -> np.ndarray:
    """Central-difference Jacobian of ``f`` at ``x``.

    ``J[i, j] = (f(x + eps e_j)[i] - f(x - eps e_j)[i]) / (2 eps)``. Exact up
    to roundoff for affine ``f``.
    """
    if not eps > 0:
        raise InvalidConfigError(f"eps must be > 0, got {eps}")
    x = as_state(x)
    cols = []
    for j in range(x.size):
        step = np.zeros_like(x)
        step[j] = eps
        hi = np.atleast_1d(np.asarray(f(x + step), dtype=float))
        lo = np.atleast_1d(np.asarray(f(x - step), dtype=float))
        if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
            raise EvaluationError(f"non-finite function value while differencing along coordinate {j}")
        cols.append((hi - lo) / (2.0 * eps))
    if not cols:
        f0 = np.atleast_1d(np.asarray(f(x), dtype=float))
        return np.zeros((f0.size, 0))
    return np.column_stack(cols)


@dataclass(frozen=True)
class ProcessModel:
    """Noise-free state transition ``x -> transition(x, dt)``.

    When ``jacobian`` is None the Jacobian is obtained by central differences.
    ``vectorized`` models also accept a ``(k, n)`` stack of states and map
    each row; the UKF then propagates all sigma points in one call.
    """

    transition: Callable[[np.ndarray, float], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    name: str = "custom"
    vectorized: bool = False

    def __call__(self, x: np.ndarray, dt: float) -> np.ndarray:
        return self.transition(x, dt)

    def jacobian_at(self, x: np.ndarray, dt: float) -> np.ndarray:
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x, dt), dtype=float)
        return finite_difference_jacobian(lambda s: self.transition(s, dt), x)


@dataclass(frozen=True)
class MeasurementModel:
    """Noise-free measurement function ``z = observe(x)`` of size ``dim``."""

    observe: Callable[[np.ndarray], np.ndarray]
    dim: int
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "custom"
    vectorized: bool = False

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.observe(x)

    def jacobian_at(self, x: np.ndarray) -> np.ndarray:
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x), dtype=float)
        return finite_difference_jacobian(self.observe, x)


def constant_position_transition(x, dt: float = DEFAULT_DT) -> np.ndarray:
    """Landmarks stay where they are: returns a copy of ``x``."""
    return as_state(x).copy()


def random_walk_transition(x, v, w, dt: float = DEFAULT_DT) -> np.ndarray:
    """One step of ``x + v * dt + w`` (velocity ``v`` and noise ``w`` given)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if not (x.shape == v.shape == w.shape):
        raise DimensionError(f"shape mismatch: x {x.shape}, v {v.shape}, w {w.shape}")
    if not dt > 0:
        raise InvalidConfigError(f"dt must be > 0, got {dt}")
    return x + v * dt + w


def identity_measurement(x) -> np.ndarray:
    return as_state(x).copy()


def _identity_jacobian(x, dt=None) -> np.ndarray:
    return np.eye(np.asarray(x).size)


def _copy(x, dt=None) -> np.ndarray:
    return np.array(x, dtype=float)


def constant_position_model() -> ProcessModel:
    return ProcessModel(_copy, _identity_jacobian, name="constant-position", vectorized=True)


def identity_measurement_model(dim: int) -> MeasurementModel:
    return MeasurementModel(_copy, dim, _identity_jacobian, name="identity", vectorized=True)


def linear_process_model(A) -> ProcessModel:
    """Process model ``x -> A @ x`` with its exact Jacobian."""
    A = np.array(A, dtype=float)
    return ProcessModel(lambda x, dt: x @ A.T, lambda x, dt: A, name="linear", vectorized=True)


def linear_measurement_model(H) -> MeasurementModel:
    """Measurement model ``x -> H @ x`` with its exact Jacobian."""
    H = np.atleast_2d(np.array(H, dtype=float))
    return MeasurementModel(lambda x: x @ H.T, H.shape[0], lambda x: H, name="linear", vectorized=True)


@dataclass(frozen=True)
class NoiseSpec:
    """Process and measurement covariances plus the scalar scales behind them.

    ``velocity_sigma`` (mm/s) drives the random-velocity term of the
    stochastic truth; it is not part of ``Q``.
    """

    process_cov: np.ndarray
    measurement_cov: np.ndarray
    velocity_sigma: float = 0.0
    measurement_sigma: Optional[float] = None

    def __post_init__(self):
        Q = as_covariance(self.process_cov, name="Q", check_psd=True)
        R = as_covariance(self.measurement_cov, name="R", check_psd=True)
        if self.velocity_sigma < 0:
            raise InvalidConfigError("velocity_sigma must be >= 0")
        object.__setattr__(self, "process_cov", Q)
        object.__setattr__(self, "measurement_cov", R)

    @classmethod
    def from_scalars(cls, dim: int, sigma_process: float, sigma_measurement: float, sigma_velocity: float = 0.0) -> "NoiseSpec":
        """Build ``Q = sigma_process**2 I`` and ``R = sigma_measurement**2 I``."""
        for label, s in (("sigma_process", sigma_process), ("sigma_measurement", sigma_measurement), ("sigma_velocity", sigma_velocity)):
            if not s >= 0:
                raise InvalidConfigError(f"{label} must be >= 0, got {s}")
        eye = np.eye(dim)
        return cls(sigma_process**2 * eye, sigma_measurement**2 * eye, float(sigma_velocity), float(sigma_measurement))
