"""Deterministic and stochastic EKF/UKF tracking experiments.

Both experiments track every landmark coordinate as a position-only state
(3N entries) with a constant-position process model and an identity
measurement model, and score each filter by per-frame MSE against the
noise-free truth.

Deterministic mode feeds the exact frames as measurements. Since
``Q = R = 0`` would make the gain undefined, small floors ``q_det`` and
``r_det`` stand in for the removed noise.

Stochastic mode builds, for every realization, a perturbed truth

    d_0 = 0,   d_k = d_{k-1} + v_{k-1} dt + w_{k-1}
    v ~ N(0, sigma_velocity^2 I),  w ~ N(0, sigma_process^2 I)
    truth_k = frame_k + d_k

and measures it with ``N(0, sigma_measurement^2 I)`` noise. Each realization
draws from its own Philox streams, so the EKF and UKF see the same
measurements and runs are reproducible from the seed alone. Per-realization
series are averaged in realization order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .dataio import PROCESS_STREAM, VELOCITY_STREAM, Trajectory, gaussian_draws, make_rng, synthesize_measurements
from .ekf import EkfState, ekf_predict, ekf_update
from .errors import DimensionError, InvalidConfigError, NumericError
from .metrics import MseSeries, average_series, mae_series, mse_series
from .statespace import DEFAULT_DT, NoiseSpec, constant_position_model, identity_measurement_model, random_walk_transition
from .ukf import DEFAULT_LAMBDA, UkfConfig, ukf_predict, ukf_update

MODES = ("deterministic", "stochastic")
FILTERS = ("EKF", "UKF")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "deterministic"
    dt: float = DEFAULT_DT
    lam: float = DEFAULT_LAMBDA
    q_det: float = 1e-6
    r_det: float = 1e-6
    sigma_velocity: float = 1.0
    sigma_process: float = 0.1
    sigma_measurement: float = 0.5
    realizations: int = 100
    seed: int = 0
    initial_cov_scale: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.dt > 0:
            raise InvalidConfigError(f"dt must be > 0, got {self.dt}")
        if not self.q_det > 0:
            raise InvalidConfigError(f"q_det must be > 0, got {self.q_det}")
        if not self.r_det > 0:
            raise InvalidConfigError(f"r_det must be > 0, got {self.r_det}")
        for name in ("sigma_velocity", "sigma_process", "sigma_measurement"):
            if not getattr(self, name) >= 0:
                raise InvalidConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise InvalidConfigError(f"realizations must be a positive integer, got {self.realizations}")
        if not self.initial_cov_scale > 0:
            raise InvalidConfigError(f"initial_cov_scale must be > 0, got {self.initial_cov_scale}")
        if not np.isfinite(self.lam):
            raise InvalidConfigError("lambda must be finite")

    def as_metadata(self) -> dict:
        meta = asdict(self)
        meta["lambda"] = meta.pop("lam")
        return meta


@dataclass(frozen=True)
class FilterRunResult:
    """Output of one filter on one trajectory (or the average over realizations).

    ``estimates`` has shape ``(K, 3N)``; ``measurements`` is the stream the
    filter consumed (for averaged results, the first realization's stream).
    """

    filter_label: str
    estimates: np.ndarray
    mse: MseSeries
    mae: np.ndarray
    measurements: Optional[np.ndarray] = None
    diagnostics: Optional[list] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.mse)


@dataclass(frozen=True)
class FilterComparison:
    winners: tuple
    ekf_wins: int
    ukf_wins: int
    ties: int
    mean_ekf: float
    mean_ukf: float
    ratio: float

    def summary(self) -> str:
        """Human-readable multi-line summary."""
        better = "tie" if self.mean_ekf == self.mean_ukf else ("UKF" if self.mean_ukf < self.mean_ekf else "EKF")
        return (
            f"mean MSE  EKF={self.mean_ekf:.6g}  UKF={self.mean_ukf:.6g}  UKF/EKF={self.ratio:.6g}\n"
            f"per-frame wins  EKF={self.ekf_wins}  UKF={self.ukf_wins}  ties={self.ties}  lower mean: {better}"
        )


# -- filter loops ----------------------------------------------------------

def _filter_ekf(measurements, Q, R, config: ExperimentConfig, keep_diagnostics: bool):
    n = measurements.shape[1]
    process, sensor = constant_position_model(), identity_measurement_model(n)
    state = EkfState(measurements[0].copy(), config.initial_cov_scale * np.eye(n))
    estimates, diags = [], []
    for k, z in enumerate(measurements):
        try:
            if k > 0:
                state = ekf_predict(state, process, Q, config.dt)
            state, diag = ekf_update(state, z, sensor, R)
        except NumericError as err:
            raise NumericError(f"EKF failed at frame {k}: {err}") from err
        estimates.append(state.mean)
        if keep_diagnostics:
            diags.append(diag)
    return np.array(estimates), (diags if keep_diagnostics else None)


def _filter_ukf(measurements, Q, R, config: ExperimentConfig, keep_diagnostics: bool):
    n = measurements.shape[1]
    process, sensor = constant_position_model(), identity_measurement_model(n)
    ukf_config = UkfConfig(n, config.lam)
    mean, cov = measurements[0].copy(), config.initial_cov_scale * np.eye(n)
    estimates, diags = [], []
    for k, z in enumerate(measurements):
        try:
            if k > 0:
                mean, cov = ukf_predict(mean, cov, process, Q, config.dt, ukf_config)
            mean, cov, diag = ukf_update(mean, cov, z, sensor, R, ukf_config)
        except NumericError as err:
            raise NumericError(f"UKF failed at frame {k}: {err}") from err
        estimates.append(mean)
        if keep_diagnostics:
            diags.append(diag)
    return np.array(estimates), (diags if keep_diagnostics else None)


def run_filters(truth: np.ndarray, measurements: np.ndarray, Q, R, config: ExperimentConfig,
                user_label: str = "user", keep_diagnostics: bool = False) -> tuple[FilterRunResult, FilterRunResult]:
    """Run EKF and UKF on one measurement stream and score them against ``truth``.

    Both filters start from the first measurement with covariance
    ``initial_cov_scale * I``; frame 0 is an update only, later frames are
    predict-then-update. Scores are taken after each update.
    """
    truth = np.asarray(truth, dtype=float)
    measurements = np.asarray(measurements, dtype=float)
    if truth.ndim != 2 or truth.shape != measurements.shape:
        raise DimensionError(f"truth {truth.shape} and measurements {measurements.shape} must match")
    if truth.shape[0] == 0:
        raise InvalidConfigError("trajectory is empty")
    results = []
    for label, runner in (("EKF", _filter_ekf), ("UKF", _filter_ukf)):
        estimates, diags = runner(measurements, Q, R, config, keep_diagnostics)
        results.append(FilterRunResult(
            label,
            estimates,
            mse_series(estimates, truth, label, user_label),
            mae_series(estimates, truth),
            measurements,
            diags,
        ))
    return results[0], results[1]


# -- experiments -------------------------------------------------------------

def _require(trajectory: Trajectory, config: ExperimentConfig, mode: str) -> None:
    if config.mode != mode:
        raise InvalidConfigError(f"config.mode is {config.mode!r}, expected {mode!r}")
    if len(trajectory) == 0:
        raise InvalidConfigError("trajectory is empty")


def run_deterministic(trajectory: Trajectory, config: ExperimentConfig,
                      keep_diagnostics: bool = False) -> tuple[FilterRunResult, FilterRunResult]:
    """Track the exact frames with ``Q = q_det I`` and ``R = r_det I``."""
    _require(trajectory, config, "deterministic")
    truth = trajectory.states()
    n = truth.shape[1]
    Q = config.q_det * np.eye(n)
    R = config.r_det * np.eye(n)
    return run_filters(truth, truth.copy(), Q, R, config, trajectory.user_label, keep_diagnostics)


def filter_noise(config: ExperimentConfig, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Filter-side ``Q`` and ``R``: the stochastic scales, floored at ``q_det``/``r_det``."""
    q = max(config.sigma_process**2, config.q_det)
    r = max(config.sigma_measurement**2, config.r_det)
    return q * np.eye(n), r * np.eye(n)


def simulate_realization(trajectory: Trajectory, config: ExperimentConfig, realization: int) -> tuple[np.ndarray, np.ndarray]:
    """Perturbed truth and noisy measurements for one realization, each ``(K, 3N)``."""
    frames = trajectory.states()
    K, n = frames.shape
    noise = NoiseSpec.from_scalars(n, config.sigma_process, config.sigma_measurement, config.sigma_velocity)
    velocity_cov = config.sigma_velocity**2 * np.eye(n)
    steps = max(K - 1, 0)
    v = gaussian_draws(make_rng(config.seed, realization, VELOCITY_STREAM), velocity_cov, steps)
    w = gaussian_draws(make_rng(config.seed, realization, PROCESS_STREAM), noise.process_cov, steps)
    offsets = np.zeros((K, n))
    for k in range(1, K):
        offsets[k] = random_walk_transition(offsets[k - 1], v[k - 1], w[k - 1], config.dt)
    truth = frames + offsets
    perturbed = Trajectory.from_states(truth, trajectory.user_label, trajectory.dt)
    return truth, synthesize_measurements(perturbed, noise, config.seed, realization)


def run_realization(trajectory: Trajectory, config: ExperimentConfig, realization: int) -> tuple[FilterRunResult, FilterRunResult]:
    truth, measurements = simulate_realization(trajectory, config, realization)
    Q, R = filter_noise(config, truth.shape[1])
    try:
        return run_filters(truth, measurements, Q, R, config, trajectory.user_label)
    except NumericError as err:
        raise NumericError(f"realization {realization}: {err}") from err


def _average_results(results: Sequence[FilterRunResult]) -> FilterRunResult:
    first = results[0]
    if len(results) == 1:
        return first
    base = first.estimates
    estimates = base + np.mean([r.estimates - base for r in results], axis=0)
    mae = np.mean([r.mae for r in results], axis=0)
    return FilterRunResult(first.filter_label, estimates, average_series([r.mse for r in results]), mae, first.measurements)


def run_stochastic(trajectory: Trajectory, config: ExperimentConfig) -> tuple[FilterRunResult, FilterRunResult]:
    """Monte Carlo average of EKF and UKF over ``config.realizations`` runs."""
    _require(trajectory, config, "stochastic")
    ekf_runs, ukf_runs = [], []
    for r in range(int(config.realizations)):
        ekf, ukf = run_realization(trajectory, config, r)
        ekf_runs.append(ekf)
        ukf_runs.append(ukf)
    return _average_results(ekf_runs), _average_results(ukf_runs)


def run_experiment(trajectory: Trajectory, config: ExperimentConfig) -> tuple[FilterRunResult, FilterRunResult]:
    if config.mode == "deterministic":
        return run_deterministic(trajectory, config)
    return run_stochastic(trajectory, config)


def compare_filters(ekf: FilterRunResult, ukf: FilterRunResult) -> FilterComparison:
    """Per-frame winner (lower MSE; exact equality is a tie) and mean MSE ratio UKF/EKF."""
    a, b = ekf.mse.values, ukf.mse.values
    if a.shape != b.shape:
        raise DimensionError(f"series lengths differ ({a.size} vs {b.size})")
    winners = tuple("tie" if x == y else ("UKF" if y < x else "EKF") for x, y in zip(a, b))
    mean_ekf = float(a.mean()) if a.size else 0.0
    mean_ukf = float(b.mean()) if b.size else 0.0
    if mean_ekf == mean_ukf:
        ratio = 1.0
    elif mean_ekf == 0.0:
        ratio = float("inf")
    else:
        ratio = mean_ukf / mean_ekf
    return FilterComparison(winners, winners.count("EKF"), winners.count("UKF"), winners.count("tie"),
                            mean_ekf, mean_ukf, ratio)


def with_mode(config: ExperimentConfig, mode: str) -> ExperimentConfig:
    return replace(config, mode=mode)
