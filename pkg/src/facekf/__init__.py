"""Extended and unscented Kalman filters for 3D facial landmark tracking."""

__version__ = "0.1.0"

from .dataio import (
    LandmarkFrame,
    SynthSpec,
    Trajectory,
    flatten_frame,
    load_trajectory,
    parse_landmark_file,
    synthesize_measurements,
    synthetic_trajectory,
    unflatten_state,
    write_results_csv,
)
from .ekf import EkfState, ekf_predict, ekf_update
from .errors import (
    DimensionError,
    FaceKFError,
    InvalidConfigError,
    NonPSDError,
    NumericError,
    SingularUpdateError,
)
from .experiments import (
    ExperimentConfig,
    FilterRunResult,
    compare_filters,
    run_deterministic,
    run_stochastic,
)
from .metrics import MseSeries, average_series, mae_at_step, mse_at_step
from .statespace import (
    MeasurementModel,
    NoiseSpec,
    ProcessModel,
    constant_position_model,
    constant_position_transition,
    finite_difference_jacobian,
    identity_measurement,
    identity_measurement_model,
    linear_measurement_model,
    linear_process_model,
    random_walk_transition,
)
from .ukf import (
    SigmaPointSet,
    UkfConfig,
    compute_weights,
    generate_sigma_points,
    matrix_sqrt,
    ukf_predict,
    ukf_update,
    unscented_transform,
)

__all__ = [
    "DimensionError",
    "EkfState",
    "ExperimentConfig",
    "FaceKFError",
    "FilterRunResult",
    "InvalidConfigError",
    "LandmarkFrame",
    "MeasurementModel",
    "MseSeries",
    "NoiseSpec",
    "NonPSDError",
    "NumericError",
    "ProcessModel",
    "SigmaPointSet",
    "SingularUpdateError",
    "SynthSpec",
    "Trajectory",
    "UkfConfig",
    "average_series",
    "compare_filters",
    "compute_weights",
    "constant_position_model",
    "constant_position_transition",
    "ekf_predict",
    "ekf_update",
    "finite_difference_jacobian",
    "flatten_frame",
    "generate_sigma_points",
    "identity_measurement",
    "identity_measurement_model",
    "linear_measurement_model",
    "linear_process_model",
    "load_trajectory",
    "mae_at_step",
    "matrix_sqrt",
    "mse_at_step",
    "parse_landmark_file",
    "random_walk_transition",
    "run_deterministic",
    "run_stochastic",
    "synthesize_measurements",
    "synthetic_trajectory",
    "ukf_predict",
    "ukf_update",
    "unflatten_state",
    "unscented_transform",
    "write_results_csv",
]
