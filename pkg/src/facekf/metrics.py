"""Per-frame error metrics and Monte Carlo averaging."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AggregationError, DimensionError


@dataclass(frozen=True)
class MseSeries:
    """MSE (mm^2) per time step for one filter on one user's trajectory."""

    values: np.ndarray
    filter_label: str
    user_label: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DimensionError(f"MSE series must be 1-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("MSE values must be finite and >= 0")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


def _paired(estimate, truth) -> tuple[np.ndarray, np.ndarray]:
    estimate = np.asarray(estimate, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if estimate.size != truth.size:
        raise DimensionError(f"length mismatch: estimate {estimate.size}, truth {truth.size}")
    if estimate.size == 0:
        raise DimensionError("cannot score empty vectors")
    return estimate, truth


def mse_at_step(estimate, truth) -> float:
    """Mean of the squared component errors."""
    estimate, truth = _paired(estimate, truth)
    diff = estimate - truth
    return float(np.mean(diff * diff))


def mae_at_step(estimate, truth) -> float:
    """Mean of the absolute component errors."""
    estimate, truth = _paired(estimate, truth)
    return float(np.mean(np.abs(estimate - truth)))


def mse_series(estimates, truths, filter_label: str, user_label: str) -> MseSeries:
    """MSE for each row pair of ``estimates`` and ``truths``."""
    estimates = np.asarray(estimates, dtype=float)
    truths = np.asarray(truths, dtype=float)
    if estimates.shape != truths.shape:
        raise DimensionError(f"shape mismatch: {estimates.shape} vs {truths.shape}")
    return MseSeries(np.array([mse_at_step(e, t) for e, t in zip(estimates, truths)]), filter_label, user_label)


def mae_series(estimates, truths) -> np.ndarray:
    estimates = np.asarray(estimates, dtype=float)
    truths = np.asarray(truths, dtype=float)
    if estimates.shape != truths.shape:
        raise DimensionError(f"shape mismatch: {estimates.shape} vs {truths.shape}")
    return np.array([mae_at_step(e, t) for e, t in zip(estimates, truths)])


def average_series(series: Sequence[MseSeries]) -> MseSeries:
    """Pointwise arithmetic mean of equally long, equally labelled series.

    Summation runs over the input order, so the result does not depend on
    how the series were produced.
    """
    series = list(series)
    if not series:
        raise AggregationError("cannot average an empty collection of series")
    first = series[0]
    for s in series[1:]:
        if len(s) != len(first):
            raise AggregationError(f"ragged series: lengths {len(first)} and {len(s)}")
        if (s.filter_label, s.user_label) != (first.filter_label, first.user_label):
            raise AggregationError(
                f"label mismatch: {(first.filter_label, first.user_label)} vs {(s.filter_label, s.user_label)}"
            )
    stacked = np.vstack([s.values for s in series])
    # offset by the first series so that averaging identical copies is exact
    base = stacked[0]
    mean = np.maximum(base + (stacked - base).mean(axis=0), 0.0)
    return MseSeries(mean, first.filter_label, first.user_label)
