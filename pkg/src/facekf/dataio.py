"""Landmark files, trajectories, seeded noise and result tables.

Landmark files hold one frame each: N rows (default 54) of three
whitespace-separated decimals ``x y z`` in millimetres. Blank lines are
ignored.

Random numbers come from NumPy's Philox counter-based generator. Every
``(seed, realization, purpose)`` triple is mapped to its own stream through
``SeedSequence(seed, spawn_key=(realization, purpose))`` and Gaussian draws
use ``Generator.standard_normal`` (ziggurat). The same triple therefore
yields the same draws on every platform with IEEE doubles.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    DimensionError,
    FieldCountError,
    InvalidConfigError,
    LandmarkFileError,
    LandmarkFormatError,
    LandmarkParseError,
    NonPSDError,
)
from .statespace import DEFAULT_DT, NoiseSpec

DEFAULT_POINTS = 54
RESULTS_HEADER = ("user", "filter", "frame", "mse", "mae")
ESTIMATES_HEADER = ("user", "series", "frame", "landmark", "x", "y", "z")

# RNG stream purposes
VELOCITY_STREAM = 0
PROCESS_STREAM = 1
MEASUREMENT_STREAM = 2
SYNTH_STREAM = 3

PathOrStream = Union[str, os.PathLike, IO[str]]


def fmt(value: float) -> str:
    """Render a float with 12 significant digits."""
    return format(float(value), ".12g")


@dataclass(frozen=True)
class LandmarkFrame:
    """``landmarks`` is an ``(N, 3)`` array of x, y, z in millimetres."""

    landmarks: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        lm = np.asarray(self.landmarks, dtype=float)
        if lm.ndim != 2 or lm.shape[1] != 3:
            raise DimensionError(f"landmarks must have shape (N, 3), got {lm.shape}")
        if not np.all(np.isfinite(lm)):
            raise ValueError("landmark coordinates must be finite")
        if self.frame_index < 0:
            raise ValueError("frame_index must be >= 0")
        object.__setattr__(self, "landmarks", lm)

    @property
    def n_points(self) -> int:
        return self.landmarks.shape[0]


@dataclass(frozen=True)
class Trajectory:
    frames: tuple
    user_label: str = "user"
    dt: float = DEFAULT_DT

    def __post_init__(self):
        frames = tuple(self.frames)
        if frames:
            n = frames[0].n_points
            for i, frame in enumerate(frames):
                if frame.n_points != n:
                    raise DimensionError(f"frame {i} has {frame.n_points} landmarks, expected {n}")
                if frame.frame_index != i:
                    raise ValueError(f"frame_index must run 0..{len(frames) - 1}; position {i} has {frame.frame_index}")
        if not self.dt > 0:
            raise InvalidConfigError(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def n_points(self) -> int:
        return self.frames[0].n_points if self.frames else 0

    def states(self) -> np.ndarray:
        """All frames flattened, shape ``(K, 3N)``."""
        return np.array([flatten_frame(f) for f in self.frames]).reshape(len(self.frames), -1)

    @classmethod
    def from_states(cls, states, user_label: str = "user", dt: float = DEFAULT_DT) -> "Trajectory":
        return cls(tuple(unflatten_state(s, i) for i, s in enumerate(np.asarray(states, dtype=float))), user_label, dt)


# -- landmark files -----------------------------------------------------------

def parse_landmark_file(text: Union[str, IO[str]], n_points: int = DEFAULT_POINTS, frame_index: int = 0) -> LandmarkFrame:
    """Parse one landmark file (a string or a text stream).

    Raises :class:`FieldCountError` or :class:`LandmarkParseError` with the
    offending line number, and :class:`LandmarkFormatError` when the number of
    non-blank rows differs from ``n_points``.
    """
    if not isinstance(text, str):
        text = text.read()
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 3:
            raise FieldCountError(f"expected 3 fields, found {len(fields)}", line=lineno)
        try:
            values = [float(tok) for tok in fields]
        except ValueError:
            bad = next(tok for tok in fields if not _is_float(tok))
            raise LandmarkParseError(f"not a number: {bad!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise LandmarkParseError("non-finite coordinate", line=lineno)
        rows.append(values)
    if len(rows) != n_points:
        raise LandmarkFormatError(f"expected {n_points} rows, found {len(rows)}")
    return LandmarkFrame(np.array(rows, dtype=float).reshape(n_points, 3), frame_index)


def _is_float(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def serialize_frame(frame: LandmarkFrame) -> str:
    """Inverse of :func:`parse_landmark_file` at 12 significant digits."""
    return "".join(" ".join(fmt(v) for v in row) + "\n" for row in frame.landmarks)


def load_trajectory(paths: Sequence[Union[str, os.PathLike]], dt: float = DEFAULT_DT, user_label: str | None = None,
                    n_points: int = DEFAULT_POINTS) -> Trajectory:
    """Read one frame per file, in the order given."""
    paths = list(paths)
    if not paths:
        raise InvalidConfigError("at least one landmark file is required")
    frames = []
    for i, path in enumerate(paths):
        try:
            with open(path, encoding="utf-8") as fh:
                frames.append(parse_landmark_file(fh, n_points, frame_index=i))
        except LandmarkFileError as err:
            err.path = str(path)
            raise
    if user_label is None:
        user_label = Path(paths[0]).parent.name or "user"
    return Trajectory(tuple(frames), user_label, dt)


def discover_files(directory: Union[str, os.PathLike], pattern: str = "*.txt") -> list[Path]:
    """Files in ``directory`` matching ``pattern``, in natural (human) order."""
    return sorted((p for p in Path(directory).glob(pattern) if p.is_file()), key=natural_key)


def natural_key(path) -> list:
    parts = re.split(r"(\d+)", Path(path).name)
    return [int(p) if p.isdigit() else p for p in parts]


def flatten_frame(frame: LandmarkFrame) -> np.ndarray:
    """``[x_1, y_1, z_1, ..., x_N, y_N, z_N]``."""
    return frame.landmarks.reshape(-1).copy()


def unflatten_state(x, frame_index: int = 0) -> LandmarkFrame:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size % 3:
        raise DimensionError(f"state length must be a multiple of 3, got {x.shape}")
    return LandmarkFrame(x.reshape(-1, 3).copy(), frame_index)


# -- randomness ---------------------------------------------------------------

def make_rng(seed: int, realization: int = 0, purpose: int = 0) -> np.random.Generator:
    """Independent Philox stream for one ``(seed, realization, purpose)``."""
    ss = np.random.SeedSequence(int(seed) % 2**64, spawn_key=(int(realization), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))


def gaussian_factor(cov: np.ndarray) -> np.ndarray:
    """Matrix ``A`` with ``A A^T = cov`` for PSD (possibly singular) ``cov``."""
    cov = np.asarray(cov, dtype=float)
    if np.count_nonzero(cov - np.diag(np.diagonal(cov))) == 0:
        d = np.diagonal(cov)
        if np.any(d < 0):
            lo = float(d.min())
            raise NonPSDError(f"covariance is not PSD (smallest eigenvalue {lo:.3e})", lo)
        return np.diag(np.sqrt(d))
    w, V = np.linalg.eigh(0.5 * (cov + cov.T))
    if w.min() < -1e-9:
        raise NonPSDError(f"covariance is not PSD (smallest eigenvalue {w.min():.3e})", float(w.min()))
    return V * np.sqrt(np.clip(w, 0.0, None))


def gaussian_draws(rng: np.random.Generator, cov: np.ndarray, count: int) -> np.ndarray:
    """``count`` draws from ``N(0, cov)``, shape ``(count, dim)``."""
    cov = np.asarray(cov, dtype=float)
    if np.count_nonzero(cov - np.diag(np.diagonal(cov))) == 0:
        # diagonal: elementwise scaling keeps zero variances exactly zero
        scale = np.diagonal(gaussian_factor(cov))
        return rng.standard_normal((count, cov.shape[0])) * scale
    A = gaussian_factor(cov)
    return rng.standard_normal((count, cov.shape[0])) @ A.T


def synthesize_measurements(trajectory: Trajectory, noise: NoiseSpec, seed: int, realization: int = 0) -> np.ndarray:
    """Noisy observations ``z_k = x_k + v_k`` with ``v_k ~ N(0, R)``.

    Returns an array of shape ``(K, 3N)``.
    """
    truth = trajectory.states()
    R = noise.measurement_cov
    if R.shape[0] != truth.shape[1]:
        raise DimensionError(f"R has dimension {R.shape[0]}, state has {truth.shape[1]}")
    gaussian_factor(R)
    rng = make_rng(seed, realization, MEASUREMENT_STREAM)
    return truth + gaussian_draws(rng, R, truth.shape[0])


# -- synthetic data -----------------------------------------------------------

@dataclass(frozen=True)
class SynthSpec:
    """Face-like point cloud drifting rigidly along a sinusoid on each axis.

    Base landmarks are drawn uniformly in a box of ``face_size`` (mm) centred
    ``distance`` mm in front of the sensor. Each axis then drifts as
    ``amplitude * sin(2 pi f t + phase)`` with a seeded per-axis frequency in
    ``[0.5, 1.5] * frequency`` and a uniform phase.
    """

    n_points: int = DEFAULT_POINTS
    n_frames: int = 12
    seed: int = 1
    dt: float = DEFAULT_DT
    amplitude: float = 2.0
    frequency: float = 0.1
    face_size: tuple = (140.0, 180.0, 80.0)
    distance: float = 600.0

    def __post_init__(self):
        if self.n_points < 1 or self.n_frames < 1:
            raise InvalidConfigError("points and frames must be >= 1")
        if not self.dt > 0:
            raise InvalidConfigError("dt must be > 0")
        if self.amplitude < 0 or self.frequency < 0:
            raise InvalidConfigError("amplitude and frequency must be >= 0")


def synthetic_trajectory(spec: SynthSpec = SynthSpec(), user_label: str = "synthetic") -> Trajectory:
    rng = make_rng(spec.seed, 0, SYNTH_STREAM)
    half = np.asarray(spec.face_size) / 2.0
    base = rng.uniform(-half, half, size=(spec.n_points, 3))
    base[:, 2] += spec.distance
    freqs = spec.frequency * rng.uniform(0.5, 1.5, size=3)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
    t = np.arange(spec.n_frames) * spec.dt
    drift = spec.amplitude * np.sin(2.0 * np.pi * np.outer(t, freqs) + phases)
    frames = tuple(LandmarkFrame(base + drift[k], k) for k in range(spec.n_frames))
    return Trajectory(frames, user_label, spec.dt)


def write_trajectory(trajectory: Trajectory, directory: Union[str, os.PathLike], metadata: Mapping | None = None) -> list[Path]:
    """Write ``frame_000.txt``, ``frame_001.txt``, ... plus ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for frame in trajectory.frames:
        path = directory / f"frame_{frame.frame_index:03d}.txt"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize_frame(frame))
        paths.append(path)
    manifest = {
        "user": trajectory.user_label,
        "dt": trajectory.dt,
        "points": trajectory.n_points,
        "frames": [p.name for p in paths],
    }
    if metadata:
        manifest["generator"] = dict(metadata)
    with open(directory / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


# -- result tables ------------------------------------------------------------

def _open_for_write(destination: PathOrStream):
    if hasattr(destination, "write"):
        return destination, False
    return open(destination, "w", encoding="utf-8", newline=""), True


def _comment_block(metadata: Mapping | None) -> str:
    if not metadata:
        return ""
    return "".join(f"# {key}={value}\n" for key, value in metadata.items())


def result_rows(results: Iterable) -> list[tuple[str, str, int, float, float]]:
    """Flatten FilterRunResult-like objects to sorted ``(user, filter, frame, mse, mae)``."""
    rows = []
    for res in results:
        mse = res.mse.values
        mae = np.asarray(res.mae, dtype=float)
        if mae.shape != mse.shape:
            raise DimensionError(f"MSE and MAE series lengths differ ({mse.size} vs {mae.size})")
        for k in range(mse.size):
            rows.append((res.mse.user_label, res.filter_label, k, float(mse[k]), float(mae[k])))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def write_results_csv(results: Iterable, destination: PathOrStream, metadata: Mapping | None = None) -> None:
    """Write ``user,filter,frame,mse,mae`` rows, optionally preceded by ``# key=value`` lines."""
    rows = result_rows(results)
    fh, close = _open_for_write(destination)
    try:
        fh.write(_comment_block(metadata))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_HEADER)
        for user, filt, frame, mse, mae in rows:
            writer.writerow((user, filt, frame, fmt(mse), fmt(mae)))
    finally:
        if close:
            fh.close()


def write_results_json(results: Iterable, destination: PathOrStream, metadata: Mapping | None = None) -> None:
    """JSON mirror of :func:`write_results_csv`: ``{"config": ..., "rows": [...]}``."""
    rows = [dict(zip(RESULTS_HEADER, (u, f, k, float(fmt(m)), float(fmt(a))))) for u, f, k, m, a in result_rows(results)]
    fh, close = _open_for_write(destination)
    try:
        json.dump({"config": dict(metadata or {}), "rows": rows}, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def write_estimates_csv(truth: Trajectory, results: Iterable, destination: PathOrStream) -> None:
    """Long table of per-landmark coordinates: the truth plus each filter's estimates."""
    series = [("truth", truth.states())] + [(r.filter_label, np.asarray(r.estimates)) for r in results]
    fh, close = _open_for_write(destination)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ESTIMATES_HEADER)
        for label, states in sorted(series, key=lambda s: s[0]):
            for k, state in enumerate(states):
                for i, (x, y, z) in enumerate(state.reshape(-1, 3)):
                    writer.writerow((truth.user_label, label, k, i, fmt(x), fmt(y), fmt(z)))
    finally:
        if close:
            fh.close()


@dataclass
class Table:
    """A parsed CSV: ``#`` metadata lines and data rows keyed by header."""

    metadata: dict = field(default_factory=dict)
    header: tuple = ()
    rows: list = field(default_factory=list)


def read_table(source: PathOrStream, expected_header: Sequence[str]) -> Table:
    """Read a CSV written by this module; raises ``ValueError`` on malformed input."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    table = Table()
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                table.metadata[key] = value
        elif line.strip():
            body.append(line)
    reader = csv.reader(io.StringIO("\n".join(body)))
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise ValueError("empty table") from None
    if header != tuple(expected_header):
        raise ValueError(f"unexpected header {','.join(header)}; expected {','.join(expected_header)}")
    table.header = header
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise ValueError(f"row {lineno}: expected {len(header)} fields, found {len(row)}")
        table.rows.append(dict(zip(header, row)))
    return table
