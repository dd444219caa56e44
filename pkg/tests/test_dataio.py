import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from facekf.dataio import (
    RESULTS_HEADER,
    LandmarkFrame,
    SynthSpec,
    Trajectory,
    discover_files,
    flatten_frame,
    gaussian_draws,
    load_trajectory,
    make_rng,
    parse_landmark_file,
    read_table,
    serialize_frame,
    synthesize_measurements,
    synthetic_trajectory,
    unflatten_state,
    write_results_csv,
    write_results_json,
    write_trajectory,
)
from facekf.errors import (
    DimensionError,
    FieldCountError,
    LandmarkFileError,
    LandmarkFormatError,
    LandmarkParseError,
    NonPSDError,
)
from facekf.metrics import MseSeries
from facekf.statespace import NoiseSpec


class FakeResult:
    def __init__(self, filter_label, user, mse, mae):
        self.filter_label = filter_label
        self.mse = MseSeries(mse, filter_label, user)
        self.mae = np.asarray(mae, dtype=float)


def zero_file(n=54):
    return "0.0 0.0 0.0\n" * n


class TestParse:
    def test_zero_file(self):
        frame = parse_landmark_file(zero_file())
        assert frame.landmarks.shape == (54, 3)
        assert not frame.landmarks.any()

    def test_mixed_delimiters(self):
        frame = parse_landmark_file("12.5\t-3.25 100.0\n" + zero_file(53))
        np.testing.assert_array_equal(frame.landmarks[0], [12.5, -3.25, 100.0])

    def test_blank_lines_skipped(self):
        frame = parse_landmark_file("\n1 2 3\n\n   \n4 5 6\n", n_points=2)
        np.testing.assert_array_equal(frame.landmarks, [[1, 2, 3], [4, 5, 6]])

    def test_row_count(self):
        with pytest.raises(LandmarkFormatError, match="expected 54 rows, found 53"):
            parse_landmark_file(zero_file(53))

    @pytest.mark.parametrize("line", ["1 2", "1 2 3 4"])
    def test_field_count(self, line):
        with pytest.raises(FieldCountError) as info:
            parse_landmark_file(f"1 2 3\n{line}\n", n_points=2)
        assert info.value.line == 2

    def test_non_numeric(self):
        with pytest.raises(LandmarkParseError, match="'abc'") as info:
            parse_landmark_file("1 2 3\n4 5 6\n7 abc 9\n", n_points=3)
        assert info.value.line == 3
        assert "line 3" in str(info.value)

    def test_non_finite(self):
        with pytest.raises(LandmarkParseError) as info:
            parse_landmark_file("1 nan 3\n", n_points=1)
        assert info.value.line == 1

    def test_stream_input(self):
        assert parse_landmark_file(io.StringIO("1 2 3\n"), n_points=1).landmarks.tolist() == [[1, 2, 3]]

    @settings(max_examples=100)
    @given(arrays(float, st.tuples(st.integers(1, 60), st.just(3)),
                  elements=st.floats(-1e4, 1e4, allow_nan=False, allow_infinity=False)))
    def test_round_trip(self, pts):
        pts = np.array([[float(f"{v:.12g}") for v in row] for row in pts])
        frame = LandmarkFrame(pts)
        back = parse_landmark_file(serialize_frame(frame), n_points=len(pts))
        np.testing.assert_array_equal(back.landmarks, pts)


class TestLoad:
    def _write(self, directory, n_files, n_points=54):
        paths = []
        for i in range(n_files):
            p = directory / f"frame_{i}.txt"
            p.write_text(f"{i} {i} {i}\n" * n_points)
            paths.append(p)
        return paths

    def test_twelve_files(self, tmp_path):
        user = tmp_path / "user_03"
        user.mkdir()
        traj = load_trajectory(self._write(user, 12), dt=0.01)
        assert len(traj) == 12
        assert [f.frame_index for f in traj.frames] == list(range(12))
        assert traj.user_label == "user_03"
        assert traj.states().shape == (12, 162)
        np.testing.assert_array_equal(traj.states()[11], 11.0)

    def test_single_file(self, tmp_path):
        traj = load_trajectory(self._write(tmp_path, 1), user_label="solo")
        assert len(traj) == 1 and traj.user_label == "solo"

    def test_malformed_file_named(self, tmp_path):
        paths = self._write(tmp_path, 3)
        paths[1].write_text(zero_file(53))
        with pytest.raises(LandmarkFileError) as info:
            load_trajectory(paths)
        assert str(paths[1]) in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_trajectory([tmp_path / "nope.txt"])

    def test_natural_order(self, tmp_path):
        for name in ["f10.txt", "f2.txt", "f1.txt", "notes.md"]:
            (tmp_path / name).write_text("1 2 3\n")
        assert [p.name for p in discover_files(tmp_path)] == ["f1.txt", "f2.txt", "f10.txt"]

    def test_trajectory_invariants(self):
        a, b = LandmarkFrame(np.zeros((2, 3)), 0), LandmarkFrame(np.zeros((3, 3)), 1)
        with pytest.raises(DimensionError):
            Trajectory((a, b))
        with pytest.raises(ValueError):
            Trajectory((a, LandmarkFrame(np.zeros((2, 3)), 2)))


class TestFlatten:
    def test_example(self):
        np.testing.assert_array_equal(flatten_frame(LandmarkFrame([[1, 2, 3], [4, 5, 6]])), [1, 2, 3, 4, 5, 6])

    def test_zeros(self):
        np.testing.assert_array_equal(flatten_frame(LandmarkFrame(np.zeros((54, 3)))), np.zeros(162))

    @given(arrays(float, st.tuples(st.integers(1, 60), st.just(3)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)))
    def test_inverse(self, pts):
        frame = LandmarkFrame(pts, 4)
        back = unflatten_state(flatten_frame(frame), 4)
        np.testing.assert_array_equal(back.landmarks, frame.landmarks)
        np.testing.assert_array_equal(flatten_frame(back), pts.ravel())

    def test_bad_length(self):
        with pytest.raises(DimensionError):
            unflatten_state(np.zeros(5))


class TestSynthesize:
    def test_zero_noise_is_exact(self):
        traj = synthetic_trajectory(SynthSpec(n_points=5, n_frames=4))
        z = synthesize_measurements(traj, NoiseSpec.from_scalars(15, 0.0, 0.0), seed=3)
        np.testing.assert_array_equal(z, traj.states())

    def test_mean_is_unbiased(self):
        traj = Trajectory.from_states(np.zeros((10_000, 6)))
        z = synthesize_measurements(traj, NoiseSpec.from_scalars(6, 0.0, 1.0), seed=11)
        assert np.abs(z.mean(axis=0)).max() < 0.05

    def test_seed_sensitivity_and_repeatability(self):
        traj = synthetic_trajectory(SynthSpec(n_points=3, n_frames=5))
        noise = NoiseSpec.from_scalars(9, 0.0, 1.0)
        a = synthesize_measurements(traj, noise, seed=1)
        assert a.tobytes() == synthesize_measurements(traj, noise, seed=1).tobytes()
        assert not np.array_equal(a, synthesize_measurements(traj, noise, seed=2))
        assert not np.array_equal(a, synthesize_measurements(traj, noise, seed=1, realization=1))

    def test_full_covariance(self):
        rng = make_rng(5)
        cov = np.array([[2.0, 0.8], [0.8, 1.0]])
        draws = gaussian_draws(rng, cov, 200_000)
        np.testing.assert_allclose(np.cov(draws.T), cov, atol=0.03)

    def test_non_psd_rejected(self):
        with pytest.raises(NonPSDError):
            gaussian_draws(make_rng(0), np.array([[1.0, 2.0], [2.0, 1.0]]), 3)
        with pytest.raises(NonPSDError):
            gaussian_draws(make_rng(0), np.diag([1.0, -1.0]), 3)

    def test_streams_are_independent(self):
        a = make_rng(9, 0, 0).standard_normal(4)
        b = make_rng(9, 0, 1).standard_normal(4)
        c = make_rng(9, 1, 0).standard_normal(4)
        assert not np.array_equal(a, b) and not np.array_equal(a, c)
        np.testing.assert_array_equal(a, make_rng(9, 0, 0).standard_normal(4))


class TestSynthetic:
    def test_shape_and_determinism(self):
        a = synthetic_trajectory(SynthSpec(seed=1))
        b = synthetic_trajectory(SynthSpec(seed=1))
        assert len(a) == 12 and a.n_points == 54
        assert a.states().tobytes() == b.states().tobytes()
        assert not np.array_equal(a.states(), synthetic_trajectory(SynthSpec(seed=2)).states())

    def test_write_and_reload(self, tmp_path):
        traj = synthetic_trajectory(SynthSpec(n_points=4, n_frames=3))
        paths = write_trajectory(traj, tmp_path, {"seed": 1})
        assert len(paths) == 3
        back = load_trajectory(paths, n_points=4)
        np.testing.assert_allclose(back.states(), traj.states(), rtol=1e-11)
        assert len(json.loads((tmp_path / "manifest.json").read_text())["frames"]) == 3


class TestResultsCsv:
    def test_empty_is_header_only(self):
        buf = io.StringIO()
        write_results_csv([], buf)
        assert buf.getvalue() == "user,filter,frame,mse,mae\n"

    def test_rows_sorted_and_formatted(self):
        buf = io.StringIO()
        write_results_csv([FakeResult("UKF", "u", [0.5, 1 / 3], [0.1, 0.2]),
                           FakeResult("EKF", "u", [0.25, 2.0], [0.3, 0.4])], buf, {"seed": 7})
        lines = buf.getvalue().split("\n")
        assert lines[0] == "# seed=7"
        assert lines[1] == ",".join(RESULTS_HEADER)
        assert lines[2:4] == ["u,EKF,0,0.25,0.3", "u,EKF,1,2,0.4"]
        assert lines[5] == "u,UKF,1,0.333333333333,0.2"
        assert "\r" not in buf.getvalue()

    def test_one_result_two_rows(self, tmp_path):
        dest = tmp_path / "r.csv"
        write_results_csv([FakeResult("EKF", "u", [1.0, 2.0], [1.0, 1.0])], dest)
        assert len(read_table(dest, RESULTS_HEADER).rows) == 2

    def test_byte_identical(self, tmp_path):
        res = [FakeResult("EKF", "u", [1 / 7, 2 / 7], [0.1, 0.2])]
        write_results_csv(res, tmp_path / "a.csv", {"k": 1})
        write_results_csv(res, tmp_path / "b.csv", {"k": 1})
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            write_results_csv([], tmp_path / "missing" / "r.csv")

    def test_json_mirror(self):
        buf = io.StringIO()
        write_results_json([FakeResult("EKF", "u", [1.0], [0.5])], buf, {"seed": 3})
        doc = json.loads(buf.getvalue())
        assert doc["config"] == {"seed": 3}
        assert doc["rows"] == [{"user": "u", "filter": "EKF", "frame": 0, "mse": 1.0, "mae": 0.5}]

    def test_read_table_metadata_and_errors(self):
        table = read_table(io.StringIO("# a=1\nuser,filter,frame,mse,mae\nu,EKF,0,1,1\n"), RESULTS_HEADER)
        assert table.metadata == {"a": "1"}
        with pytest.raises(ValueError):
            read_table(io.StringIO("x,y\n"), RESULTS_HEADER)
        with pytest.raises(ValueError):
            read_table(io.StringIO("user,filter,frame,mse,mae\nu,EKF\n"), RESULTS_HEADER)
        with pytest.raises(ValueError):
            read_table(io.StringIO(""), RESULTS_HEADER)
