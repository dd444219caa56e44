import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from facekf.errors import AggregationError, DimensionError
from facekf.metrics import MseSeries, average_series, mae_at_step, mse_at_step, mse_series
from oracles import loop_mse

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize(
    "estimate, truth, expected",
    [
        ([1, 2, 3], [1, 2, 3], 0.0),
        ([2, 2, 3], [1, 2, 3], 1 / 3),
        ([0, 0], [3, 4], 12.5),
    ],
)
def test_mse_examples(estimate, truth, expected):
    assert mse_at_step(estimate, truth) == pytest.approx(expected, abs=1e-15)


def test_mae_example():
    assert mae_at_step([0, 0], [3, -4]) == 3.5


@pytest.mark.parametrize("fn", [mse_at_step, mae_at_step])
def test_length_mismatch(fn):
    with pytest.raises(DimensionError):
        fn([1.0, 2.0], [1.0])
    with pytest.raises(DimensionError):
        fn([], [])


def test_matches_loop_oracle():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 163))
        a, b = rng.uniform(-500, 500, n), rng.uniform(-500, 500, n)
        assert abs(mse_at_step(a, b) - loop_mse(a, b)) <= 1e-12 * max(1.0, loop_mse(a, b))


@given(arrays(float, st.integers(1, 162), elements=finite))
def test_zero_on_self(x):
    assert mse_at_step(x, x) == 0.0


@given(st.integers(1, 50).flatmap(lambda n: st.tuples(arrays(float, n, elements=finite), arrays(float, n, elements=finite))))
def test_symmetric(pair):
    a, b = pair
    assert mse_at_step(a, b) == mse_at_step(b, a)


def test_mse_series_rows():
    s = mse_series([[0, 0], [1, 1]], [[3, 4], [1, 1]], "EKF", "u1")
    np.testing.assert_array_equal(s.values, [12.5, 0.0])
    assert (s.filter_label, s.user_label, len(s)) == ("EKF", "u1", 2)


def test_series_invariants():
    with pytest.raises(ValueError):
        MseSeries([1.0, -0.1], "EKF", "u")
    with pytest.raises(ValueError):
        MseSeries([np.inf], "EKF", "u")
    with pytest.raises(DimensionError):
        MseSeries([[1.0]], "EKF", "u")


class TestAverageSeries:
    def test_single(self):
        s = MseSeries([0.1, 0.3, 0.7], "UKF", "u")
        np.testing.assert_array_equal(average_series([s]).values, s.values)

    def test_pointwise_mean(self):
        out = average_series([MseSeries([0, 2, 4], "EKF", "u"), MseSeries([2, 2, 0], "EKF", "u")])
        np.testing.assert_array_equal(out.values, [1, 2, 2])

    @pytest.mark.parametrize("c", [0.0, 0.1, 1 / 3, 7.123456789, 1e-300, 1e300])
    def test_constant_copies_exact(self, c):
        out = average_series([MseSeries([c, c], "EKF", "u")] * 100)
        np.testing.assert_array_equal(out.values, [c, c])

    @given(arrays(float, st.integers(1, 20), elements=st.floats(0, 1e6)), st.integers(1, 64))
    def test_copies_exact(self, values, k):
        s = MseSeries(values, "EKF", "u")
        np.testing.assert_array_equal(average_series([s] * k).values, values)

    def test_errors(self):
        with pytest.raises(AggregationError):
            average_series([])
        with pytest.raises(AggregationError):
            average_series([MseSeries([1, 2], "EKF", "u"), MseSeries([1], "EKF", "u")])
        with pytest.raises(AggregationError):
            average_series([MseSeries([1], "EKF", "u"), MseSeries([1], "UKF", "u")])
