import numpy as np
import pytest
from hypothesis import given, strategies as st

from greysvr.errors import DataError
from greysvr.preprocess import (
    MadClampParams,
    RangeParams,
    apply_mad_clamp,
    apply_range,
    fit_range,
    invert_range,
    mad_clamp,
    range_normalize,
)

finite_floats = st.floats(min_value=-1e9, max_value=1e9, allow_nan=False)


class TestMadClamp:
    def test_hand_fixture(self):
        out, params = mad_clamp([1, 2, 3, 4, 100], k=5)
        assert params.median == 3.0
        assert params.mad == 1.0
        assert params.lower == -2.0
        assert params.upper == 8.0
        assert out.tolist() == [1.0, 2.0, 3.0, 4.0, 8.0]

    def test_constant_input_degenerate_band(self):
        out, params = mad_clamp([5, 5, 5, 5])
        assert params.mad == 0.0
        assert out.tolist() == [5.0, 5.0, 5.0, 5.0]

    def test_identity_inside_band(self):
        x = np.array([10.0, 11.0, 9.5, 10.2, 10.8])
        out, _ = mad_clamp(x, k=50)
        assert np.array_equal(out, x)

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            mad_clamp([])

    def test_bad_k_rejected(self):
        with pytest.raises(DataError):
            mad_clamp([1.0, 2.0], k=0)

    @given(st.lists(finite_floats, min_size=1, max_size=40), st.floats(0.5, 10.0))
    def test_fixed_param_idempotence(self, xs, k):
        clamped, params = mad_clamp(xs, k=k)
        again = apply_mad_clamp(clamped, params)
        assert np.array_equal(again, clamped)

    @given(st.lists(finite_floats, min_size=1, max_size=40))
    def test_length_and_order_preserved(self, xs):
        out, params = mad_clamp(xs)
        assert len(out) == len(xs)
        # Clamping is monotone, so pairwise order is never inverted.
        x = np.asarray(xs, dtype=float)
        for i in range(len(xs) - 1):
            if x[i] <= x[i + 1]:
                assert out[i] <= out[i + 1]

    def test_preexisting_params_apply_to_new_data(self):
        params = MadClampParams(median=0.0, mad=1.0, k=2.0)
        out = apply_mad_clamp([-10.0, 0.0, 10.0], params)
        assert out.tolist() == [-2.0, 0.0, 2.0]


class TestRangeNormalize:
    def test_endpoints_and_midpoint(self):
        out, params = range_normalize([0, 5, 10])
        assert out.tolist() == [-1.0, 0.0, 1.0]
        assert (params.lo, params.hi) == (0.0, 10.0)

    def test_already_normalized(self):
        out, _ = range_normalize([-1, 1])
        assert out.tolist() == [-1.0, 1.0]

    def test_hand_fixture(self):
        out, _ = range_normalize([3, 7, 4, 6])
        assert out.tolist() == [-1.0, 1.0, -0.5, 0.5]

    def test_constant_column_rejected(self):
        with pytest.raises(DataError, match="constant column"):
            range_normalize([2.0, 2.0, 2.0])

    def test_invert_fixture(self):
        out = invert_range([-1, 0, 1], RangeParams(lo=0.0, hi=10.0))
        assert out.tolist() == [0.0, 5.0, 10.0]

    def test_round_trip_on_random_vectors(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            x = rng.uniform(-1e4, 1e4, size=rng.integers(2, 50))
            if x.max() == x.min():
                continue
            normed, params = range_normalize(x)
            back = invert_range(normed, params)
            scale = max(1.0, np.abs(x).max())
            assert np.abs(back - x).max() / scale < 1e-12

    @given(st.lists(finite_floats, min_size=2, max_size=40))
    def test_output_within_unit_interval(self, xs):
        x = np.asarray(xs, dtype=float)
        if x.max() == x.min():
            with pytest.raises(DataError):
                range_normalize(x)
            return
        out, _ = range_normalize(x)
        assert out.min() >= -1.0 and out.max() <= 1.0
        assert out.min() == -1.0 and out.max() == 1.0

    def test_fit_and_apply_split(self):
        params = fit_range([0.0, 10.0])
        # Data outside the fitted span exceeds [-1, 1] by design.
        out = apply_range([-5.0, 15.0], params)
        assert out.tolist() == [-2.0, 2.0]
