import math

import numpy as np
import pytest

from greysvr.errors import DataError
from greysvr.metrics import (
    EvalReport,
    compare,
    directional_symmetry,
    evaluate,
    mae,
    mse,
    squared_correlation,
)


class TestMse:
    def test_identity(self):
        assert mse([1, 2, 3], [1, 2, 3]) == 0.0

    def test_unit_errors(self):
        assert mse([0, 0], [1, -1]) == 1.0

    def test_against_compensated_summation(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            y = rng.normal(scale=100.0, size=200)
            p = y + rng.normal(size=200)
            expected = math.fsum((a - b) ** 2 for a, b in zip(y, p)) / len(y)
            assert abs(mse(y, p) - expected) <= 1e-12 * expected

    def test_symmetric(self):
        rng = np.random.default_rng(4)
        y, p = rng.normal(size=50), rng.normal(size=50)
        assert mse(y, p) == mse(p, y)

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            mse([1, 2], [1])

    def test_empty(self):
        with pytest.raises(DataError):
            mse([], [])


class TestMae:
    def test_identity(self):
        assert mae([1, 2, 3], [1, 2, 3]) == 0.0

    def test_unit_errors(self):
        assert mae([0, 0], [1, -1]) == 1.0

    def test_jensen_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            y = rng.normal(size=30)
            p = rng.normal(size=30)
            assert mae(y, p) <= math.sqrt(mse(y, p)) + 1e-15


class TestDirectionalSymmetry:
    def test_perfect(self):
        y = [1.0, 3.0, 2.0, 5.0]
        assert directional_symmetry(y, y) == 100.0

    def test_hand_enumeration(self):
        # Steps: obs +1,-1,+2 vs pred -1,+2,0 -> products -,-,0 -> {0,0,1}.
        got = directional_symmetry([1, 2, 1, 3], [1, 0, 2, 2])
        assert abs(got - 100.0 / 3.0) < 1e-9

    def test_all_flipped(self):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        assert directional_symmetry(y, -y + 10.0) == 0.0

    def test_flat_prediction_counts_as_correct(self):
        assert directional_symmetry([1.0, 2.0, 3.0], [5.0, 5.0, 5.0]) == 100.0

    def test_short_series_rejected(self):
        with pytest.raises(DataError):
            directional_symmetry([1.0], [1.0])

    def test_order_matters(self):
        y = np.array([1.0, 2.0, 1.0, 2.0])
        p = np.array([2.0, 1.0, 2.0, 4.0])
        perm = np.array([1, 0, 2, 3])
        assert directional_symmetry(y, p) != directional_symmetry(y[perm], p[perm])


class TestSquaredCorrelation:
    def test_perfect_linear(self):
        y = np.array([1.0, 2.0, 4.0, 7.0])
        assert abs(squared_correlation(y, 2.0 * y + 1.0) - 1.0) < 1e-12

    def test_constant_side_undefined(self):
        assert squared_correlation([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) is None
        assert squared_correlation([1.0, 2.0, 3.0], [4.0, 4.0, 4.0]) is None

    def test_against_two_pass_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            y = rng.normal(size=40)
            p = 0.5 * y + rng.normal(size=40)
            expected = float(np.corrcoef(y, p)[0, 1] ** 2)
            assert abs(squared_correlation(y, p) - expected) < 1e-10

    def test_affine_invariance_positive_slope(self):
        rng = np.random.default_rng(7)
        y, p = rng.normal(size=25), rng.normal(size=25)
        base = squared_correlation(y, p)
        assert abs(squared_correlation(3.0 * y + 2.0, p) - base) < 1e-10
        assert abs(squared_correlation(y, 0.5 * p - 4.0) - base) < 1e-10

    def test_symmetric(self):
        rng = np.random.default_rng(8)
        y, p = rng.normal(size=25), rng.normal(size=25)
        assert squared_correlation(y, p) == squared_correlation(p, y)


class TestPermutationInvariance:
    def test_mse_mae_scc_invariant_ds_not_required(self):
        rng = np.random.default_rng(9)
        y, p = rng.normal(size=30), rng.normal(size=30)
        perm = rng.permutation(30)
        assert mse(y, p) == pytest.approx(mse(y[perm], p[perm]), rel=1e-12)
        assert mae(y, p) == pytest.approx(mae(y[perm], p[perm]), rel=1e-12)
        assert squared_correlation(y, p) == pytest.approx(
            squared_correlation(y[perm], p[perm]), rel=1e-10
        )


class TestEvaluate:
    def test_report_fields(self):
        rep = evaluate([1.0, 2.0, 3.0], [1.5, 2.0, 2.5])
        assert rep.n == 3
        assert rep.mse == pytest.approx((0.25 + 0 + 0.25) / 3)
        assert rep.mae == pytest.approx(1.0 / 3.0)
        assert 0.0 <= rep.ds <= 100.0
        assert rep.scc is None or 0.0 <= rep.scc <= 1.0

    def test_metric_accessor(self):
        rep = evaluate([1.0, 2.0], [1.0, 2.0])
        assert rep.metric("mse") == 0.0
        with pytest.raises(KeyError):
            rep.metric("rmse")


def _report(mse_v, mae_v, ds_v, scc_v):
    return EvalReport(n=10, mse=mse_v, mae=mae_v, ds=ds_v, scc=scc_v)


class TestCompare:
    def test_identical_reports(self):
        reps = [_report(1.0, 0.5, 60.0, 0.8), _report(2.0, 1.0, 50.0, 0.6)]
        summary = compare(reps, reps)
        assert all(v == 0 for v in summary.wins.values())
        assert all(v == 0.0 for v in summary.mean_improvement_pct.values())

    def test_halved_mse(self):
        b = [_report(2.0, 1.0, 50.0, 0.5) for _ in range(4)]
        a = [_report(1.0, 1.0, 50.0, 0.5) for _ in range(4)]
        summary = compare(a, b)
        assert summary.wins["mse"] == 4
        assert summary.mean_improvement_pct["mse"] == pytest.approx(50.0)
        assert summary.wins["mae"] == 0

    def test_mixed_hand_tally(self):
        a = [
            _report(1.0, 1.0, 60.0, 0.9),   # wins mse, mae ties, ds, scc
            _report(3.0, 0.5, 40.0, 0.2),   # loses mse, wins mae, loses ds, loses scc
            _report(2.0, 2.0, 50.0, None),  # ties everything, scc undefined
            _report(0.5, 0.1, 90.0, 0.99),  # wins all four
        ]
        b = [
            _report(2.0, 1.0, 50.0, 0.5),
            _report(1.0, 1.0, 70.0, 0.7),
            _report(2.0, 2.0, 50.0, 0.3),
            _report(5.0, 1.0, 10.0, 0.01),
        ]
        summary = compare(a, b)
        assert summary.n_stocks == 4
        assert summary.wins == {"mse": 2, "mae": 2, "ds": 2, "scc": 2}
        assert summary.counted == {"mse": 4, "mae": 4, "ds": 4, "scc": 3}

    def test_undefined_scc_excluded_from_mean(self):
        a = [_report(1.0, 1.0, 50.0, None), _report(1.0, 1.0, 50.0, 0.6)]
        b = [_report(1.0, 1.0, 50.0, 0.4), _report(1.0, 1.0, 50.0, 0.4)]
        summary = compare(a, b)
        assert summary.counted["scc"] == 1
        assert summary.mean_improvement_pct["scc"] == pytest.approx(50.0)

    def test_improvement_direction_for_scores(self):
        a = [_report(1.0, 1.0, 75.0, 0.5)]
        b = [_report(1.0, 1.0, 50.0, 0.5)]
        summary = compare(a, b)
        assert summary.mean_improvement_pct["ds"] == pytest.approx(50.0)

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            compare([_report(1, 1, 50, 0.5)], [])
