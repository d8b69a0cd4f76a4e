from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greysvr.errors import DataError
from greysvr.gca import (
    apply_initial_operator,
    grey_relational_coefficients,
    grey_relational_degrees,
    grey_weights,
    normalize_weights,
)


def exact_degrees(reference, factors, tau=Fraction(1, 2)):
    """Rational-arithmetic evaluation of the relational-degree formula.

    Independent oracle for the hand fixtures: no floats anywhere.
    """
    ref = [Fraction(v) for v in reference]
    fac = [[Fraction(v) for v in col] for col in factors]
    delta = [[abs(x - r) for x, r in zip(col, ref)] for col in fac]
    flat = [d for col in delta for d in col]
    d_max, d_min = max(flat), min(flat)
    if d_max == 0:
        return [Fraction(1)] * len(fac)
    coeff = [[(d_min + tau * d_max) / (d + tau * d_max) for d in col] for col in delta]
    return [sum(col) / len(col) for col in coeff]


class TestWorkedExample:
    """X_0 = [1,2,3], X_1 = X_0, X_2 = [2,4,6], tau = 0.5."""

    reference = [1.0, 2.0, 3.0]
    factors = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])

    def test_coefficients(self):
        gamma = grey_relational_coefficients(self.reference, self.factors, tau=0.5)
        assert np.allclose(gamma[0], [1.0, 1.0, 1.0], atol=1e-15)
        # Deltas [1,2,3] against m_min=0, M=3: (0 + 1.5)/(delta + 1.5).
        assert np.allclose(gamma[1], [1.5 / 2.5, 1.5 / 3.5, 1.5 / 4.5], atol=1e-15)

    def test_degrees_match_exact_arithmetic(self):
        deg = grey_relational_degrees(self.reference, self.factors, tau=0.5)
        exact = exact_degrees([1, 2, 3], [[1, 2, 3], [2, 4, 6]])
        assert exact == [Fraction(1), Fraction(143, 315)]
        assert abs(deg[0] - 1.0) < 1e-15
        assert abs(deg[1] - float(Fraction(143, 315))) < 1e-15
        assert abs(deg[1] - 0.453968) < 1e-6

    def test_weights_match_exact_arithmetic(self):
        gw = grey_weights(self.reference, self.factors, tau=0.5)
        # Continuing the fixture exactly: degrees [1, 143/315] normalize to
        # [315/458, 143/458] = [0.6877729..., 0.3122270...].
        assert abs(gw.weights[0] - float(Fraction(315, 458))) < 1e-12
        assert abs(gw.weights[1] - float(Fraction(143, 458))) < 1e-12
        assert abs(gw.weights.sum() - 1.0) < 1e-12


class TestDegrees:
    def test_all_factors_equal_reference(self):
        ref = [3.0, 1.0, 4.0]
        fac = np.column_stack([ref, ref])
        deg = grey_relational_degrees(ref, fac)
        assert deg.tolist() == [1.0, 1.0]

    def test_single_factor_single_point(self):
        # Delta = m_min = M, so the coefficient collapses to 1.
        deg = grey_relational_degrees([1.0], np.array([[2.0]]))
        assert deg.tolist() == [1.0]

    def test_degree_one_iff_delta_at_minimum(self):
        rng = np.random.default_rng(11)
        ref = rng.normal(size=12)
        fac = np.column_stack([ref, ref + rng.uniform(0.1, 1.0, size=12)])
        deg = grey_relational_degrees(ref, fac)
        assert deg[0] == 1.0
        assert deg[1] < 1.0

    def test_swap_two_factors_swaps_degrees_exactly(self):
        rng = np.random.default_rng(12)
        ref = rng.normal(size=9)
        fac = rng.normal(size=(9, 3))
        deg = grey_relational_degrees(ref, fac)
        swapped = grey_relational_degrees(ref, fac[:, [1, 0, 2]])
        assert deg[0] == swapped[1] and deg[1] == swapped[0] and deg[2] == swapped[2]

    def test_coefficient_bound_with_zero_min(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            n, m = rng.integers(2, 20), rng.integers(1, 5)
            ref = rng.normal(size=n)
            fac = rng.normal(size=(n, m))
            fac[0, 0] = ref[0]  # forces m_min = 0
            gamma = grey_relational_coefficients(ref, fac, tau=0.5)
            assert gamma.min() >= 1.0 / 3.0 - 1e-12
            assert gamma.max() <= 1.0 + 1e-12

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DataError):
            grey_relational_degrees([1.0, 2.0], np.zeros((3, 2)))

    def test_bad_tau_rejected(self):
        for tau in (0.0, -0.5, 1.5):
            with pytest.raises(DataError):
                grey_relational_degrees([1.0, 2.0], np.zeros((2, 1)), tau=tau)


class TestInitialOperator:
    def test_initial_value(self):
        out = apply_initial_operator([2.0, 4.0, 6.0], "initial-value")
        assert out.tolist() == [1.0, 2.0, 3.0]

    def test_none_is_identity(self):
        x = np.array([5.0, -1.0, 2.0])
        assert np.array_equal(apply_initial_operator(x, "none"), x)

    def test_zero_first_element_rejected(self):
        with pytest.raises(DataError):
            apply_initial_operator([0.0, 1.0, 2.0], "initial-value")

    def test_mean_operator(self):
        out = apply_initial_operator([2.0, 4.0], "mean")
        assert out.tolist() == [2.0 / 3.0, 4.0 / 3.0]

    def test_zero_mean_rejected(self):
        with pytest.raises(DataError):
            apply_initial_operator([-1.0, 1.0], "mean")

    def test_unknown_mode_rejected(self):
        with pytest.raises(DataError):
            apply_initial_operator([1.0], "zscore")


class TestNormalizeWeights:
    def test_symmetry(self):
        gw = normalize_weights([0.7, 0.7, 0.7])
        assert np.allclose(gw.weights, [1 / 3, 1 / 3, 1 / 3], atol=1e-15)

    def test_single_factor(self):
        assert normalize_weights([0.42]).weights.tolist() == [1.0]

    def test_non_positive_degree_rejected(self):
        with pytest.raises(DataError):
            normalize_weights([0.5, 0.0])

    @given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=8),
           st.floats(0.1, 100.0))
    def test_scale_invariance(self, degrees, c):
        base = normalize_weights(degrees).weights
        scaled = normalize_weights(np.asarray(degrees) * c).weights
        assert np.abs(base - scaled).max() < 1e-12

    @given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=8))
    def test_sums_to_one(self, degrees):
        gw = normalize_weights(degrees)
        assert abs(gw.weights.sum() - 1.0) < 1e-12
        # Division by a positive constant is monotone, so the weight ordering
        # never inverts the degree ordering (ties may appear under rounding).
        for i in range(len(degrees)):
            for j in range(len(degrees)):
                if gw.degrees[i] <= gw.degrees[j]:
                    assert gw.weights[i] <= gw.weights[j]
