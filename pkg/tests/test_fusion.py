"""Convex score fusion: formula exactness, constraints and convexity."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtifuse.errors import InvalidWeights
from dtifuse.fusion import WeightVector, merge, merge_with_weights


def exact_merge(ml, search, kg, w_ml, w_search, w_kg) -> Fraction:
    """Rational-arithmetic oracle for the convex combination."""
    return (
        Fraction(w_ml) * Fraction(ml)
        + Fraction(w_search) * Fraction(search)
        + Fraction(w_kg) * Fraction(kg)
    )


finite_scores = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


class TestWeightVector:
    def test_from_alpha_beta(self):
        weights = WeightVector.from_alpha_beta(0.3, 0.3)
        assert weights.ml == 0.3
        assert weights.search == 0.3
        assert weights.kg == pytest.approx(0.4, abs=1e-15)

    def test_rejects_negative_component(self):
        with pytest.raises(InvalidWeights):
            WeightVector(0.5, 0.6, -0.1)

    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidWeights):
            WeightVector(0.5, 0.4, 0.2)

    def test_rejects_alpha_beta_outside_open_region(self):
        for alpha, beta in [(0.0, 0.5), (0.5, 0.0), (0.5, 0.5), (1.0, 0.1), (-0.2, 0.4)]:
            with pytest.raises(InvalidWeights):
                WeightVector.from_alpha_beta(alpha, beta)

    def test_vertex_weights_allowed_directly(self):
        # The simplex itself is closed; only alpha/beta construction is open.
        assert WeightVector(1.0, 0.0, 0.0).as_tuple() == (1.0, 0.0, 0.0)


class TestMerge:
    def test_known_interaction_case(self):
        merged = merge(7.649889945983887, 0.27, 1.0, 0.3, 0.3)
        oracle = exact_merge(7.649889945983887, 0.27, 1.0, 0.3, 0.3, 1.0 - 0.3 - 0.3)
        assert abs(merged - float(oracle)) < 1e-12
        assert merged == pytest.approx(2.7759669837951663, abs=1e-12)

    def test_equal_scores_pass_through(self):
        for value in (0.0, 0.5, 7.3, -2.0):
            assert merge(value, value, value, 0.3, 0.3) == pytest.approx(value, abs=1e-12)

    def test_basis_vector(self):
        assert merge(1.0, 0.0, 0.0, 0.3, 0.3) == pytest.approx(0.3, abs=1e-15)

    def test_invalid_weights_rejected(self):
        with pytest.raises(InvalidWeights):
            merge(1.0, 1.0, 1.0, 0.7, 0.4)

    def test_non_finite_score_rejected(self):
        with pytest.raises(ValueError):
            merge(float("nan"), 0.5, 0.5, 0.3, 0.3)
        with pytest.raises(ValueError):
            merge(float("inf"), 0.5, 0.5, 0.3, 0.3)


class TestMergeWithWeights:
    def test_basis_vector_selects_score(self):
        assert merge_with_weights(5.0, 0.2, 0.9, WeightVector(1.0, 0.0, 0.0)) == 5.0

    def test_uniform_weights(self):
        third = 1.0 / 3.0
        merged = merge_with_weights(3.0, 0.0, 0.0, WeightVector(third, third, third))
        assert merged == pytest.approx(1.0, abs=1e-12)

    def test_moderate_interaction_case(self):
        # The direct formula value; differs from the published narrative
        # merged value for the same components (see README).
        merged = merge_with_weights(
            7.363409519195557, 0.33, 0.7213475204444817, WeightVector(0.3, 0.3, 0.4)
        )
        oracle = exact_merge(7.363409519195557, 0.33, 0.7213475204444817, 0.3, 0.3, 0.4)
        assert abs(merged - float(oracle)) < 1e-12
        assert merged == pytest.approx(2.59656186393646, abs=1e-12)

    def test_alpha_beta_path_is_bitwise_identical(self):
        scores = (7.363409519195557, 0.33, 0.7213475204444817)
        assert merge(*scores, 0.3, 0.3) == merge_with_weights(
            *scores, WeightVector.from_alpha_beta(0.3, 0.3)
        )


class TestProperties:
    @settings(max_examples=500, derandomize=True)
    @given(
        ml=finite_scores,
        search=finite_scores,
        kg=finite_scores,
        alpha=st.floats(0.01, 0.98),
        beta_fraction=st.floats(0.01, 0.99),
    )
    def test_convexity_and_formula(self, ml, search, kg, alpha, beta_fraction):
        beta = (1.0 - alpha) * beta_fraction
        if not (0.0 < beta < 1.0 and alpha + beta < 1.0):
            return
        merged = merge(ml, search, kg, alpha, beta)
        oracle = exact_merge(ml, search, kg, alpha, beta, 1.0 - alpha - beta)
        assert abs(merged - float(oracle)) < 1e-12
        assert min(ml, search, kg) - 1e-12 <= merged <= max(ml, search, kg) + 1e-12

    @settings(max_examples=200, derandomize=True)
    @given(
        ml=finite_scores, search=finite_scores, kg=finite_scores,
        k=st.floats(-3.0, 3.0), shift=st.floats(-3.0, 3.0),
    )
    def test_linearity(self, ml, search, kg, k, shift):
        weights = WeightVector.from_alpha_beta(0.3, 0.3)
        base = merge_with_weights(ml, search, kg, weights)
        scaled = merge_with_weights(k * ml, k * search, k * kg, weights)
        assert scaled == pytest.approx(k * base, abs=1e-9)
        shifted = merge_with_weights(ml + shift, search + shift, kg + shift, weights)
        assert shifted == pytest.approx(base + shift, abs=1e-9)
