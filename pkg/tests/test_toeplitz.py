"""Tests for toeplitz_roots.toeplitz module."""

import math

import numpy as np
import pytest

from toeplitz_roots.exceptions import RangeError
from toeplitz_roots.symbols import RationalMellin, mellin_eval
from toeplitz_roots.toeplitz import (
    ABSOLUTE_RESIDUAL_THRESHOLD,
    WeightedShift,
    compose_power,
    projection_weight,
    shift_of_symbol,
    truncated_matrix,
    verify_identity,
)

# phi = r + r^2
POLY = RationalMellin(2.0, (1.5,), (1.0, 2.0))


def _phi(r):
    return r + r ** 2


class TestShiftOfSymbol:
    """Test weights of quasihomogeneous operators."""

    def test_constant_symbol(self):
        """Test phi = 1 at p = 1 gives w_0 = 4/3."""
        s = shift_of_symbol(1, lambda z: 1.0 / z, 3)
        assert s.weights[0] == pytest.approx(4.0 / 3.0)
        assert s.k_max == 3

    def test_worked_example(self):
        """Test phi = r + r^2 at p = 2 gives w_0 = 11/5."""
        s = shift_of_symbol(2, POLY, 5)
        assert s.weights[0] == pytest.approx(11.0 / 5.0, rel=1e-14)

    @pytest.mark.parametrize("m, p", [(0.0, 2), (1.0, 3), (2.5, 4)])
    def test_monomial(self, m, p):
        """Test phi = r^m gives w_k = 2(k+p+1)/(2k+p+2+m)."""
        s = shift_of_symbol(p, lambda z: 1.0 / (z + m), 10)
        k = np.arange(11)
        np.testing.assert_allclose(s.weights, 2 * (k + p + 1) / (2 * k + p + 2 + m), rtol=1e-15)

    def test_validation(self):
        """Test bad ranges and weights."""
        with pytest.raises(RangeError):
            shift_of_symbol(2, POLY, -1)
        with pytest.raises(RangeError):
            WeightedShift(0, np.ones(3))
        with pytest.raises(RangeError):
            WeightedShift(1, np.array([1.0, np.nan]))


class TestComposePower:
    """Test compose_power."""

    def test_products(self):
        """Test W_k = w_k w_{k+1} for p = 2."""
        s = WeightedShift(1, np.array([1.0, 2.0, 3.0, 4.0]))
        composed = compose_power(s, 2)
        assert composed.p == 2
        np.testing.assert_array_equal(composed.weights, [2.0, 6.0, 12.0])
        np.testing.assert_array_equal(compose_power(s, 3, 0).weights, [6.0])

    def test_validation(self):
        """Test degree and length checks."""
        s = WeightedShift(1, np.ones(4))
        with pytest.raises(RangeError):
            compose_power(WeightedShift(2, np.ones(4)), 2)
        with pytest.raises(RangeError):
            compose_power(s, 2, 3)


class TestVerifyIdentity:
    """Test verify_identity."""

    def _pair(self):
        root = WeightedShift(1, np.arange(1.0, 9.0))
        return root, compose_power(root, 2)

    def test_exact(self):
        """Test an exact root passes."""
        root, target = self._pair()
        report = verify_identity(target, root, 2, tol=1e-12)
        assert report.passed
        assert report.max_residual == 0.0

    def test_perturbed_weight(self):
        """Test perturbing w_5 fails exactly the two products using it."""
        root, target = self._pair()
        weights = root.weights.copy()
        weights[5] *= 1.01
        report = verify_identity(target, WeightedShift(1, weights), 2, tol=1e-6)
        assert not report.passed
        assert report.failed_k == [4, 5]

    def test_absolute_residuals(self):
        """Test vanishing target weights are compared absolutely."""
        target = WeightedShift(2, np.array([0.0, 2.0]))
        root = WeightedShift(1, np.array([1e-13, 1.0, 2.0]))
        report = verify_identity(target, root, 2, tol=1e-12)
        assert report.absolute.tolist() == [True, False]
        assert report.passed
        assert 0.0 < ABSOLUTE_RESIDUAL_THRESHOLD

    def test_report_documents(self):
        """Test the report's JSON and CSV forms."""
        root, target = self._pair()
        weights = root.weights.copy()
        weights[0] = 0.0
        report = verify_identity(target, WeightedShift(1, weights), 2, tol=1e-6, k_max=2)
        data = report.to_dict()
        assert data["failed_k"] == [0]
        assert data["passed"] is False
        assert len(data["residuals"]) == 3
        lines = report.to_csv().splitlines()
        assert lines[0] == "k,residual,kind,passed"
        assert lines[1].endswith(",relative,0")

    def test_range(self):
        """Test k_max beyond the available weights."""
        root, target = self._pair()
        with pytest.raises(RangeError):
            verify_identity(target, root, 2, k_max=10)
        with pytest.raises(RangeError):
            verify_identity(target, root, 3)


class TestTruncatedMatrix:
    """Test finite sections."""

    def test_entries(self):
        """Test the subdiagonal entries in the orthonormal basis."""
        matrix = truncated_matrix(WeightedShift(1, np.ones(4)), 3)
        expected = np.zeros((3, 3))
        expected[1, 0] = math.sqrt(1 / 2)
        expected[2, 1] = math.sqrt(2 / 3)
        np.testing.assert_allclose(matrix, expected)

    def test_power_matches_composition(self):
        """Test the matrix power equals the section of the composed shift."""
        root = WeightedShift(1, np.linspace(1.0, 2.0, 12))
        cube = truncated_matrix(root, 8) @ truncated_matrix(root, 8) @ truncated_matrix(root, 8)
        composed = truncated_matrix(compose_power(root, 3), 8)
        np.testing.assert_allclose(cube, composed, rtol=1e-14)

    def test_complex_dtype(self):
        """Test complex weights give a complex matrix."""
        assert truncated_matrix(WeightedShift(2, np.ones(4) * 1j), 4).dtype == complex

    def test_size(self):
        """Test section sizes beyond the weights."""
        with pytest.raises(RangeError):
            truncated_matrix(WeightedShift(1, np.ones(4)), 5)


class TestProjectionWeight:
    """Test weights from the Bergman projection."""

    @pytest.mark.parametrize("k", [0, 1, 3])
    def test_matches_formula(self, k):
        """Test the area integral against 2(k+p+1) phi_hat(2k+p+2)."""
        value = projection_weight(_phi, 2, k)
        expected = 2 * (k + 3) * mellin_eval(POLY, 2 * k + 4)
        assert value.real == pytest.approx(expected, rel=1e-9)
        assert abs(value.imag) < 1e-12

    def test_other_frequency_vanishes(self):
        """Test a symbol of another degree has no component on the shift."""
        value = projection_weight(_phi, 2, 1, symbol=lambda r, th: np.exp(1j * th) * _phi(r))
        assert abs(value) < 1e-12
