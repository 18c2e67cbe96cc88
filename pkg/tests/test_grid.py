"""Tests for toeplitz_roots.grid module."""

import numpy as np
import pytest

from toeplitz_roots.exceptions import RangeError, UnsupportedSymbolError
from toeplitz_roots.grid import (
    MIN_GRID_SIZE,
    Grid,
    GridFunction,
    Interpolation,
    PchipInterpolation,
    QuinticInterpolation,
    TypeEnvelope,
    envelope_ratio,
    get_interpolation,
    graded_grid,
    grid_derivative,
    grid_eval,
    matched_grid,
    sample,
)


def _smooth(r, rc):
    return r ** 0.5 * rc ** 0.3 * (1.0 + r)


SMOOTH_ENVELOPE = TypeEnvelope((0.5,), 1.3)


class TestGradedGrid:
    """Test grid construction."""

    def test_hull_and_complements(self):
        """Test the hull is [delta, 1 - delta] with exact complements."""
        grid = graded_grid(64, 1e-8)
        lo, hi = grid.hull
        assert lo == pytest.approx(1e-8, rel=1e-12)
        assert grid.complements[-1] == pytest.approx(1e-8, rel=1e-12)
        assert hi < 1.0
        np.testing.assert_allclose(grid.nodes + grid.complements, 1.0, rtol=1e-15)

    def test_uniform_logit(self):
        """Test nodes are equally spaced in ln(r/(1-r))."""
        grid = graded_grid(32)
        steps = np.diff(grid.logit)
        np.testing.assert_allclose(steps, steps[0], rtol=1e-9)

    def test_asymmetric(self):
        """Test separate deltas at the two ends."""
        grid = graded_grid(32, 1e-12, 1e-3)
        assert grid.nodes[0] == pytest.approx(1e-12)
        assert grid.complements[-1] == pytest.approx(1e-3)

    def test_validation(self):
        """Test bad sizes, deltas and node orders."""
        with pytest.raises(RangeError):
            graded_grid(MIN_GRID_SIZE - 1)
        with pytest.raises(RangeError):
            graded_grid(32, 0.7)
        nodes = np.linspace(0.1, 0.9, 20)[::-1]
        with pytest.raises(RangeError):
            Grid.from_nodes(nodes)
        with pytest.raises(RangeError):
            Grid.from_nodes(np.linspace(0.0, 0.9, 20))

    def test_matched_density(self):
        """Test a matched grid keeps the reference spacing."""
        reference = graded_grid(128, 1e-6)
        wide = matched_grid(reference, 1e-24, 1e-6)
        ref_step = reference.logit[1] - reference.logit[0]
        step = wide.logit[1] - wide.logit[0]
        assert wide.size > reference.size
        assert step <= ref_step * (1.0 + 1e-9)
        assert wide.nodes[0] == pytest.approx(1e-24)


class TestTypeEnvelope:
    """Test TypeEnvelope arithmetic."""

    def test_exponents(self):
        """Test alpha, beta and the log power of a repeated minimum."""
        env = TypeEnvelope((0.75, 0.25, 0.25), 1.5)
        assert env.alpha == 0.25
        assert env.beta == 1.5
        assert env.multiplicity == 2
        assert env.log_power == 1

    def test_merge_and_derivative(self):
        """Test convolution adds lists and derivatives lower both exponents."""
        env = TypeEnvelope((0.5,), 0.5).merge(TypeEnvelope((1.0,), 0.25))
        assert env.a_list == (0.5, 1.0)
        assert env.beta_sum == 0.75
        d2 = env.derivative(2)
        assert (d2.alpha, d2.beta) == (-1.5, -1.25)

    def test_scaled(self):
        """Test r -> r^k scales the powers at 0 only."""
        env = TypeEnvelope((0.5, 1.0), 0.75).scaled(4)
        assert env.a_list == (2.0, 4.0)
        assert env.beta_sum == 0.75

    def test_log_weight(self):
        """Test the weight r^alpha (1-r)^(beta-1) ln(e/r)^l."""
        env = TypeEnvelope((0.5, 0.5), 2.0)
        r = np.array([0.1, 0.6])
        expected = r ** 0.5 * (1 - r) * (1 - np.log(r))
        np.testing.assert_allclose(np.exp(env.log_weight(r, 1 - r)), expected, rtol=1e-14)

    def test_dict(self):
        """Test the envelope document."""
        env = TypeEnvelope((0.5, 0.5), 2.0, 1)
        data = env.to_dict()
        assert data["log_power"] == 1 and data["alpha"] == -0.5
        assert TypeEnvelope.from_dict(data) == env

    def test_validation(self):
        """Test empty power lists and a non-positive beta sum."""
        with pytest.raises(RangeError):
            TypeEnvelope((), 1.0)
        with pytest.raises(RangeError):
            TypeEnvelope((1.0,), 0.0)


class TestInterpolationRegistry:
    """Test interpolation kinds."""

    def test_registered(self):
        """Test both kinds are registered."""
        assert Interpolation.__registry__["quintic"] is QuinticInterpolation
        assert Interpolation.__registry__["pchip"] is PchipInterpolation

    def test_unknown(self):
        """Test an unknown kind."""
        with pytest.raises(UnsupportedSymbolError):
            get_interpolation("linear")


class TestGridFunction:
    """Test GridFunction interpolation and documents."""

    @pytest.mark.parametrize("kind, rtol", [("quintic", 1e-6), ("pchip", 1e-3)])
    def test_interpolation_accuracy(self, kind, rtol):
        """Test envelope-normalized interpolation between nodes."""
        h = sample(_smooth, graded_grid(256), SMOOTH_ENVELOPE, with_complement=True,
                   interpolation=kind)
        r = np.array([1e-5, 0.013, 0.37, 0.81, 0.99999])
        np.testing.assert_allclose(h.evaluate(r), _smooth(r, 1 - r), rtol=rtol)

    def test_shape_mismatch(self):
        """Test values must match the nodes."""
        with pytest.raises(RangeError):
            GridFunction(graded_grid(32), np.zeros(31), SMOOTH_ENVELOPE)

    def test_complex(self):
        """Test complex samples survive the document form."""
        grid = graded_grid(32)
        h = GridFunction(grid, (1.0 + 2.0j) * grid.nodes, TypeEnvelope((1.0,), 1.0))
        assert h.is_complex
        data = h.to_dict()
        assert set(data["values"]) == {"re", "im"}
        back = GridFunction.from_dict(data)
        np.testing.assert_array_equal(back.values, h.values)
        assert h.to_csv().splitlines()[0] == "r,re,im"
        assert h.sup_norm() == pytest.approx(np.sqrt(5.0) * grid.nodes[-1])

    def test_real_document(self):
        """Test a real function's document and CSV."""
        grid = graded_grid(32)
        h = GridFunction(grid, grid.nodes.astype(complex), TypeEnvelope((1.0,), 1.0))
        assert not h.is_complex
        assert isinstance(h.to_dict()["values"], list)
        lines = h.to_csv().splitlines()
        assert lines[0] == "r,value"
        assert len(lines) == 33

    def test_malformed_document(self):
        """Test documents without values."""
        with pytest.raises(UnsupportedSymbolError):
            GridFunction.from_dict({"nodes": [0.5]})


class TestGridEval:
    """Test grid_eval."""

    def test_nodes_exact(self):
        """Test node points return the stored samples."""
        h = sample(_smooth, graded_grid(64), SMOOTH_ENVELOPE, with_complement=True)
        assert grid_eval(h, float(h.nodes[10])) == h.values[10]
        np.testing.assert_array_equal(grid_eval(h, h.nodes[:5]), h.values[:5])

    def test_hull(self):
        """Test points outside the node hull are rejected."""
        h = sample(_smooth, graded_grid(64, 1e-3), SMOOTH_ENVELOPE, with_complement=True)
        with pytest.raises(RangeError):
            grid_eval(h, 1e-4)
        with pytest.raises(RangeError):
            grid_eval(h, np.array([0.5, 0.9999]))

    def test_scalar_type(self):
        """Test scalar input returns a float."""
        h = sample(_smooth, graded_grid(64), SMOOTH_ENVELOPE, with_complement=True)
        assert isinstance(grid_eval(h, 0.5), float)


class TestGridDerivative:
    """Test finite-difference derivatives."""

    def test_cubic_is_exact(self):
        """Test five-point stencils differentiate cubics exactly."""
        grid = graded_grid(64, 1e-3)
        h = sample(lambda r, rc: r ** 2 * rc, grid, TypeEnvelope((2.0,), 2.0), with_complement=True)
        r, rc = grid.nodes, grid.complements
        d1 = grid_derivative(h, 1)
        d2 = grid_derivative(h, 2)
        np.testing.assert_allclose(d1.values, 2 * r - 3 * r ** 2, atol=1e-8)
        np.testing.assert_allclose(d2.values, 2 - 6 * r, atol=1e-6)
        assert d2.envelope.order == 2

    def test_orders(self):
        """Test unsupported derivative orders."""
        h = sample(_smooth, graded_grid(32), SMOOTH_ENVELOPE, with_complement=True)
        with pytest.raises(UnsupportedSymbolError):
            grid_derivative(h, 4)
        with pytest.raises(RangeError):
            grid_derivative(h, 0)


class TestEnvelopeRatio:
    """Test envelope_ratio."""

    def test_envelope_itself(self):
        """Test the envelope has ratio one everywhere."""
        env = TypeEnvelope((0.5, 0.5), 1.5)
        grid = graded_grid(64)
        h = GridFunction(grid, np.exp(env.log_weight(grid.nodes, grid.complements)), env)
        top, profile = envelope_ratio(h)
        assert top == pytest.approx(1.0, rel=1e-12)
        assert len(profile) == 64

    def test_derivative_ratio_bounded(self):
        """Test derivative ratios of a smooth product stay bounded."""
        h = sample(_smooth, graded_grid(128), SMOOTH_ENVELOPE, with_complement=True)
        top, _ = envelope_ratio(h, 1)
        assert np.isfinite(top)
        assert top < 10.0
