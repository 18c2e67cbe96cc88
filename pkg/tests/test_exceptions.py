"""Tests for toeplitz_roots.exceptions module."""

import pytest

from toeplitz_roots.exceptions import (
    AccuracyError,
    DegenerateCalibrationError,
    PoleError,
    PositivityError,
    ProperError,
    RangeError,
    ToeplitzRootError,
    UnsupportedSymbolError,
)


class TestExceptions:
    """Test exception classes."""

    @pytest.mark.parametrize(
        "cls, category",
        [
            (PositivityError, "positivity"),
            (ProperError, "properness"),
            (UnsupportedSymbolError, "unsupported-symbol"),
            (AccuracyError, "accuracy"),
            (DegenerateCalibrationError, "accuracy"),
            (RangeError, "range"),
            (PoleError, "range"),
        ],
    )
    def test_categories(self, cls, category):
        """Test every error reports its category and is a ToeplitzRootError."""
        with pytest.raises(ToeplitzRootError, match="test error") as info:
            raise cls("test error")
        assert info.value.category == category

    def test_accuracy_fields(self):
        """Test AccuracyError carries its estimates."""
        exc = AccuracyError("did not converge", estimate=0.5, error_estimate=1e-3, node_index=7)
        assert (exc.estimate, exc.error_estimate, exc.node_index) == (0.5, 1e-3, 7)
        assert AccuracyError("plain").node_index is None

    def test_exception_catching(self):
        """Test that subclasses are caught through their parents."""
        with pytest.raises(RangeError):
            raise PoleError("pole")
        with pytest.raises(AccuracyError):
            raise DegenerateCalibrationError("degenerate")
