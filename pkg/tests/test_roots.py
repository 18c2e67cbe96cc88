"""Tests for toeplitz_roots.roots module."""

import json

import numpy as np
import pytest

from toeplitz_roots.exceptions import (
    DegenerateCalibrationError,
    PositivityError,
    RangeError,
    UnsupportedSymbolError,
)
from toeplitz_roots.gammafactor import factorize
from toeplitz_roots.roots import (
    CONSISTENCY_POINTS,
    RootOptions,
    RootProblem,
    calibrate_constant,
    candidate_from_psi,
    construct_root,
    identity_report,
    literal_h,
    load_psi,
    psi_mellin,
    result_to_dict,
    root_shift,
    target_shift,
    write_result,
)
from toeplitz_roots.specialfun import QuadratureSpec
from toeplitz_roots.symbols import QuasihomogeneousSymbol, RadialTermSum, RationalMellin, mellin_eval
from toeplitz_roots.toeplitz import truncated_matrix

from .conftest import monomial_symbol, poly_symbol


def _interior(grid, lo=1e-4, hi=0.999):
    return (grid.nodes > lo) & (grid.nodes < hi)


class TestRootOptions:
    """Test RootOptions and RootProblem validation."""

    def test_defaults(self):
        """Test default options."""
        options = RootOptions()
        assert options.grid_size == 256
        assert options.pairing == "optimized"
        assert options.active_tolerance == 1e-6
        assert RootOptions(mode="numeric").active_tolerance == 1e-4
        assert options.interpolation == "quintic"
        assert RootOptions(interpolation="pchip").interpolation == "pchip"

    def test_validation(self):
        """Test unknown modes and bad ranges."""
        with pytest.raises(UnsupportedSymbolError):
            RootOptions(mode="exact")
        with pytest.raises(RangeError):
            RootOptions(k_max=-1)
        with pytest.raises(RangeError):
            RootOptions(tolerance=0.0)

    def test_branch_range(self):
        """Test the branch index must lie below p."""
        with pytest.raises(RangeError):
            RootProblem(poly_symbol(2), RootOptions(branch=2))

    def test_problem_document(self):
        """Test the problem document is plain JSON."""
        doc = RootProblem(poly_symbol(3)).to_dict()
        assert json.loads(json.dumps(doc)) == doc
        assert doc["symbol"]["p"] == 3
        assert doc["options"]["quadrature"]["endpoint_hints"] is None


class TestSquareRoot:
    """Test the square root of phi = r + r^2."""

    def test_success(self, square_root):
        """Test the identity holds in closed mode."""
        assert square_root.success
        assert square_root.report.max_residual < 1e-10
        assert square_root.unabsorbed == ()
        assert square_root.constant.imag == 0.0
        assert not square_root.psi.is_complex

    def test_first_identity(self, square_root):
        """Test psi_hat(3) psi_hat(5) = 11/120."""
        product = psi_mellin(square_root, 3.0) * psi_mellin(square_root, 5.0)
        assert product == pytest.approx(11.0 / 120.0, rel=1e-10)

    def test_numeric_mode(self, square_root):
        """Test the sampled psi passes in numeric mode."""
        report = identity_report(square_root, "numeric")
        assert report.passed, report.max_residual
        assert report.mode == "numeric"

    def test_consistency(self, square_root):
        """Test closed and numeric transforms of psi agree."""
        assert len(square_root.consistency) == len(CONSISTENCY_POINTS)
        assert max(square_root.consistency) < 1e-4

    @pytest.mark.parametrize("z", [3.0, 4.5, 8.0])
    def test_functional_equation(self, square_root, z):
        """Test psi_hat(z + 2p) / psi_hat(z) against phi_hat."""
        p = 2
        rm = square_root.problem.symbol.mellin
        ratio = psi_mellin(square_root, z + 2 * p) / psi_mellin(square_root, z)
        expected = (z + 1) * mellin_eval(rm, z + p + 1) / ((z + 2 * p - 1) * mellin_eval(rm, z + p - 1))
        assert ratio == pytest.approx(expected, rel=1e-12)

    def test_positive_and_bounded(self, square_root):
        """Test psi is positive with the expected endpoint behaviour."""
        assert np.all(square_root.psi.values > 0.0)
        doc = result_to_dict(square_root)
        assert doc["envelope"]["max_ratio"] < 100.0
        assert square_root.psi.envelope.alpha == pytest.approx(1.0)

    def test_finite_section(self, square_root):
        """Test the square of the 64 x 64 section of S matches T's section."""
        n = 64
        root = truncated_matrix(root_shift(square_root, n - 1), n)
        target = truncated_matrix(target_shift(square_root.problem.symbol, n - 1), n)
        gap = np.max(np.abs(root @ root - target))
        assert gap <= 1e-12 * np.max(np.abs(target))

    def test_candidate_from_samples(self, square_root):
        """Test quadrature weights of the sampled psi match the closed ones."""
        sampled = candidate_from_psi(square_root.psi, 6)
        closed = root_shift(square_root, 6)
        np.testing.assert_allclose(sampled.weights, closed.weights, rtol=1e-4)

    def test_mellin_errors(self, square_root):
        """Test bad modes and points."""
        with pytest.raises(UnsupportedSymbolError):
            psi_mellin(square_root, 3.0, "exact")
        with pytest.raises(RangeError):
            psi_mellin(square_root, 0.0)


class TestCanonicalPairing:
    """Test the canonical pairing with a multiplier handled through jets."""

    def test_multiplier_kept(self, canonical_square_root):
        """Test the multiplier is applied through derivatives."""
        assert canonical_square_root.unabsorbed == pytest.approx((0.625,))
        assert canonical_square_root.success

    def test_pairing_independent(self, square_root, canonical_square_root):
        """Test both pairings give the same psi."""
        mask = _interior(square_root.psi.grid)
        scale = square_root.sup_psi
        gap = np.abs(canonical_square_root.psi.values - square_root.psi.values)[mask]
        assert np.max(gap) / scale < 1e-5

    def test_literal_h(self, canonical_square_root):
        """Test H from jets against stencil derivatives of the plain convolution."""
        h = canonical_square_root.h
        literal = literal_h(canonical_square_root)
        mask = _interior(h.grid, 1e-6, 0.99)
        gap = np.max(np.abs(literal.values - h.values)[mask])
        assert gap / np.max(np.abs(h.values)) < 1e-4

    @pytest.mark.parametrize(
        "p, symbol_kwargs",
        [
            (2, {"radial": RadialTermSum.of((1.0, 1.0, 0), (1.0, 2.0, 0), (1.0, 3.0, 0))}),
            pytest.param(
                3, {"radial": RadialTermSum.of((1.0, 1.0, 0), (1.0, 2.0, 0), (1.0, 3.0, 0))},
                marks=pytest.mark.slow,
            ),
            pytest.param(
                2, {"mellin": RationalMellin(1.0, (0.5, 1.5), (1.0, 2.0, 3.0))},
                marks=pytest.mark.slow,
            ),
        ],
    )
    def test_two_numerator_roots(self, p, symbol_kwargs):
        """Test pairing independence when two multipliers go through second derivatives."""
        symbol = QuasihomogeneousSymbol(p, **symbol_kwargs)
        optimized = construct_root(RootProblem(symbol))
        canonical = construct_root(RootProblem(symbol, RootOptions(pairing="canonical")))
        assert canonical.failure is None
        assert canonical.success
        mask = _interior(optimized.psi.grid)
        gap = np.abs(canonical.psi.values - optimized.psi.values)[mask]
        assert np.max(gap) / optimized.sup_psi < 1e-5


class TestQuadratureFailure:
    """Test constructions whose convolution quadrature cannot converge."""

    def test_flagged_result(self):
        """Test a result is returned with the failure recorded and psi unsampled."""
        options = RootOptions(quadrature=QuadratureSpec(max_levels=1))
        result = construct_root(RootProblem(poly_symbol(2), options))
        assert "quadrature" in result.failure
        assert not result.success
        assert result.h is None
        assert np.all(np.isnan(result.psi.values))
        assert result.report.passed
        assert result.consistency == ()
        assert result_to_dict(result)["failure"] == result.failure

    def test_no_literal_h(self):
        """Test literal_h refuses a result without a sampled convolution."""
        options = RootOptions(quadrature=QuadratureSpec(max_levels=1))
        result = construct_root(RootProblem(poly_symbol(2), options))
        with pytest.raises(RangeError):
            literal_h(result)


class TestOtherRoots:
    """Test further degrees and symbols."""

    @pytest.mark.parametrize("p", [3, pytest.param(5, marks=pytest.mark.slow)])
    def test_higher_degree(self, p):
        """Test phi = r + r^2 at higher degrees."""
        result = construct_root(RootProblem(poly_symbol(p)))
        assert result.success
        assert result.factorization.diff_factors == ()

    @pytest.mark.parametrize("p", [3, pytest.param(5, marks=pytest.mark.slow)])
    def test_higher_degree_numeric(self, p):
        """Test phi = r + r^2 at higher degrees checked with quadrature Mellin values."""
        result = construct_root(RootProblem(poly_symbol(p), RootOptions(mode="numeric")))
        assert result.report.mode == "numeric"
        assert result.success, result.report.max_residual

    @pytest.mark.slow
    @pytest.mark.parametrize("m", [0.0, 1.0, 3.0])
    @pytest.mark.parametrize("p", [2, 4])
    def test_monomials_numeric(self, m, p):
        """Test roots of r^m checked with quadrature Mellin values."""
        options = RootOptions(mode="numeric", k_max=20)
        result = construct_root(RootProblem(monomial_symbol(p, m), options))
        assert result.success, result.report.max_residual

    def test_degree_one(self):
        """Test p = 1 returns phi itself."""
        result = construct_root(RootProblem(poly_symbol(1)))
        nodes = result.psi.grid.nodes
        np.testing.assert_allclose(result.psi.values, nodes + nodes ** 2, rtol=1e-15)
        assert result.constant == 1.0
        assert result.factorization is None
        assert result.success
        assert result.consistency == ()
        with pytest.raises(RangeError):
            literal_h(result)

    def test_other_branch(self, square_root):
        """Test branch 1 of a square root is the negative of branch 0."""
        result = construct_root(RootProblem(poly_symbol(2), RootOptions(branch=1)))
        assert result.success
        assert result.constant == pytest.approx(-square_root.constant)
        assert not result.psi.is_complex
        np.testing.assert_allclose(result.psi.values, -square_root.psi.values, rtol=1e-12)

    def test_complex_constant(self):
        """Test phi = -r has a purely imaginary square root constant."""
        symbol = QuasihomogeneousSymbol(2, radial=RadialTermSum.of((-1.0, 1.0, 0)))
        result = construct_root(RootProblem(symbol))
        assert result.success
        assert abs(result.constant.real) < 1e-12 * abs(result.constant)
        assert result.psi.is_complex
        assert result_to_dict(result)["psi"]["values"]["im"]

    def test_positivity_violation(self):
        """Test a numerator root below -p + 1 is rejected."""
        symbol = QuasihomogeneousSymbol(2, mellin=RationalMellin(1.0, (-1.5,), (1.0, 2.0)))
        with pytest.raises(PositivityError):
            construct_root(RootProblem(symbol))

    def test_degenerate_calibration(self):
        """Test phi_hat(p + 2) = 0 leaves C undetermined."""
        bf = factorize(RationalMellin(2.0, (1.5,), (1.0, 2.0)), 2)
        with pytest.raises(DegenerateCalibrationError) as info:
            calibrate_constant(bf, RationalMellin(1.0, (-4.0,), (1.0, 2.0)), 2)
        assert info.value.category == "accuracy"

    @pytest.mark.slow
    def test_refinement(self, square_root):
        """Test sup|psi| moves by less than 5% when the grid is halved."""
        coarse = construct_root(RootProblem(poly_symbol(2), RootOptions(grid_size=128)))
        drift = abs(coarse.sup_psi - square_root.sup_psi) / square_root.sup_psi
        assert drift < 0.05


class TestResultDocuments:
    """Test result serialization."""

    def test_document(self, square_root):
        """Test the result document fields."""
        doc = result_to_dict(square_root)
        assert doc["success"] is True
        assert doc["constant"]["im"] == 0.0
        assert doc["residuals"]["passed"] is True
        assert doc["factorization"]["diff_factors"] == []
        assert len(doc["factorization"]["beta_factors"]) == 4
        assert json.loads(json.dumps(doc)) == doc

    def test_deterministic(self, square_root):
        """Test the document does not change between calls."""
        first = json.dumps(result_to_dict(square_root), sort_keys=True)
        assert json.dumps(result_to_dict(square_root), sort_keys=True) == first

    def test_write_and_load(self, square_root, tmp_path):
        """Test writing PREFIX.json and PREFIX.csv and reading psi back."""
        paths = write_result(result_to_dict(square_root), tmp_path / "runs" / "phi")
        assert [p.name for p in paths] == ["phi.json", "phi.csv"]
        from_json = load_psi(paths[0])
        np.testing.assert_array_equal(from_json.values, square_root.psi.values)
        from_csv = load_psi(paths[1])
        np.testing.assert_array_equal(from_csv.values.real, square_root.psi.values)
        assert paths[1].read_text().splitlines()[0] == "r,re,im"

    def test_load_two_columns(self, tmp_path):
        """Test a real (r, value) CSV."""
        nodes = np.linspace(0.01, 0.99, 20)
        path = tmp_path / "psi.csv"
        path.write_text("r,value\n" + "".join(f"{float(r)!r},{float(2 * r)!r}\n" for r in nodes))
        psi = load_psi(path)
        np.testing.assert_allclose(psi.values, 2 * nodes)

    def test_load_malformed(self, tmp_path):
        """Test unreadable psi files."""
        bad_json = tmp_path / "psi.json"
        bad_json.write_text("{oops")
        with pytest.raises(UnsupportedSymbolError):
            load_psi(bad_json)
        bad_csv = tmp_path / "psi.csv"
        bad_csv.write_text("r,value\n0.5,abc\n")
        with pytest.raises(UnsupportedSymbolError):
            load_psi(bad_csv)
