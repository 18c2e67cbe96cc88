"""Pytest configuration and fixtures for toeplitz_roots tests."""

import json
import sys

import pytest

from toeplitz_roots.roots import RootOptions, RootProblem, construct_root
from toeplitz_roots.symbols import QuasihomogeneousSymbol, RadialTermSum


@pytest.fixture(autouse=True)
def reset_temp_packages():
    """Drop temporary discovery packages from sys.modules after each test."""
    yield
    to_remove = [key for key in sys.modules.keys() if key.startswith('tmp_plugins')]
    for key in to_remove:
        del sys.modules[key]


@pytest.fixture
def isolated_cache(tmp_path, monkeypatch):
    """Point XDG_CACHE_HOME at a temporary directory."""
    cache_home = tmp_path / "xdg-cache"
    monkeypatch.setenv("XDG_CACHE_HOME", str(cache_home))
    return cache_home


def poly_symbol(p: int) -> QuasihomogeneousSymbol:
    """phi(r) = r + r^2 with degree p."""
    return QuasihomogeneousSymbol(p, radial=RadialTermSum.of((1.0, 1.0, 0), (1.0, 2.0, 0)))


def monomial_symbol(p: int, m: float) -> QuasihomogeneousSymbol:
    """phi(r) = r^m with degree p."""
    return QuasihomogeneousSymbol(p, radial=RadialTermSum.of((1.0, m, 0)))


@pytest.fixture(scope="session")
def square_root():
    """Root of degree 2 for phi = r + r^2 with default options."""
    return construct_root(RootProblem(poly_symbol(2)))


@pytest.fixture(scope="session")
def canonical_square_root():
    """Same root built with canonical pairing (one multiplier through jets)."""
    return construct_root(RootProblem(poly_symbol(2), RootOptions(pairing="canonical")))


@pytest.fixture
def symbol_file(tmp_path):
    """JSON symbol document for phi = r + r^2."""
    path = tmp_path / "phi.json"
    path.write_text(json.dumps({"terms": [{"c": 1, "a": 1, "b": 0}, {"c": 1, "a": 2, "b": 0}]}))
    return path
