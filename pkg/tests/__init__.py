"""Tests for the toeplitz-roots package."""
