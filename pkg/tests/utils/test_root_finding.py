"""
Unit tests for the bracketed Newton iteration.
"""

import math

import pytest

from jetflow.utils.root_finding import safeguarded_newton


class TestSafeguardedNewton:
    def test_cube_root(self) -> None:
        root = safeguarded_newton(lambda x: x**3 - 2.0, lambda x: 3.0 * x * x, 0.0, 2.0)
        assert root == pytest.approx(2.0 ** (1.0 / 3.0), abs=1e-13)

    def test_flat_slope_falls_back_to_bisection(self) -> None:
        # slope 0 at the start point; Newton cannot step
        root = safeguarded_newton(lambda x: x**3, lambda x: 3.0 * x * x, -1.0, 1.0, xtol=1e-12)
        assert abs(root) < 1e-4

    def test_endpoint_root(self) -> None:
        assert safeguarded_newton(math.log, lambda x: 1.0 / x, 1.0, 3.0) == 1.0

    def test_ftol_stops_early(self) -> None:
        root = safeguarded_newton(lambda x: x - 0.3, lambda x: 1.0, 0.0, 1.0, ftol=0.25)
        assert root == 0.5

    def test_rejects_bracket_without_sign_change(self) -> None:
        with pytest.raises(ValueError, match="does not enclose a root"):
            safeguarded_newton(lambda x: x + 1.0, lambda x: 1.0, 0.0, 1.0)
