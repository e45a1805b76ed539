import math

import numpy as np
import pytest

from ..core.quadrature import (
    DEFAULT_TOLERANCES,
    DyadicGrid,
    QuadratureTolerances,
    integrate_log_adaptive,
    sum_with_tail,
)
from ..tools.exceptions import ResetLdpNumericException, ResetLdpUsageException


@pytest.fixture
def grid() -> DyadicGrid:
    return DyadicGrid(1.0)


def test_exponential_integrals(grid):
    assert grid.integrate_log(-grid.nodes) == pytest.approx(1.0, rel=1e-12)
    log_values = 2.0 * grid.log_nodes - grid.nodes
    assert grid.integrate_log(log_values) == pytest.approx(2.0, rel=1e-12)


def test_inverse_square_root_singularity(grid):
    # Γ(1/2) = √π
    log_values = -0.5 * grid.log_nodes - grid.nodes
    assert grid.integrate_log(log_values) == pytest.approx(math.sqrt(math.pi), 1e-10)


def test_heavy_tail_is_divergent(grid):
    assert grid.integrate_log(np.zeros_like(grid.nodes)) == math.inf
    assert grid.integrate_log(np.full_like(grid.nodes, np.inf)) == math.inf


def test_vanishing_integrand(grid):
    assert grid.integrate_log(np.full_like(grid.nodes, -np.inf)) == 0.0


def test_nan_integrand_raises(grid):
    log_values = -grid.nodes
    log_values[3] = np.nan
    with pytest.raises(ResetLdpNumericException):
        grid.integrate_log(log_values)


def test_sum_with_tail():
    assert sum_with_tail(np.ones(10), DEFAULT_TOLERANCES) == math.inf
    assert sum_with_tail(np.zeros(10), DEFAULT_TOLERANCES) == 0.0
    geometric = 0.5 ** np.arange(10)
    assert sum_with_tail(geometric, DEFAULT_TOLERANCES) == pytest.approx(2.0)


def test_adaptive_matches_closed_form():
    def log_integrand(s: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.5 * np.log(s) - s

    # Γ(5/2)
    expected = 0.75 * math.sqrt(math.pi)
    assert integrate_log_adaptive(log_integrand, 1.0) == pytest.approx(expected, 1e-9)


def test_adaptive_rejects_nan_integrand():
    def log_integrand(s: np.ndarray) -> np.ndarray:
        return np.where((s > 0.3) & (s < 0.4), np.nan, -s)

    with pytest.raises(ResetLdpNumericException) as error:
        integrate_log_adaptive(log_integrand, 1.0)
    assert 0.3 < error.value.diagnostics["s"] < 0.4


def test_adaptive_reports_unresolved_segment():
    def log_integrand(s: np.ndarray) -> np.ndarray:
        return np.log1p(0.9 * np.sign(np.sin(1e6 * s))) - s

    with pytest.raises(ResetLdpNumericException) as error:
        integrate_log_adaptive(log_integrand, 1.0)
    diagnostics = error.value.diagnostics
    assert diagnostics["error"] > 1e-6 * abs(diagnostics["value"])
    assert "segment" in diagnostics


@pytest.mark.parametrize(
    "values",
    [{"abs_tol": -1.0}, {"rel_tol": 0.0}, {"non_decay_ratio": 1.5}, {"order": 2}],
)
def test_invalid_tolerances(values):
    with pytest.raises(ResetLdpUsageException):
        QuadratureTolerances(**values).validated()
