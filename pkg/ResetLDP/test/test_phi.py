import math

import numpy as np
import pytest

from ..core.dist import CubicSuperExp, Exponential, ExpPoly
from ..core.functionals import AbsArea, Area, OccupationTime
from ..core.phi import (
    JointMgf,
    PhiSolver,
    diagnose,
    joint_mgf_arcsine,
    phi_prime,
    phi_solve,
    varpi_check,
)
from ..definitions.constants import Classification, PhiRegime
from ..tools.exceptions import ResetLdpDomainException


def poisson_occupation_phi(r: float, k: float) -> float:
    return r - (k + math.sqrt(k * k + 4.0 * r * r)) / 2.0


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("k", [-4.0, -1.0, 0.0, 0.5, 3.0])
def test_poisson_occupation_closed_form(r, k):
    value = phi_solve(OccupationTime(), Exponential(r), k)
    assert value.value == pytest.approx(poisson_occupation_phi(r, k), abs=1e-8)


def test_phi_vanishes_at_zero(cubic):
    for fn in (OccupationTime(), Area()):
        assert PhiSolver(fn, cubic).solve(0.0).value == pytest.approx(0.0, abs=1e-12)


def test_occupation_symmetry():
    solver = PhiSolver(OccupationTime(), ExpPoly(2.0))
    for k in (0.5, 1.5, 3.0):
        assert solver.solve(-k).value - solver.solve(k).value == pytest.approx(k, 1e-8)


def test_phi_prime_is_minus_the_mean(poisson):
    solver = PhiSolver(OccupationTime(), poisson)
    assert solver.derivative(0.0) == pytest.approx(-0.5, abs=1e-6)


def test_phi_is_concave(cubic):
    solver = PhiSolver(Area(), cubic)
    values = np.array([solver.solve(k).value for k in np.linspace(-2.0, 2.0, 17)])
    assert np.diff(values, 2).max() <= 1e-8


def test_area_beyond_edge_is_minus_infinity(cubic):
    value = PhiSolver(Area(), cubic).solve(3.0)
    assert value.value == -math.inf
    assert value.regime == PhiRegime.MINUS_INFINITY


def test_area_diagnostics():
    for r in (0.25, 1.0, 4.0):
        report = diagnose(Area(), CubicSuperExp(r))
        assert report.xi == pytest.approx(-((6.0 * r) ** (1.0 / 3.0)), abs=1e-8)
        assert report.lambda_diag == pytest.approx(1.0, abs=1e-8)
        assert report.w_plus == pytest.approx(
            (20.0 / 3.0) * (6.0 * r) ** (-1.0 / 6.0), abs=1e-6
        )
        assert report.xi_diag == pytest.approx(
            360.0 * r * (6.0 * r) ** -2.0, rel=1e-6
        )
        assert report.classification == Classification.AFFINE_STRETCHES
        assert report.has_stretch


def test_poisson_occupation_is_smooth(poisson):
    report = diagnose(OccupationTime(), poisson)
    assert not report.has_stretch
    assert report.to_dict()["functional"] == "occupation"


def test_varpi_check(poisson):
    rows = varpi_check(OccupationTime(), poisson, [-2.0, 0.0, 2.0])
    assert [row.k for row in rows] == [-2.0, 0.0, 2.0]
    assert all(row.ok for row in rows)
    # without resetting the exponent is -max(k, 0), so varpi = ell - max(k, 0)
    assert rows[2].varpi == pytest.approx(-1.0)


def test_varpi_at_the_cubic_boundary(cubic):
    rows = varpi_check(Area(), cubic, [math.sqrt(6.0)])
    assert rows[0].boundary
    assert rows[0].ok


@pytest.mark.parametrize(
    "dist, zeta, k",
    [
        (Exponential(1.0), -0.5, 1.0),
        (Exponential(2.0), 0.5, -3.0),
        (CubicSuperExp(1.0), -0.3, 0.7),
        (CubicSuperExp(1.0), 0.4, -1.2),
    ],
)
def test_occupation_mgf_matches_the_arcsine_average(dist, zeta, k):
    expected = joint_mgf_arcsine(dist, zeta, k, nodes=32)
    assert JointMgf(OccupationTime(), dist).value(zeta, k) == pytest.approx(
        expected, rel=1e-7
    )


def test_poisson_occupation_closed_form_against_arcsine_average():
    # r / sqrt((r - zeta)(r - zeta - k)) at r = 1
    value = joint_mgf_arcsine(Exponential(1.0), -0.5, 1.0)
    assert value == pytest.approx(1.0 / math.sqrt(0.75), rel=1e-10)


@pytest.mark.parametrize(
    "fn, dist, k",
    [
        (OccupationTime(), Exponential(1.0), 0.7),
        (OccupationTime(), ExpPoly(2.0), 0.2),
        (Area(), CubicSuperExp(1.0), 1.0),
        (Area(), CubicSuperExp(1.0), -0.4),
    ],
)
def test_prime_matches_central_difference(fn, dist, k):
    solver = PhiSolver(fn, dist)
    h = 1e-4
    difference = (solver.solve(k + h).value - solver.solve(k - h).value) / (2.0 * h)
    assert solver.prime(k) == pytest.approx(difference, abs=1e-6)


def test_poisson_occupation_prime():
    k = 0.7
    expected = -0.5 * (1.0 + k / math.sqrt(k * k + 4.0))
    assert phi_prime(OccupationTime(), Exponential(1.0), k) == pytest.approx(
        expected, abs=1e-9
    )


def test_prime_outside_the_analytic_region(cubic):
    with pytest.raises(ResetLdpDomainException):
        PhiSolver(Area(), cubic).prime(3.0)
    solver = PhiSolver(OccupationTime(), ExpPoly(2.0))
    lam = diagnose(OccupationTime(), ExpPoly(2.0)).lam
    with pytest.raises(ResetLdpDomainException):
        solver.prime(-2.0 * lam)


def test_occupation_stretches_for_exppoly_waits():
    dist = ExpPoly(2.0)
    report = diagnose(OccupationTime(), dist)
    assert report.classification == Classification.AFFINE_STRETCHES
    assert report.has_stretch and not report.steep
    lam = report.lam
    assert 0.0 < lam < math.inf
    assert (report.k_a, report.k_b) == (-lam, lam)
    assert JointMgf(OccupationTime(), dist).value(1.0, -lam) == pytest.approx(
        1.0, abs=1e-8
    )
    assert 0.0 < report.w_minus < 0.5 < report.w_plus < 1.0
    assert report.w_minus + report.w_plus == pytest.approx(1.0)
    # phi = ell ∧ (ell - k) beyond the kinks
    solver = PhiSolver(OccupationTime(), dist)
    assert solver.solve(-2.0 * lam).value == pytest.approx(1.0, abs=1e-10)
    assert solver.solve(2.0 * lam).value == pytest.approx(1.0 - 2.0 * lam, abs=1e-10)


def test_abs_area_one_sided_stretch(small_law, cubic):
    report = diagnose(AbsArea(law=small_law), cubic)
    assert report.classification == Classification.ONE_SIDED_STRETCH
    assert report.has_stretch and not report.steep
    assert report.lambda_diag == pytest.approx(1.0, abs=1e-8)
    assert report.xi < 0.0
    assert math.isfinite(report.xi_diag)
    assert report.k_b == pytest.approx(math.sqrt(6.0))
    assert report.mu < report.w_plus < math.inf


def test_abs_area_with_poisson_resetting(small_law, poisson):
    fn = AbsArea(law=small_law)
    report = diagnose(fn, poisson)
    assert report.classification == Classification.FLAT_ABOVE_MEAN
    assert report.w_plus == pytest.approx(report.mu)
    solver = PhiSolver(fn, poisson)
    ks = np.linspace(-40.0, -0.1, 12)
    values = np.array([solver.solve(float(k)).value for k in ks])
    assert np.all(np.diff(values) <= 1e-10)
    # phi exceeds ell = 1 for strongly negative tilts
    assert values[0] > poisson.tail_rate_ell
    assert solver.solve(0.5).value == -math.inf


@pytest.mark.parametrize("lambda_diag, xi_diag", [(0.5, 1.0), (1.0, math.inf)])
def test_edge_without_stretch_is_smooth(mocker, small_law, lambda_diag, xi_diag):
    def edge_quantities(solver, k_edge, report):
        report.xi = -1.0
        report.lambda_diag = lambda_diag
        report.xi_diag = xi_diag
        return 1.0, 1.0

    mocker.patch("ResetLDP.core.phi._edge_quantities", side_effect=edge_quantities)
    for fn in (Area(), AbsArea(law=small_law)):
        report = diagnose(fn, CubicSuperExp(1.0))
        assert report.classification == Classification.SMOOTH_EVERYWHERE
        assert not report.has_stretch and report.steep
        assert report.w_plus == math.inf
        assert report.k_b == pytest.approx(math.sqrt(6.0))
