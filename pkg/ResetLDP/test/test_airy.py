import math

import numpy as np
import pytest
from scipy.special import ai_zeros

from ..core import airy
from ..definitions.constants import MEAN_ABS_AREA
from ..tools.exceptions import ResetLdpDomainException


@pytest.fixture(scope="module")
def table() -> airy.AiryTable:
    return airy.build_table()


def test_zeros_match_scipy():
    small = airy.build_table(10)
    _, derivative_zeros, _, _ = ai_zeros(10)
    assert small.z == pytest.approx(derivative_zeros, abs=1e-10)
    assert airy.ai_prime(small.z) == pytest.approx(np.zeros(10), abs=1e-10)


def test_leading_constants(table):
    assert table.nu[0] == pytest.approx(0.80861, abs=5e-6)
    assert table.c[0] == pytest.approx(1.48257, abs=5e-6)
    assert table.rows()[0][0] == 1
    assert len(table.rows()) == table.count


def test_asymptotic_ratios(table):
    nu_ratio, c_ratio = table.asymptotic_ratios(50)
    assert nu_ratio == pytest.approx(airy.NU_RATIO_LIMIT, rel=0.02)
    assert c_ratio == pytest.approx(airy.C_RATIO_LIMIT, rel=0.05)
    with pytest.raises(ResetLdpDomainException):
        table.asymptotic_ratios(0)


def test_empty_table():
    with pytest.raises(ResetLdpDomainException):
        airy.build_table(0)


def test_series_normalization(table):
    assert airy.abs_area_laplace(1e-4, table) == pytest.approx(1.0, abs=1e-3)
    assert airy.abs_area_laplace(0.0, table) == 1.0
    with pytest.raises(ResetLdpDomainException):
        airy.abs_area_laplace(-1.0, table)


def test_series_large_tilt(table):
    theta = 50.0
    leading = table.c[0] * math.exp(-table.nu[0] * theta ** (2.0 / 3.0))
    assert airy.abs_area_laplace(theta, table) == pytest.approx(leading, rel=1e-6)


def test_out_of_range_airy_argument():
    with pytest.raises(ResetLdpDomainException):
        airy.ai(1e4)


def test_conjecture_scan(table):
    report = airy.conjecture_scan(np.geomspace(1e-3, 1e2, 200), table)
    assert report.large_limit == pytest.approx(table.c[0], rel=1e-3)
    with pytest.raises(ResetLdpDomainException):
        airy.conjecture_scan(np.array([1.0, 0.5]), table)


def test_tilted_mean_at_zero(table):
    assert airy.q_series(0.0, table) == pytest.approx(MEAN_ABS_AREA)


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 5.0])
def test_partial_sums_within_truncation_bound(table, theta):
    short = airy.build_table(10)
    u = theta ** (2.0 / 3.0)
    partial = float(np.sum(short.c * np.exp(-short.nu * u)))
    bound = airy.truncation_bound(theta, short)
    assert abs(partial - airy.abs_area_laplace(theta, table)) <= bound + 1e-12
    assert airy.truncation_bound(theta, table) < 1e-10


def test_truncation_bound_decreases():
    bounds = airy.truncation_bound(np.array([0.1, 0.5, 1.0, 2.0]), airy.build_table(10))
    assert np.all(np.diff(bounds) < 0)
