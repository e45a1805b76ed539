import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import gamma

from ..core.dist import (
    CubicSuperExp,
    Exponential,
    ExpPoly,
    StretchedPlusExp,
    WaitingTimeModel,
)
from ..core.quadrature import integrate_log_adaptive
from ..tools.exceptions import ResetLdpDomainException, ResetLdpUsageException


@pytest.mark.parametrize(
    "spec, expected",
    [
        ("exp:1", Exponential(1.0)),
        ("cubic:0.25", CubicSuperExp(0.25)),
        ("exppoly:2", ExpPoly(2.0)),
        ("stretched:0.5", StretchedPlusExp(0.5)),
    ],
)
def test_from_spec(spec, expected):
    model = WaitingTimeModel.from_spec(spec)
    assert model == expected
    assert WaitingTimeModel.from_config(model.to_config()) == expected


@pytest.mark.parametrize("spec", ["exp", "gamma:1", "exp:x", "exp:-1", "stretched:2"])
def test_from_spec_rejects(spec):
    with pytest.raises(ResetLdpUsageException) as e:
        WaitingTimeModel.from_spec(spec)
    assert e.value.field == "dist"


def test_invalid_parameter_is_a_domain_error():
    with pytest.raises(ResetLdpDomainException):
        CubicSuperExp(0.0)


@pytest.mark.parametrize(
    "model", [Exponential(2.0), CubicSuperExp(1.0), ExpPoly(2.0), StretchedPlusExp(0.5)]
)
def test_density_is_normalized(model):
    integrand = model.tilted_log_integrand(0.0)
    assert integrate_log_adaptive(integrand, model.scale) == pytest.approx(1.0, 1e-8)


def test_moments():
    assert Exponential(2.0).moment(1.0) == pytest.approx(0.5, rel=1e-8)
    assert Exponential(1.0).moment(3.0) == pytest.approx(6.0, rel=1e-8)
    assert CubicSuperExp(1.0).moment(1.0) == pytest.approx(gamma(4.0 / 3.0))
    assert ExpPoly(2.0).moment(0.0) == 1.0
    with pytest.raises(ResetLdpDomainException):
        ExpPoly(2.0).moment(-1.0)


def test_mgf_domain():
    dist = Exponential(1.0)
    assert dist.mgf_S(0.5) == pytest.approx(2.0)
    assert dist.mgf_S(1.5) == math.inf
    assert CubicSuperExp(1.0).mgf_S(50.0) < math.inf


def test_tail_rates():
    assert Exponential(3.0).tail_rate_ell == 3.0
    assert CubicSuperExp(2.0).tail_rate_ell == math.inf
    assert CubicSuperExp(2.0).tail_rate_cubic == 2.0
    assert ExpPoly(2.0).tail_rate_ell == 1.0


@pytest.mark.parametrize(
    "model",
    [Exponential(1.0), CubicSuperExp(0.25), ExpPoly(2.0), StretchedPlusExp(0.5)],
)
def test_quantile_inverts_survival(model):
    levels = np.array([1.0, 0.9, 0.5, 1e-3, 1e-12])
    times = model.quantile(levels)
    assert np.asarray(model.survival(times)) == pytest.approx(levels, rel=1e-9)


def test_sampling_is_reproducible():
    dist = ExpPoly(2.0)
    first = dist.sample(np.random.default_rng(1), 100)
    second = dist.sample(np.random.default_rng(1), 100)
    assert np.array_equal(first, second)
    assert np.all(np.asarray(first) >= 0)


def test_negative_times_rejected():
    with pytest.raises(ResetLdpDomainException):
        Exponential(1.0).survival(-1.0)


@pytest.mark.parametrize(
    "model, seed",
    [
        (Exponential(1.0), 3),
        (CubicSuperExp(1.0), 4),
        (ExpPoly(2.0), 5),
        (StretchedPlusExp(0.5), 6),
    ],
)
def test_samples_follow_the_law(model, seed):
    draws = np.asarray(model.sample(np.random.default_rng(seed), 5_000))

    def cdf(s: np.ndarray) -> np.ndarray:
        return 1.0 - np.asarray(model.survival(s))

    assert stats.kstest(draws, cdf).pvalue > 1e-3
