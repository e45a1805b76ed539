"""Waiting-time laws of the resetting protocol."""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple, Type, Union

import numpy as np
from scipy.special import gamma

from ..definitions.constants import DistFamily
from ..tools.exceptions import ResetLdpDomainException, ResetLdpUsageException
from ..tools.resources import plugin_name
from .quadrature import (
    DEFAULT_TOLERANCES,
    DyadicGrid,
    QuadratureTolerances,
    dyadic_grid,
    integrate_log_adaptive,
)

LOGGER = logging.getLogger(plugin_name())

ArrayLike = Union[float, np.ndarray]


def _output(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(values)
    return values


def _check_times(s: ArrayLike) -> np.ndarray:
    times = np.asarray(s, dtype=float)
    if np.any(times < 0) or np.any(np.isnan(times)):
        raise ResetLdpDomainException(f"Waiting times must be non-negative, got {s}")
    return times


class WaitingTimeModel(ABC):
    """
    Law of the i.i.d. waiting times between resets.

    The log-density is split as
    ``-linear_rate * s - cubic_rate * s**3 + log_density_rest(s)``
    where the rest grows slower than linearly. Every tilted expectation
    folds its own exponential weight into the two rates before
    exponentiating, so nothing cancels numerically near the tail rate.
    """

    family: DistFamily
    parameter_name: str

    @property
    @abstractmethod
    def parameter(self) -> float:
        ...

    @property
    @abstractmethod
    def linear_rate(self) -> float:
        ...

    @property
    def cubic_rate(self) -> float:
        return 0.0

    @property
    def scale(self) -> float:
        """Typical waiting time, used to place quadrature nodes."""
        return 1.0

    @abstractmethod
    def _log_survival(self, s: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def log_density_rest(self, s: np.ndarray) -> np.ndarray:
        ...

    def log_survival(self, s: ArrayLike) -> ArrayLike:
        times = _check_times(s)
        return _output(self._log_survival(times), s)

    def survival(self, s: ArrayLike) -> ArrayLike:
        times = _check_times(s)
        return _output(np.exp(self._log_survival(times)), s)

    def log_density(self, s: ArrayLike) -> ArrayLike:
        times = _check_times(s)
        with np.errstate(divide="ignore"):
            values = (
                self.log_density_rest(times)
                - self.linear_rate * times
                - self.cubic_rate * times**3
            )
        return _output(values, s)

    def density(self, s: ArrayLike) -> ArrayLike:
        return _output(np.exp(np.asarray(self.log_density(s))), s)

    @property
    def tail_rate_ell(self) -> float:
        return math.inf if self.cubic_rate > 0 else self.linear_rate

    @property
    def tail_rate_cubic(self) -> float:
        return self.cubic_rate

    def grid(self, tolerances: QuadratureTolerances = DEFAULT_TOLERANCES) -> DyadicGrid:
        return dyadic_grid(self.scale, tolerances)

    def tilted_log_integrand(
        self, zeta: float, s_power: float = 0.0
    ) -> Optional["TiltedLogIntegrand"]:
        """log of s^p e^{zeta s} density(s); None when the integral is infinite."""
        if zeta > self.tail_rate_ell:
            return None
        return TiltedLogIntegrand(self, zeta - self.linear_rate, s_power)

    def mgf_S(
        self, zeta: float, tolerances: QuadratureTolerances = DEFAULT_TOLERANCES
    ) -> float:
        """E[exp(zeta S)], +inf outside the domain of convergence."""
        integrand = self.tilted_log_integrand(zeta)
        if integrand is None:
            return math.inf
        return integrate_log_adaptive(integrand, self.scale, tolerances)

    def moment(
        self, p: float, tolerances: QuadratureTolerances = DEFAULT_TOLERANCES
    ) -> float:
        if p < 0:
            raise ResetLdpDomainException(f"Moment order must be non-negative, got {p}")
        if p == 0:
            return 1.0
        integrand = self.tilted_log_integrand(0.0, p)
        return integrate_log_adaptive(integrand, self.scale, tolerances)

    def quantile(self, u: ArrayLike) -> ArrayLike:
        """Inverse of the survival function: s with survival(s) = u."""
        probabilities = np.asarray(u, dtype=float)
        if np.any(probabilities <= 0) or np.any(probabilities > 1):
            raise ResetLdpDomainException(
                f"Survival levels must lie in (0, 1], got {u}"
            )
        return _output(self._inverse_survival(np.log(probabilities)), u)

    def sample(
        self, rng: np.random.Generator, size: Union[None, int, Tuple[int, ...]] = None
    ) -> ArrayLike:
        # 1 - U lies in (0, 1]
        u = 1.0 - rng.random(size)
        return self.quantile(u)

    def _inverse_survival(self, log_u: np.ndarray) -> np.ndarray:
        """Vectorised bisection on the decreasing log-survival."""
        log_u = np.atleast_1d(log_u)
        lo = np.zeros_like(log_u)
        hi = np.full_like(log_u, self.scale)
        for _ in range(1100):
            too_small = self._log_survival(hi) > log_u
            if not too_small.any():
                break
            hi = np.where(too_small, 2.0 * hi, hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            right = self._log_survival(mid) > log_u
            lo = np.where(right, mid, lo)
            hi = np.where(right, hi, mid)
            if np.all(hi - lo <= 1e-12 * hi):
                break
        return 0.5 * (lo + hi)

    @property
    def spec(self) -> str:
        return f"{self.family.value}:{self.parameter:g}"

    def to_config(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "params": {self.parameter_name: self.parameter},
        }

    @staticmethod
    def from_config(config: Mapping[str, Any]) -> "WaitingTimeModel":
        try:
            family = DistFamily(config["family"])
            params = dict(config["params"])
            model_class = FAMILIES[family]
            value = float(params[model_class.parameter_name])
            return model_class(value)  # type: ignore
        except (KeyError, ValueError, TypeError) as e:
            raise ResetLdpUsageException("dist", f"invalid configuration {config}: {e}")

    @staticmethod
    def from_spec(spec: str) -> "WaitingTimeModel":
        """Parse the command line grammar, e.g. ``exp:1`` or ``exppoly:2``."""
        family_name, sep, value = spec.partition(":")
        if not sep:
            raise ResetLdpUsageException("dist", f"expected FAMILY:VALUE, got '{spec}'")
        try:
            family = DistFamily(family_name.strip().lower())
            parameter = float(value)
        except ValueError:
            raise ResetLdpUsageException("dist", f"cannot parse '{spec}'")
        model_class = FAMILIES[family]
        try:
            return model_class(parameter)  # type: ignore
        except ResetLdpDomainException as e:
            raise ResetLdpUsageException("dist", e.message)


class TiltedLogIntegrand:
    """Picklable log of s^p exp(a s) * (density rest) for adaptive quadrature."""

    def __init__(self, model: WaitingTimeModel, linear: float, s_power: float) -> None:
        self.model = model
        self.linear = linear
        self.s_power = s_power

    def __call__(self, s: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            values = (
                self.linear * s
                - self.model.cubic_rate * s**3
                + self.model.log_density_rest(s)
            )
            if self.s_power:
                values = values + self.s_power * np.log(s)
        return values


@dataclass(frozen=True)
class Exponential(WaitingTimeModel):
    rate: float

    family = DistFamily.EXPONENTIAL
    parameter_name = "rate"

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ResetLdpDomainException(
                f"Exponential rate must be positive: {self.rate}"
            )

    @property
    def parameter(self) -> float:
        return self.rate

    @property
    def linear_rate(self) -> float:
        return self.rate

    @property
    def scale(self) -> float:
        return 1.0 / self.rate

    def _log_survival(self, s: np.ndarray) -> np.ndarray:
        return -self.rate * s

    def log_density_rest(self, s: np.ndarray) -> np.ndarray:
        return np.full_like(s, math.log(self.rate), dtype=float)

    def mgf_S(
        self, zeta: float, tolerances: QuadratureTolerances = DEFAULT_TOLERANCES
    ) -> float:
        return self.rate / (self.rate - zeta) if zeta < self.rate else math.inf

    def moment(
        self, p: float, tolerances: QuadratureTolerances = DEFAULT_TOLERANCES
    ) -> float:
        if p < 0:
            raise ResetLdpDomainException(f"Moment order must be non-negative, got {p}")
        return float(gamma(p + 1.0) / self.rate**p)

    def _inverse_survival(self, log_u: np.ndarray) -> np.ndarray:
        return -log_u / self.rate


@dataclass(frozen=True)
class CubicSuperExp(WaitingTimeModel):
    """Survival exp(-r s^3)."""

    rate: float

    family = DistFamily.CUBIC
    parameter_name = "rate"

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ResetLdpDomainException(f"Cubic rate must be positive: {self.rate}")

    @property
    def parameter(self) -> float:
        return self.rate

    @property
    def linear_rate(self) -> float:
        return 0.0

    @property
    def cubic_rate(self) -> float:
        return self.rate

    @property
    def scale(self) -> float:
        return self.rate ** (-1.0 / 3.0)

    def _log_survival(self, s: np.ndarray) -> np.ndarray:
        return -self.rate * s**3

    def log_density_rest(self, s: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return math.log(3.0 * self.rate) + 2.0 * np.log(s)

    def moment(
        self, p: float, tolerances: QuadratureTolerances = DEFAULT_TOLERANCES
    ) -> float:
        if p < 0:
            raise ResetLdpDomainException(f"Moment order must be non-negative, got {p}")
        return float(gamma(1.0 + p / 3.0) / self.rate ** (p / 3.0))

    def _inverse_survival(self, log_u: np.ndarray) -> np.ndarray:
        return np.cbrt(-log_u / self.rate)


@dataclass(frozen=True)
class ExpPoly(WaitingTimeModel):
    """Survival exp(-s) / (1 + s^alpha)."""

    alpha: float

    family = DistFamily.EXP_POLY
    parameter_name = "alpha"

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ResetLdpDomainException(
                f"ExpPoly exponent must be positive: {self.alpha}"
            )

    @property
    def parameter(self) -> float:
        return self.alpha

    @property
    def linear_rate(self) -> float:
        return 1.0

    def _log_survival(self, s: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return -s - np.logaddexp(0.0, self.alpha * np.log(s))

    def log_density_rest(self, s: np.ndarray) -> np.ndarray:
        # density = e^{-s} [(1 + s^a) + a s^{a-1}] / (1 + s^a)^2
        with np.errstate(divide="ignore", invalid="ignore"):
            log_s = np.log(s)
            log_power = self.alpha * log_s
            if self.alpha == 1.0:
                log_derivative = np.zeros_like(log_s)
            else:
                log_derivative = math.log(self.alpha) + (self.alpha - 1.0) * log_s
            numerator = np.logaddexp(np.logaddexp(0.0, log_power), log_derivative)
            return numerator - 2.0 * np.logaddexp(0.0, log_power)


@dataclass(frozen=True)
class StretchedPlusExp(WaitingTimeModel):
    """Survival exp(-s^beta - s)."""

    beta: float

    family = DistFamily.STRETCHED
    parameter_name = "beta"

    def __post_init__(self) -> None:
        if not 0 < self.beta < 1:
            raise ResetLdpDomainException(
                f"Stretched exponent must lie in (0, 1): {self.beta}"
            )

    @property
    def parameter(self) -> float:
        return self.beta

    @property
    def linear_rate(self) -> float:
        return 1.0

    def _log_survival(self, s: np.ndarray) -> np.ndarray:
        return -(s**self.beta) - s

    def log_density_rest(self, s: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            log_s = np.log(s)
            log_stretch = math.log(self.beta) + (self.beta - 1.0) * log_s
            return np.logaddexp(log_stretch, 0.0) - np.exp(self.beta * log_s)


FAMILIES: Dict[DistFamily, Type[WaitingTimeModel]] = {
    DistFamily.EXPONENTIAL: Exponential,
    DistFamily.CUBIC: CubicSuperExp,
    DistFamily.EXP_POLY: ExpPoly,
    DistFamily.STRETCHED: StretchedPlusExp,
}
