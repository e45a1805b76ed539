"""
Additive functionals of Brownian motion used as rewards between resets:
the positive occupation time, the area and the absolute area.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, Type

import numpy as np
from scipy.special import i0e, i1e

from ..definitions.constants import (
    MEAN_ABS_AREA,
    PATH_STEP,
    SECOND_MOMENT_ABS_AREA,
    DistFamily,
    FunctionalKind,
)
from ..tools.exceptions import ResetLdpDomainException, ResetLdpUsageException
from ..tools.resources import plugin_name
from . import airy
from .abs_area_law import AbsAreaLaw, load_default_law
from .brownian import abs_area_rewards
from .dist import WaitingTimeModel

LOGGER = logging.getLogger(plugin_name())

LogFunction = Callable[[np.ndarray], np.ndarray]


def _zeros(s: np.ndarray) -> np.ndarray:
    return np.zeros_like(s, dtype=float)


@dataclass(frozen=True)
class Kernel:
    """
    log E_s(k) = linear * s + cubic * s^3 + log_rest(s), where E_s(k) is the
    moment generating function of the reward collected in time s.

    d/dk log E_s(k) = dk_sign * exp(log_dk(s)).
    """

    linear: float
    cubic: float
    log_rest: LogFunction
    log_dk: LogFunction
    dk_sign: float

    def log_mgf(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.linear * s + self.cubic * s**3 + self.log_rest(s)


@dataclass
class TypicalStats:
    mu: float
    v: float
    valid_lln: bool
    valid_clt: bool
    valid_good_ldp: bool
    mean_reward: float = math.nan
    mean_s_reward: float = math.nan
    second_reward: float = math.nan


@dataclass(frozen=True)
class GrowthConditions:
    lln: bool
    clt: bool
    good_ldp: bool


@dataclass(frozen=True)
class VarpiValue:
    value: float
    boundary: bool = False


# limsup s^(-(2+a)/(2-a)) ln P[S > s] = -inf, per family and growth exponent
GOOD_LDP_TABLE: Dict[Tuple[DistFamily, int], bool] = {
    (DistFamily.EXPONENTIAL, 0): False,
    (DistFamily.EXPONENTIAL, 1): False,
    (DistFamily.CUBIC, 0): True,
    (DistFamily.CUBIC, 1): False,
    (DistFamily.EXP_POLY, 0): False,
    (DistFamily.EXP_POLY, 1): False,
    (DistFamily.STRETCHED, 0): False,
    (DistFamily.STRETCHED, 1): False,
}


def growth_conditions(
    fn: "FunctionalModel", dist: WaitingTimeModel
) -> GrowthConditions:
    # every implemented family has moments of all orders
    return GrowthConditions(
        lln=math.isfinite(dist.moment(1.0 + fn.alpha / 2.0)),
        clt=math.isfinite(dist.moment(2.0 + fn.alpha)),
        good_ldp=GOOD_LDP_TABLE[(dist.family, fn.alpha)],
    )


class FunctionalModel(ABC):
    kind: FunctionalKind
    alpha: int

    @abstractmethod
    def kernel(self, k: float) -> Kernel:
        ...

    @abstractmethod
    def g_without_reset(self, k: float) -> float:
        """lim (1/t) log E_t(k) without resetting."""

    @abstractmethod
    def sample_rewards(
        self, durations: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        ...

    @abstractmethod
    def typical_stats(self, dist: WaitingTimeModel) -> TypicalStats:
        ...

    @property
    @abstractmethod
    def support(self) -> Tuple[float, float]:
        """Closed hull of the possible values of F_t / t."""

    def interval_mgf(self, s: float, k: float) -> float:
        if s < 0:
            raise ResetLdpDomainException(f"Interval length must be non-negative: {s}")
        if k == 0 or s == 0:
            return 1.0
        return float(np.exp(self.kernel(k).log_mgf(np.array([s]))[0]))

    def sample_reward(self, s: float, rng: np.random.Generator) -> float:
        return float(self.sample_rewards(np.array([s]), rng)[0])

    def varpi(self, dist: WaitingTimeModel, k: float) -> VarpiValue:
        """liminf -(1/t) log(E_t(k) P[S > t])."""
        if k == 0:
            return VarpiValue(dist.tail_rate_ell)
        growth = self.g_without_reset(k)
        if math.isfinite(growth):
            return VarpiValue(dist.tail_rate_ell - growth)
        # cubic growth k^2 t^3 / 6 against a tail exp(-r t^3)
        excess = k * k - 6.0 * dist.tail_rate_cubic
        if math.isclose(k * k, 6.0 * dist.tail_rate_cubic, rel_tol=1e-12):
            return VarpiValue(self._boundary_varpi(dist), boundary=True)
        return VarpiValue(math.inf if excess < 0 else -math.inf)

    def _boundary_varpi(self, dist: WaitingTimeModel) -> float:
        # exact cubic tail: the exponent cancels up to a bounded factor
        if dist.family == DistFamily.CUBIC:
            return 0.0
        return math.nan

    def support_endpoint_limit(self, dist: WaitingTimeModel, w: float) -> float:
        """I at an endpoint of the support, as the one-sided limit."""
        lo, hi = self.support
        if w not in (lo, hi):
            raise ResetLdpDomainException(f"{w} is not an endpoint of {self.support}")
        return math.inf

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class OccupationTime(FunctionalModel):
    """Time spent by the Brownian path on the positive half line."""

    kind = FunctionalKind.OCCUPATION
    alpha = 0

    def kernel(self, k: float) -> Kernel:
        # E_s(k) = exp(sk/2) I_0(sk/2) by the arcsine law
        half = 0.5 * k

        def log_rest(s: np.ndarray) -> np.ndarray:
            return np.log(i0e(half * s))

        def log_dk(s: np.ndarray) -> np.ndarray:
            a = half * s
            with np.errstate(divide="ignore"):
                return np.log(0.5 * s) + np.log(i0e(a) + i1e(a)) - np.log(i0e(a))

        return Kernel(
            linear=max(k, 0.0), cubic=0.0, log_rest=log_rest, log_dk=log_dk, dk_sign=1.0
        )

    def g_without_reset(self, k: float) -> float:
        return max(0.0, k)

    def sample_rewards(
        self, durations: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        durations = np.asarray(durations, dtype=float)
        u = rng.random(durations.shape)
        return durations * np.sin(0.5 * math.pi * u) ** 2

    def typical_stats(self, dist: WaitingTimeModel) -> TypicalStats:
        conditions = growth_conditions(self, dist)
        m1, m2 = dist.moment(1.0), dist.moment(2.0)
        return TypicalStats(
            mu=0.5,
            v=m2 / (8.0 * m1),
            valid_lln=conditions.lln,
            valid_clt=conditions.clt,
            valid_good_ldp=conditions.good_ldp,
            mean_reward=0.5 * m1,
            mean_s_reward=0.5 * m2,
            second_reward=0.375 * m2,
        )

    @property
    def support(self) -> Tuple[float, float]:
        return (0.0, 1.0)

    def support_endpoint_limit(self, dist: WaitingTimeModel, w: float) -> float:
        super().support_endpoint_limit(dist, w)
        return dist.tail_rate_ell


@dataclass(frozen=True)
class Area(FunctionalModel):
    """Signed area under the Brownian path."""

    kind = FunctionalKind.AREA
    alpha = 1

    def kernel(self, k: float) -> Kernel:
        if k == 0:
            return Kernel(0.0, 0.0, _zeros, lambda s: np.full_like(s, -np.inf), 0.0)
        log_third = math.log(abs(k) / 3.0)

        def log_dk(s: np.ndarray) -> np.ndarray:
            with np.errstate(divide="ignore"):
                return log_third + 3.0 * np.log(s)

        return Kernel(
            linear=0.0,
            cubic=k * k / 6.0,
            log_rest=_zeros,
            log_dk=log_dk,
            dk_sign=math.copysign(1.0, k),
        )

    def g_without_reset(self, k: float) -> float:
        return 0.0 if k == 0 else math.inf

    def sample_rewards(
        self, durations: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        durations = np.asarray(durations, dtype=float)
        return rng.normal(size=durations.shape) * np.sqrt(durations**3 / 3.0)

    def typical_stats(self, dist: WaitingTimeModel) -> TypicalStats:
        conditions = growth_conditions(self, dist)
        m1, m3 = dist.moment(1.0), dist.moment(3.0)
        return TypicalStats(
            mu=0.0,
            v=m3 / (3.0 * m1),
            valid_lln=conditions.lln,
            valid_clt=conditions.clt,
            valid_good_ldp=conditions.good_ldp,
            mean_reward=0.0,
            mean_s_reward=0.0,
            second_reward=m3 / 3.0,
        )

    @property
    def support(self) -> Tuple[float, float]:
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class AbsArea(FunctionalModel):
    """
    Area under the absolute value of the Brownian path.

    Negative tilts use the Airy series. Positive tilts need the tabulated law
    of the unit area, loaded from the cache when not given.
    """

    law: Optional[AbsAreaLaw] = field(default=None, compare=False, hash=False)
    path_step: float = PATH_STEP

    kind = FunctionalKind.ABS_AREA
    alpha = 1

    @property
    def abs_law(self) -> AbsAreaLaw:
        return self.law if self.law is not None else load_default_law()

    def kernel(self, k: float) -> Kernel:
        if k < 0:
            return self.__negative_kernel(k)
        if k == 0:

            def log_dk_zero(s: np.ndarray) -> np.ndarray:
                with np.errstate(divide="ignore"):
                    return math.log(MEAN_ABS_AREA) + 1.5 * np.log(s)

            return Kernel(0.0, 0.0, _zeros, log_dk_zero, 1.0)
        return self.__positive_kernel(k)

    def __negative_kernel(self, k: float) -> Kernel:
        table = airy.build_table()
        magnitude = abs(k)

        def theta(s: np.ndarray) -> np.ndarray:
            return magnitude * np.asarray(s, dtype=float) ** 1.5

        def log_rest(s: np.ndarray) -> np.ndarray:
            return np.asarray(airy.log_h(theta(s), table))

        def log_dk(s: np.ndarray) -> np.ndarray:
            with np.errstate(divide="ignore"):
                q = np.asarray(airy.q_series(theta(s), table))
                return 1.5 * np.log(s) + np.log(q)

        return Kernel(
            linear=-table.nu[0] * magnitude ** (2.0 / 3.0),
            cubic=0.0,
            log_rest=log_rest,
            log_dk=log_dk,
            dk_sign=1.0,
        )

    def __positive_kernel(self, k: float) -> Kernel:
        law = self.abs_law

        def theta(s: np.ndarray) -> np.ndarray:
            return k * np.asarray(s, dtype=float) ** 1.5

        def log_rest(s: np.ndarray) -> np.ndarray:
            return np.asarray(law.log_ratio(theta(s)))

        def log_dk(s: np.ndarray) -> np.ndarray:
            th = theta(s)
            tilted_mean = np.maximum(th / 3.0 + np.asarray(law.dlog_ratio(th)), 1e-300)
            with np.errstate(divide="ignore"):
                return 1.5 * np.log(s) + np.log(tilted_mean)

        return Kernel(
            linear=0.0, cubic=k * k / 6.0, log_rest=log_rest, log_dk=log_dk, dk_sign=1.0
        )

    def g_without_reset(self, k: float) -> float:
        if k > 0:
            return math.inf
        return -float(airy.build_table().nu[0]) * abs(k) ** (2.0 / 3.0)

    def sample_rewards(
        self, durations: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        return abs_area_rewards(durations, rng, self.path_step)

    def typical_stats(self, dist: WaitingTimeModel) -> TypicalStats:
        conditions = growth_conditions(self, dist)
        m1 = dist.moment(1.0)
        m2, m3 = dist.moment(2.0), dist.moment(3.0)
        m15, m25 = dist.moment(1.5), dist.moment(2.5)
        mu = MEAN_ABS_AREA * m15 / m1
        v = (
            SECOND_MOMENT_ABS_AREA * m3 / m1
            - mu * math.sqrt(32.0 / (9.0 * math.pi)) * m25 / m1
            + mu * mu * m2 / m1
        )
        return TypicalStats(
            mu=mu,
            v=v,
            valid_lln=conditions.lln,
            valid_clt=conditions.clt,
            valid_good_ldp=conditions.good_ldp,
            mean_reward=MEAN_ABS_AREA * m15,
            mean_s_reward=MEAN_ABS_AREA * m25,
            second_reward=SECOND_MOMENT_ABS_AREA * m3,
        )

    @property
    def support(self) -> Tuple[float, float]:
        return (0.0, math.inf)


FUNCTIONALS: Dict[FunctionalKind, Type[FunctionalModel]] = {
    FunctionalKind.OCCUPATION: OccupationTime,
    FunctionalKind.AREA: Area,
    FunctionalKind.ABS_AREA: AbsArea,
}


def functional_from_name(name: str, **kwargs) -> FunctionalModel:
    try:
        kind = FunctionalKind(name.strip().lower())
    except ValueError:
        choices = ", ".join(kind.value for kind in FunctionalKind)
        raise ResetLdpUsageException(
            "functional", f"unknown functional '{name}', use one of {choices}"
        )
    model_class = FUNCTIONALS[kind]
    if kind != FunctionalKind.ABS_AREA:
        kwargs = {}
    return model_class(**kwargs)  # type: ignore
