"""
Airy function, the zeros of its derivative and the spectral series of the
Laplace transform of the absolute area of a unit Brownian path,

    E[exp(-theta A)] = sum_i c_i exp(-nu_i theta^(2/3)).
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import optimize, special

from ..definitions.constants import (
    AIRY_RANGE,
    AIRY_TABLE_SIZE,
    AVERAGING_ROUNDS,
    MEAN_ABS_AREA,
    NEWTON_MAX_ITER,
    NEWTON_TOL,
    SERIES_MIN_EXPONENT,
    SERIES_TOL,
)
from ..tools.exceptions import ResetLdpDomainException, ResetLdpNumericException
from ..tools.resources import plugin_name

LOGGER = logging.getLogger(plugin_name())

ArrayLike = Union[float, np.ndarray]

# limits of (2 pi i)^(-2/3) nu_i and (-1)^i sqrt(3i/2) c_i as i grows
NU_RATIO_LIMIT = 2.0 ** (-1.0 / 3.0) * 0.75 ** (2.0 / 3.0)
C_RATIO_LIMIT = -1.0


def _check_range(x: ArrayLike) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    lo, hi = AIRY_RANGE
    if np.any(values < lo) or np.any(values > hi) or np.isnan(values).any():
        raise ResetLdpDomainException(f"Airy argument outside [{lo}, {hi}]: {x}")
    return values


def _output(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(values) if np.ndim(like) == 0 else values


def ai(x: ArrayLike) -> ArrayLike:
    values = _check_range(x)
    return _output(special.airy(values)[0], x)


def ai_prime(x: ArrayLike) -> ArrayLike:
    values = _check_range(x)
    return _output(special.airy(values)[1], x)


def ai_second(x: ArrayLike) -> ArrayLike:
    """Ai''(x) = x Ai(x)."""
    values = _check_range(x)
    return _output(values * special.airy(values)[0], x)


def integral_to_origin(z: float) -> float:
    """∫_z^0 Ai(x) dx for z <= 0."""
    return float(special.itairy(abs(z))[2])


def zero_seed(i: int) -> float:
    """Asymptotic guess for the i-th zero of Ai'."""
    return -((3.0 * math.pi * (4 * i - 3) / 8.0) ** (2.0 / 3.0))


def refine_zero(i: int) -> float:
    """Newton iteration on Ai' from the asymptotic seed, bisection as fallback."""
    x = zero_seed(i)
    for _ in range(NEWTON_MAX_ITER):
        value, slope = ai_prime(x), ai_second(x)
        if abs(value) < NEWTON_TOL:
            return x
        step = value / slope
        x -= step
        if abs(step) <= 1e-15 * abs(x):
            return x

    LOGGER.debug(f"Newton did not settle for zero {i}, bracketing instead")
    lo = 0.5 * (zero_seed(i) + zero_seed(i + 1))
    hi = 0.0 if i == 1 else 0.5 * (zero_seed(i - 1) + zero_seed(i))
    try:
        return float(optimize.brentq(ai_prime, lo, hi, xtol=1e-15, rtol=4e-16))
    except ValueError as e:
        raise ResetLdpNumericException(
            f"Could not locate zero {i} of Ai'", {"i": i, "bracket": (lo, hi)}, str(e)
        )


def coefficient(z: float) -> float:
    """c = (1 + 3 ∫_z^0 Ai) / (3 |z| Ai(z))."""
    return (1.0 + 3.0 * integral_to_origin(z)) / (3.0 * abs(z) * ai(z))


@dataclass(frozen=True)
class AiryTable:
    count: int
    z: np.ndarray
    nu: np.ndarray
    c: np.ndarray

    def rows(self) -> List[Tuple[int, float, float, float]]:
        return [
            (i + 1, float(self.z[i]), float(self.nu[i]), float(self.c[i]))
            for i in range(self.count)
        ]

    def asymptotic_ratios(self, i: int) -> Tuple[float, float]:
        """(2 pi i)^(-2/3) nu_i and (-1)^i sqrt(3i/2) c_i for the 1-based mode i."""
        if not 1 <= i <= self.count:
            raise ResetLdpDomainException(f"Mode {i} not in a table of {self.count}")
        nu_ratio = (2.0 * math.pi * i) ** (-2.0 / 3.0) * float(self.nu[i - 1])
        c_ratio = (-1.0) ** i * math.sqrt(1.5 * i) * float(self.c[i - 1])
        return nu_ratio, c_ratio


@lru_cache(maxsize=4)
def build_table(count: int = AIRY_TABLE_SIZE) -> AiryTable:
    if count < 1:
        raise ResetLdpDomainException(f"Airy table needs at least one mode: {count}")
    z = np.array([refine_zero(i) for i in range(1, count + 1)])
    c = np.empty(count)
    for idx, zero in enumerate(z):
        c[idx] = coefficient(zero)
        # same constant through Ai'' = x Ai
        other = -(1.0 + 3.0 * integral_to_origin(zero)) / (3.0 * ai_second(zero))
        if abs(other - c[idx]) > 1e-9 * max(1.0, abs(c[idx])):
            raise ResetLdpNumericException(
                f"Inconsistent coefficient for mode {idx + 1}",
                {"c": c[idx], "c_second": other},
            )
    if np.any(np.diff(z) >= 0):
        raise ResetLdpNumericException("Airy zeros are not strictly decreasing")
    nu = 2.0 ** (-1.0 / 3.0) * np.abs(z)
    LOGGER.debug(f"Airy table of {count} modes built, nu_1={nu[0]:.10f}")
    return AiryTable(count=count, z=z, nu=nu, c=c)


def accelerated_sum(terms: np.ndarray, rounds: int = AVERAGING_ROUNDS) -> np.ndarray:
    """
    Sum of an alternating series over axis 0.

    The last partial sums are averaged pairwise ``rounds`` times.
    """
    partial = np.cumsum(terms, axis=0)
    rounds = min(rounds, partial.shape[0] - 1)
    tail = partial[partial.shape[0] - rounds - 1 :]
    for _ in range(rounds):
        tail = 0.5 * (tail[1:] + tail[:-1])
    return tail[0]


def _modes(exponent: np.ndarray, table: AiryTable, shift: float) -> np.ndarray:
    return table.c[:, None] * np.exp(-(table.nu[:, None] - shift) * exponent[None, :])


def truncation_bound(theta: ArrayLike, table: Optional[AiryTable] = None) -> ArrayLike:
    """Size of the first omitted term of the Laplace series."""
    table = table or build_table()
    u = np.asarray(theta, dtype=float) ** (2.0 / 3.0)
    next_nu = 2.0 ** (-1.0 / 3.0) * abs(zero_seed(table.count + 1))
    next_c = abs(table.c[-1])
    return _output(next_c * np.exp(-next_nu * u), theta)


def abs_area_laplace(theta: ArrayLike, table: Optional[AiryTable] = None) -> ArrayLike:
    """E[exp(-theta A)], A the absolute area of a unit Brownian path."""
    table = table or build_table()
    values = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any(values < 0):
        raise ResetLdpDomainException(f"Laplace argument must be non-negative: {theta}")
    result = np.ones(values.shape)
    positive = values > 0
    if positive.any():
        u = values[positive] ** (2.0 / 3.0)
        result[positive] = accelerated_sum(_modes(u, table, 0.0))
    return _output(result, theta)


def h_series(u: ArrayLike, table: Optional[AiryTable] = None) -> ArrayLike:
    """sum_i c_i exp(-(nu_i - nu_1) u), equal to 1 at u = 0."""
    table = table or build_table()
    values = np.atleast_1d(np.asarray(u, dtype=float))
    result = np.ones(values.shape)
    positive = values > 0
    if positive.any():
        result[positive] = accelerated_sum(_modes(values[positive], table, table.nu[0]))
    return _output(result, u)


def log_h(theta: ArrayLike, table: Optional[AiryTable] = None) -> ArrayLike:
    """log h at u = theta^(2/3)."""
    u = np.asarray(theta, dtype=float) ** (2.0 / 3.0)
    return _output(np.log(np.asarray(h_series(u, table))), theta)


def q_series(theta: ArrayLike, table: Optional[AiryTable] = None) -> ArrayLike:
    """
    d/dtheta of log E[exp(-theta A)] with the sign flipped, i.e. the mean of A
    under the exponentially tilted law. Equals E[A] at theta = 0.
    """
    table = table or build_table()
    values = np.atleast_1d(np.asarray(theta, dtype=float))
    u = values ** (2.0 / 3.0)
    result = np.empty(values.shape)

    def from_series(u_values: np.ndarray) -> np.ndarray:
        shift = table.nu[0]
        weighted = accelerated_sum(table.nu[:, None] * _modes(u_values, table, shift))
        plain = accelerated_sum(_modes(u_values, table, shift))
        return (2.0 / 3.0) * u_values ** (-0.5) * weighted / plain

    large = u >= SERIES_MIN_EXPONENT
    if large.any():
        result[large] = from_series(u[large])
    if (~large).any():
        # linear in theta between theta = 0 and the first reliable point
        theta_min = SERIES_MIN_EXPONENT**1.5
        q_min = from_series(np.array([SERIES_MIN_EXPONENT]))[0]
        fraction = values[~large] / theta_min
        result[~large] = MEAN_ABS_AREA + fraction * (q_min - MEAN_ABS_AREA)
    return _output(result, theta)


@dataclass
class ConjectureReport:
    u_grid: np.ndarray
    h: np.ndarray
    min_slope: float
    max_slope: float
    non_decreasing: bool
    small_limit: float
    large_limit: float
    c1: float


def conjecture_scan(
    s_grid: np.ndarray, table: Optional[AiryTable] = None, tolerance: float = SERIES_TOL
) -> ConjectureReport:
    """
    Check whether h(s) = sum_i c_i exp(-(nu_i - nu_1) s^(2/3)) is non-decreasing,
    starting from 1 near zero and approaching c_1.
    """
    table = table or build_table()
    grid = np.asarray(s_grid, dtype=float)
    if grid.size < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ResetLdpDomainException("Scan grid must be positive and increasing")
    u = grid ** (2.0 / 3.0)
    values = np.asarray(h_series(u, table))
    slopes = np.diff(values) / np.diff(grid)
    scale = max(1.0, float(np.abs(values).max()))
    report = ConjectureReport(
        u_grid=u,
        h=values,
        min_slope=float(slopes.min()),
        max_slope=float(slopes.max()),
        non_decreasing=bool(np.all(np.diff(values) >= -1e3 * tolerance * scale)),
        small_limit=float(values[0]),
        large_limit=float(values[-1]),
        c1=float(table.c[0]),
    )
    if not report.non_decreasing:
        LOGGER.warning(
            "h is not monotone on the scan grid",
            extra={"details": f"minimum slope {report.min_slope:.3e}"},
        )
    return report
