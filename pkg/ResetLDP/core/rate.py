"""Rate function I(w) = sup_k {w k + phi(k)} and its profiles."""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from scipy.special import gamma

from ..definitions.constants import (
    STRETCH_TOL,
    Classification,
    FunctionalKind,
    RateRegime,
)
from ..tools.exceptions import ResetLdpDomainException, ResetLdpNumericException
from ..tools.resources import plugin_name
from . import airy
from .dist import CubicSuperExp, WaitingTimeModel
from .functionals import FunctionalModel
from .phi import PhiSolver, RegimeReport, diagnose_with
from .quadrature import DEFAULT_TOLERANCES, QuadratureTolerances

LOGGER = logging.getLogger(plugin_name())

MAX_BRACKET_STEPS = 60
# deviations near the mean, where I vanishes, are measured in absolute terms
RATE_FLOOR = 1e-8


@dataclass(frozen=True)
class RatePoint:
    w: float
    value: float
    k_star: float
    regime: RateRegime


@dataclass(frozen=True)
class Stretch:
    w_start: float
    w_end: float
    slope: float


@dataclass
class RateProfile:
    points: List[RatePoint]
    stretches: List[Stretch] = field(default_factory=list)
    singular_points: List[float] = field(default_factory=list)

    @property
    def w_grid(self) -> np.ndarray:
        return np.array([p.w for p in self.points])

    @property
    def I(self) -> np.ndarray:  # noqa: E743
        return np.array([p.value for p in self.points])

    @property
    def k_star(self) -> np.ndarray:
        return np.array([p.k_star for p in self.points])

    def is_convex(self, tolerance: float = 1e-8) -> bool:
        """Discrete convexity on the finite part of a uniform or non-uniform grid."""
        w, values = self.w_grid, self.I
        finite = np.isfinite(values)
        w, values = w[finite], values[finite]
        if w.size < 3:
            return True
        slopes = np.diff(values) / np.diff(w)
        return bool(np.all(np.diff(slopes) >= -tolerance * (1.0 + np.abs(slopes[1:]))))

    def minimizer(self) -> float:
        return float(self.w_grid[int(np.nanargmin(self.I))])


class RateSolver:
    """Legendre transform of phi, sharing one phi cache across a profile."""

    def __init__(
        self,
        fn: FunctionalModel,
        dist: WaitingTimeModel,
        tolerances: QuadratureTolerances = DEFAULT_TOLERANCES,
        report: Optional[RegimeReport] = None,
    ) -> None:
        self.fn = fn
        self.dist = dist
        self.phi = PhiSolver(fn, dist, tolerances)
        self.report = report or diagnose_with(self.phi)

    def objective(self, w: float, k: float) -> float:
        return w * k + self.phi.solve(k).value

    def rate_at(self, w: float) -> RatePoint:
        lo, hi = self.fn.support
        if w < lo or w > hi:
            return RatePoint(w, math.inf, math.nan, RateRegime.SUPPORT)
        if w in (lo, hi):
            return RatePoint(
                w,
                self.fn.support_endpoint_limit(self.dist, w),
                math.nan,
                RateRegime.LIMIT,
            )
        report = self.report
        if report.classification == Classification.FLAT_ZERO:
            return RatePoint(w, 0.0, 0.0, RateRegime.FLAT)
        if math.isfinite(report.k_a) and w <= report.slope_lo:
            return self.__affine(w, report.k_a)
        if math.isfinite(report.k_b) and w >= report.slope_hi:
            return self.__affine(w, report.k_b)
        return self.__interior(w)

    def __affine(self, w: float, k_edge: float) -> RatePoint:
        value = self.objective(w, k_edge)
        if k_edge == 0.0:
            return RatePoint(w, value, 0.0, RateRegime.FLAT)
        return RatePoint(w, value, k_edge, RateRegime.AFFINE)

    def __gap(self, w: float, k: float) -> float:
        """w + phi'(k), decreasing in k."""
        return w + self.phi.derivative(k)

    def __interior(self, w: float) -> RatePoint:
        k_a, k_b = self.report.k_a, self.report.k_b
        start = 0.0 if k_a < 0.0 < k_b else 0.5 * (k_a + k_b)
        if not math.isfinite(start):
            start = -1.0 if math.isfinite(k_b) else 1.0
        trace: List[Tuple[float, float]] = []
        gap = self.__gap(w, start)
        trace.append((start, gap))
        if gap == 0.0:
            return RatePoint(w, self.objective(w, start), start, RateRegime.INTERIOR)

        direction = 1.0 if gap > 0 else -1.0
        edge = k_b if direction > 0 else k_a
        previous, step = start, 1.0
        bracket = None
        for n in range(1, MAX_BRACKET_STEPS + 1):
            if math.isfinite(edge):
                candidate = edge - (edge - start) * 2.0**-n
            else:
                candidate = start + direction * step
                step *= 2.0
            value = self.__gap(w, candidate)
            trace.append((candidate, value))
            if value == 0.0:
                return RatePoint(
                    w, self.objective(w, candidate), candidate, RateRegime.INTERIOR
                )
            if (value > 0) != (gap > 0):
                bracket = tuple(sorted((previous, candidate)))
                break
            previous = candidate

        if bracket is None:
            return self.__fallback(w, trace)
        k_star = float(
            optimize.brentq(lambda k: self.__gap(w, k), *bracket, xtol=1e-13)
        )
        return RatePoint(w, self.objective(w, k_star), k_star, RateRegime.INTERIOR)

    def __fallback(self, w: float, trace: List[Tuple[float, float]]) -> RatePoint:
        ks = [k for k, _ in trace]
        bounds = (min(ks), max(ks))
        LOGGER.warning(
            f"No sign change of w + phi' at w={w}, maximizing directly",
            extra={"details": f"bracket trace {trace}"},
        )
        result = optimize.minimize_scalar(
            lambda k: -self.objective(w, k),
            bounds=bounds,
            method="bounded",
            options={"xatol": 1e-10},
        )
        if not result.success:
            raise ResetLdpNumericException(
                f"Could not maximize w k + phi(k) at w={w}", {"trace": trace}
            )
        return RatePoint(w, -float(result.fun), float(result.x), RateRegime.INTERIOR)

    def profile(self, w_grid: Sequence[float]) -> RateProfile:
        grid = [float(w) for w in w_grid]
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ResetLdpDomainException("The w grid must be sorted")
        points = [self.rate_at(w) for w in grid]
        profile = RateProfile(points=points)
        if self.report.classification != Classification.FLAT_ZERO:
            profile.stretches = self.__stretches(points)
        lo, hi = self.fn.support
        profile.singular_points = [
            w
            for w in (self.report.w_minus, self.report.w_plus)
            if math.isfinite(w) and lo < w < hi
        ]
        return profile

    def __stretches(self, points: List[RatePoint]) -> List[Stretch]:
        stretches = []
        for edge in (self.report.k_a, self.report.k_b):
            if not math.isfinite(edge):
                continue
            pinned = [
                math.isfinite(p.k_star)
                and abs(p.k_star - edge) <= STRETCH_TOL * max(1.0, abs(edge))
                for p in points
            ]
            idx = 0
            while idx < len(points):
                if not pinned[idx]:
                    idx += 1
                    continue
                end = idx
                while end + 1 < len(points) and pinned[end + 1]:
                    end += 1
                if end > idx:
                    run = points[idx : end + 1]
                    stretches.append(self.__checked_stretch(run, edge))
                idx = end + 1
        return sorted(stretches, key=lambda s: s.w_start)

    def __checked_stretch(self, run: List[RatePoint], edge: float) -> Stretch:
        slopes = np.diff([p.value for p in run]) / np.diff([p.w for p in run])
        deviation = float(np.max(np.abs(slopes - edge)))
        if deviation > 1e-6 * max(1.0, abs(edge)):
            LOGGER.warning(
                f"Affine stretch slope deviates from {edge} by {deviation:.3e}"
            )
        return Stretch(run[0].w, run[-1].w, edge)

    def conjugate(self, profile: RateProfile, k: float) -> float:
        """sup_w {k w - I(w)} over the grid, to compare with -phi(k)."""
        values = k * profile.w_grid - profile.I
        return float(np.nanmax(np.where(np.isfinite(values), values, -np.inf)))


def rate_at(fn: FunctionalModel, dist: WaitingTimeModel, w: float) -> RatePoint:
    return RateSolver(fn, dist).rate_at(w)


def rate_profile(
    fn: FunctionalModel, dist: WaitingTimeModel, w_grid: Sequence[float]
) -> RateProfile:
    return RateSolver(fn, dist).profile(w_grid)


@dataclass
class ScalingRow:
    r: float
    w: float
    I_r: float
    scaled_I_1: float
    rel_dev: float


@dataclass
class ScalingReport:
    functional: str
    rows: List[ScalingRow]
    small_w: List[Tuple[float, float, float]]
    max_rel_dev: float
    small_w_ok: bool


def scaling_check(
    fn: FunctionalModel,
    r_list: Sequence[float],
    w_grid: Sequence[float],
    tolerance: float = 1e-6,
) -> ScalingReport:
    """
    I_r(w) = r^(1/3) I_1(r^(1/6) w) for cubic waiting times, plus the small-w
    behaviour of I_1: Gamma(1/3) w^2 / 2 for the area and
    4 nu_1^3 / (27 w^2) for the absolute area.
    """
    if fn.kind == FunctionalKind.OCCUPATION:
        raise ResetLdpDomainException("Scaling applies to the area functionals only")
    if any(r <= 0 for r in r_list):
        raise ResetLdpDomainException(f"Rates must be positive: {r_list}")
    unit = RateSolver(fn, CubicSuperExp(1.0))
    rows = []
    for r in r_list:
        solver = RateSolver(fn, CubicSuperExp(float(r)))
        for w in w_grid:
            direct = solver.rate_at(float(w)).value
            scaled = r ** (1.0 / 3.0) * unit.rate_at(r ** (1.0 / 6.0) * float(w)).value
            deviation = abs(direct - scaled) / max(abs(scaled), RATE_FLOOR)
            rows.append(ScalingRow(float(r), float(w), direct, scaled, deviation))

    small_w: List[Tuple[float, float, float]] = []
    if fn.kind == FunctionalKind.AREA:
        for w in (0.05, 0.1, 0.2):
            value = unit.rate_at(w).value
            quadratic = gamma(1.0 / 3.0) * w * w / 2.0
            small_w.append((w, value, abs(value - quadratic) / w**4))
        ratios = [ratio for _, _, ratio in small_w]
        small_w_ok = max(ratios) < 4.0 * min(ratios) if min(ratios) > 0 else True
    else:
        nu_1 = float(airy.build_table().nu[0])
        w = 0.1
        value = unit.rate_at(w).value
        ratio = value * 27.0 * w * w / (4.0 * nu_1**3)
        small_w.append((w, value, ratio))
        small_w_ok = 0.85 <= ratio <= 1.15

    max_rel_dev = max(row.rel_dev for row in rows) if rows else 0.0
    if max_rel_dev > tolerance:
        LOGGER.warning(f"Scaling identity off by {max_rel_dev:.3e}")
    return ScalingReport(fn.name, rows, small_w, max_rel_dev, small_w_ok)
