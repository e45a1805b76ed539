"""Named verification checks run by the verify command."""
import enum
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..definitions.constants import (
    CLT_HORIZON,
    DEFAULT_HORIZON,
    DEFAULT_SAMPLES,
    RateRegime,
)
from ..tools.exceptions import (
    ResetLdpAcceptanceException,
    ResetLdpException,
    ResetLdpOracleRequiredException,
    ResetLdpUsageException,
)
from ..tools.resources import plugin_name
from . import airy
from .abs_area_law import AbsAreaLaw, AbsAreaLawOpts, load_default_law
from .dist import CubicSuperExp, Exponential, ExpPoly, WaitingTimeModel
from .functionals import AbsArea, Area, FunctionalModel, OccupationTime
from .phi import PhiSolver, diagnose, varpi_check
from .rate import RateSolver, scaling_check
from .sim import SimulationOpts, TrajectoryBatch, cgf_estimates, simulate, summarize

LOGGER = logging.getLogger(plugin_name())

QUICK_SAMPLES = 10_000
QUICK_LAW = AbsAreaLawOpts(paths=200_000, count=2048, step_exponent=6)
# estimates at t and t / HORIZON_RATIO remove the leading finite-horizon term
HORIZON_RATIO = 4.0
STANDARD_ERRORS = 3.0


class Check(enum.Enum):
    """Checks of the verify command, in running order"""

    PoissonOccupation = {"id": "poisson-occupation"}
    AiryConstants = {"id": "airy-constants"}
    SeriesNormalization = {"id": "series-normalization"}
    AreaDiagnostics = {"id": "area-diagnostics"}
    ZeroResettingScaling = {"id": "zero-resetting-scaling"}
    AbsAreaStretch = {"id": "abs-area-stretch"}
    LlnClt = {"id": "lln-clt"}
    Cgf = {"id": "cgf"}
    VarpiHypothesis = {"id": "varpi-hypothesis"}
    Properties = {"id": "properties"}

    @property
    def id(self) -> str:
        return self.value["id"]

    @staticmethod
    def from_id(check_id: str) -> "Check":
        for check in Check:
            if check.id == check_id:
                return check
        choices = ", ".join(check.id for check in Check)
        raise ResetLdpUsageException(
            "checks", f"unknown check {check_id}, use one of {choices}"
        )


@dataclass
class AcceptanceOpts:
    quick: bool = False
    seed: int = 0
    workers: Optional[int] = None
    checks: Optional[List[Check]] = None

    def check_if_opts_set(self) -> bool:
        return self.seed >= 0 and (self.workers is None or self.workers > 0)

    @property
    def samples(self) -> int:
        return QUICK_SAMPLES if self.quick else DEFAULT_SAMPLES


@dataclass
class CheckResult:
    check: str
    passed: bool
    detail: str
    seconds: float = 0.0


def extrapolate(fine: float, coarse: float, exponent: float) -> float:
    """Limit estimate from values at t and t / HORIZON_RATIO, error ~ t^-exponent."""
    factor = HORIZON_RATIO**exponent
    return (factor * fine - coarse) / (factor - 1.0)


def extrapolated_stderr(fine: float, coarse: float, exponent: float) -> float:
    factor = HORIZON_RATIO**exponent
    return math.hypot(factor * fine, coarse) / (factor - 1.0)


def _deviation(failures: List[str], label: str, value: float, bound: float) -> None:
    if not value <= bound:
        failures.append(f"{label}: {value:.3e} > {bound:.1e}")


def _conclude(failures: List[str]) -> None:
    if failures:
        raise ResetLdpAcceptanceException("; ".join(failures))


class AcceptanceRun:
    """
    Runs the selected checks. A check that raises is reported as failed
    and the run carries on with the next one.
    """

    def __init__(self, opts: AcceptanceOpts) -> None:
        if not opts.check_if_opts_set():
            raise ResetLdpUsageException("verify", f"invalid options {opts}")
        self.opts = opts
        self.__law: Optional[AbsAreaLaw] = None
        self.__batches: Dict[Tuple[str, str, float], TrajectoryBatch] = {}
        self.checks: Dict[Check, Callable[[], str]] = {
            Check.PoissonOccupation: self._poisson_occupation,
            Check.AiryConstants: self._airy_constants,
            Check.SeriesNormalization: self._series_normalization,
            Check.AreaDiagnostics: self._area_diagnostics,
            Check.ZeroResettingScaling: self._zero_resetting_scaling,
            Check.AbsAreaStretch: self._abs_area_stretch,
            Check.LlnClt: self._lln_clt,
            Check.Cgf: self._cgf,
            Check.VarpiHypothesis: self._varpi_hypothesis,
            Check.Properties: self._properties,
        }

    def run(self) -> List[CheckResult]:
        selected = self.opts.checks or list(Check)
        results = []
        for check in selected:
            start = time.perf_counter()
            try:
                detail = self.checks[check]()
                passed = True
            except ResetLdpException as e:
                detail, passed = f"{e.message} ({e.details})", False
            elapsed = time.perf_counter() - start
            if passed:
                LOGGER.info(f"Check {check.id} passed in {elapsed:.1f} s")
            else:
                LOGGER.error(
                    f"Check {check.id} failed in {elapsed:.1f} s",
                    extra={"details": detail},
                )
            results.append(CheckResult(check.id, passed, detail, elapsed))
        return results

    @property
    def law(self) -> AbsAreaLaw:
        if self.__law is None:
            try:
                self.__law = load_default_law()
            except ResetLdpOracleRequiredException:
                if not self.opts.quick:
                    raise
                LOGGER.warning("No cached absolute area table, building a small one")
                self.__law = AbsAreaLaw.build(
                    AbsAreaLawOpts(
                        paths=QUICK_LAW.paths,
                        count=QUICK_LAW.count,
                        step_exponent=QUICK_LAW.step_exponent,
                        seed=self.opts.seed,
                        workers=self.opts.workers,
                    )
                )
        return self.__law

    def functionals(self) -> List[FunctionalModel]:
        return [OccupationTime(), Area(), AbsArea(law=self.law)]

    def batch(
        self, fn: FunctionalModel, dist: WaitingTimeModel, t: float
    ) -> TrajectoryBatch:
        key = (fn.name, dist.spec, t)
        if key not in self.__batches:
            self.__batches[key] = simulate(fn, dist, self.sim_opts(t))
        return self.__batches[key]

    def sim_opts(self, t: float) -> SimulationOpts:
        # each horizon gets its own streams so that the two estimates of an
        # extrapolation are independent
        horizon_index = int(round(math.log2(t)))
        return SimulationOpts(
            t=t,
            n=self.opts.samples,
            seed=self.opts.seed * 64 + horizon_index + 32,
            workers=self.opts.workers,
        )

    def _poisson_occupation(self) -> str:
        failures: List[str] = []
        fn = OccupationTime()
        worst_phi = worst_rate = 0.0
        for r in (0.5, 1.0, 2.0):
            solver = RateSolver(fn, Exponential(r))
            for k in np.linspace(-5.0, 5.0, 41):
                exact = r - (k + math.sqrt(k * k + 4.0 * r * r)) / 2.0
                deviation = abs(solver.phi.solve(float(k)).value - exact)
                worst_phi = max(worst_phi, deviation)
            for w in np.linspace(0.02, 0.98, 49):
                exact = r * (1.0 - 2.0 * math.sqrt(w * (1.0 - w)))
                deviation = abs(solver.rate_at(float(w)).value - exact)
                worst_rate = max(worst_rate, deviation)
        _deviation(failures, "phi", worst_phi, 1e-8)
        _deviation(failures, "I", worst_rate, 1e-7)
        _conclude(failures)
        return f"max |dphi| {worst_phi:.2e}, max |dI| {worst_rate:.2e}"

    def _airy_constants(self) -> str:
        table = airy.build_table()
        failures: List[str] = []
        _deviation(failures, "nu_1", abs(table.nu[0] - 0.80861), 5e-6)
        _deviation(failures, "c_1", abs(table.c[0] - 1.48257), 5e-6)
        nu_ratio, c_ratio = table.asymptotic_ratios(50)
        _deviation(
            failures,
            "nu ratio at i=50",
            abs(nu_ratio / airy.NU_RATIO_LIMIT - 1.0),
            0.02,
        )
        _deviation(
            failures, "c ratio at i=50", abs(c_ratio / airy.C_RATIO_LIMIT - 1.0), 0.05
        )
        _conclude(failures)
        return (
            f"nu_1={table.nu[0]:.8f}, c_1={table.c[0]:.8f},"
            f" ratios at i=50: {nu_ratio:.4f}, {c_ratio:.4f}"
        )

    def _series_normalization(self) -> str:
        failures: List[str] = []
        near_zero = float(airy.abs_area_laplace(1e-4))
        _deviation(failures, "series at 1e-4", abs(near_zero - 1.0), 1e-3)
        law = self.law
        spreads, bounds = [], []
        for theta in (0.5, 1.0, 2.0):
            series = float(airy.abs_area_laplace(theta))
            bound = float(airy.truncation_bound(theta))
            bounds.append(bound)
            _deviation(failures, f"series truncation at {theta}", bound, 1e-10)
            spread = abs(series - law.laplace(theta)) / law.laplace_stderr(theta)
            spreads.append(spread)
            _deviation(failures, f"table vs series at {theta} (stderr)", spread, 3.0)
        _conclude(failures)
        return (
            f"series at 1e-4: {near_zero:.6f}, spreads {np.round(spreads, 2)},"
            f" truncation <= {max(bounds):.1e}"
        )

    def _area_diagnostics(self) -> str:
        failures: List[str] = []
        xi_ratios = []
        for r in (0.25, 1.0, 4.0):
            dist = CubicSuperExp(r)
            report = diagnose(Area(), dist)
            xi_exact = -((6.0 * r) ** (1.0 / 3.0))
            w_plus_exact = (20.0 / 3.0) * (6.0 * r) ** (-1.0 / 6.0)
            _deviation(failures, f"xi r={r}", abs(report.xi - xi_exact), 1e-8)
            _deviation(failures, f"Lambda r={r}", abs(report.lambda_diag - 1.0), 1e-8)
            _deviation(failures, f"w_+ r={r}", abs(report.w_plus - w_plus_exact), 1e-6)
            big_xi = 360.0 * r * abs(xi_exact) ** -6
            _deviation(
                failures, f"Xi r={r}", abs(report.xi_diag / big_xi - 1.0), 1e-6
            )
            xi_ratios.append(report.xi_diag * r * r / 10.0)

            w_grid = np.linspace(-2.0 * w_plus_exact, 2.0 * w_plus_exact, 41)
            profile = RateSolver(Area(), dist, report=report).profile(w_grid)
            slopes = sorted(s.slope for s in profile.stretches)
            edge = math.sqrt(6.0 * r)
            if len(slopes) != 2 or any(
                abs(abs(s) - edge) > 1e-6 * edge for s in slopes
            ):
                failures.append(f"stretches r={r}: slopes {slopes}")
        _conclude(failures)
        return f"Xi r^2 / 10 for r = 0.25, 1, 4: {np.round(xi_ratios, 4)}"

    def _zero_resetting_scaling(self) -> str:
        report = scaling_check(Area(), (0.25, 1.0, 4.0), (0.5, 1.0, 2.0))
        failures: List[str] = []
        _deviation(failures, "scaling identity", report.max_rel_dev, 1e-6)
        if not report.small_w_ok:
            failures.append(f"small-w law {report.small_w}")
        _conclude(failures)
        return f"max relative deviation {report.max_rel_dev:.2e}"

    def _abs_area_stretch(self) -> str:
        fn = AbsArea(law=self.law)
        dist = CubicSuperExp(1.0)
        solver = RateSolver(fn, dist)
        w_plus = solver.report.w_plus
        profile = solver.profile(np.linspace(0.05, 2.0 * w_plus, 41))
        failures: List[str] = []
        slopes = [s.slope for s in profile.stretches]
        if len(slopes) != 1 or abs(slopes[0] - math.sqrt(6.0)) > 1e-6:
            failures.append(f"stretch slopes {slopes}")
        report = scaling_check(fn, (1.0,), (0.5,))
        ratio = report.small_w[0][2]
        if not report.small_w_ok:
            failures.append(f"small-w ratio {ratio:.4f} outside [0.85, 1.15]")
        _conclude(failures)
        return f"w_+={w_plus:.6f}, small-w ratio {ratio:.4f}"

    def _lln_clt(self) -> str:
        failures: List[str] = []
        coarse_t = DEFAULT_HORIZON / HORIZON_RATIO
        shape_coarse_t = CLT_HORIZON / HORIZON_RATIO
        for fn in self.functionals():
            for dist in (Exponential(1.0), CubicSuperExp(1.0)):
                label = f"{fn.name}/{dist.spec}"
                fine = self.__summary(fn, dist, DEFAULT_HORIZON)
                coarse = self.__summary(fn, dist, coarse_t)
                mean = extrapolate(fine.mean_F_over_t, coarse.mean_F_over_t, 1.0)
                mean_se = extrapolated_stderr(fine.mean_stderr, coarse.mean_stderr, 1.0)
                _deviation(
                    failures,
                    f"{label} mean",
                    abs(mean - fine.mu),
                    STANDARD_ERRORS * mean_se,
                )
                var = extrapolate(fine.var_scaled, coarse.var_scaled, 1.0)
                var_se = extrapolated_stderr(fine.var_stderr, coarse.var_stderr, 1.0)
                _deviation(
                    failures,
                    f"{label} variance",
                    abs(var - fine.v),
                    STANDARD_ERRORS * var_se,
                )

                shape = self.__summary(fn, dist, CLT_HORIZON)
                shape_coarse = self.__summary(fn, dist, shape_coarse_t)
                for name, exponent in (("skew", 0.5), ("kurtosis", 1.0)):
                    limit = extrapolate(
                        getattr(shape, name), getattr(shape_coarse, name), exponent
                    )
                    limit_se = extrapolated_stderr(
                        getattr(shape, f"{name}_stderr"),
                        getattr(shape_coarse, f"{name}_stderr"),
                        exponent,
                    )
                    _deviation(
                        failures,
                        f"{label} {name}",
                        abs(limit),
                        STANDARD_ERRORS * limit_se,
                    )
        _conclude(failures)
        return "means, variances and shapes consistent after horizon extrapolation"

    def __summary(self, fn: FunctionalModel, dist: WaitingTimeModel, t: float):
        return summarize(fn, dist, self.batch(fn, dist, t), self.sim_opts(t))

    def _cgf(self) -> str:
        failures: List[str] = []
        details = []
        cases: Sequence[Tuple[FunctionalModel, WaitingTimeModel, np.ndarray]] = (
            (OccupationTime(), Exponential(1.0), np.linspace(-1.0, 1.0, 9)),
            (Area(), CubicSuperExp(1.0), np.linspace(-1.5, 1.5, 13)),
        )
        coarse_t = DEFAULT_HORIZON / HORIZON_RATIO
        for fn, dist, k_grid in cases:
            solver = PhiSolver(fn, dist)
            fine = cgf_estimates(
                self.batch(fn, dist, DEFAULT_HORIZON).F,
                DEFAULT_HORIZON,
                k_grid,
                self.opts.seed,
            )
            coarse = cgf_estimates(
                self.batch(fn, dist, coarse_t).F, coarse_t, k_grid, self.opts.seed
            )
            covered = reliable = 0
            for point, coarse_point in zip(fine, coarse):
                if point.k == 0 or not (point.reliable and coarse_point.reliable):
                    continue
                reliable += 1
                limit = extrapolate(point.g_hat, coarse_point.g_hat, 1.0)
                half = extrapolated_stderr(
                    0.5 * (point.ci_hi - point.ci_lo),
                    0.5 * (coarse_point.ci_hi - coarse_point.ci_lo),
                    1.0,
                )
                if abs(limit + solver.solve(point.k).value) <= half:
                    covered += 1
            label = f"{fn.name}/{dist.spec}"
            if reliable == 0:
                failures.append(f"{label}: no reliable grid points")
            elif covered < 0.9 * reliable:
                failures.append(f"{label}: {covered} of {reliable} covered")
            details.append(f"{label} {covered}/{reliable}")
        _conclude(failures)
        return ", ".join(details)

    def _varpi_hypothesis(self) -> str:
        k_grid = np.linspace(-3.0, 3.0, 13 if self.opts.quick else 61)
        failures = []
        for fn in self.functionals():
            for dist in (Exponential(1.0), CubicSuperExp(1.0), ExpPoly(2.0)):
                rows = varpi_check(fn, dist, k_grid)
                bad = [row.k for row in rows if not row.ok]
                if bad:
                    failures.append(f"{fn.name}/{dist.spec} at k={bad}")
        _conclude(failures)
        return "varpi >= phi for all pairings"

    def _properties(self) -> str:
        failures: List[str] = []
        occupation = RateSolver(OccupationTime(), Exponential(1.0))
        area = RateSolver(Area(), CubicSuperExp(1.0))

        for solver, k_grid in (
            (occupation, np.linspace(-3.0, 3.0, 25)),
            (area, np.linspace(-2.4, 2.4, 25)),
        ):
            values = np.array([solver.phi.solve(float(k)).value for k in k_grid])
            second = np.diff(values, 2)
            _deviation(
                failures, f"{solver.fn.name} phi concavity", float(second.max()), 1e-8
            )

        for dist in (Exponential(1.0), CubicSuperExp(1.0)):
            phi = PhiSolver(OccupationTime(), dist)
            worst = max(
                abs(phi.solve(-k).value - phi.solve(k).value - k)
                for k in np.linspace(0.25, 3.0, 12)
            )
            _deviation(failures, f"occupation symmetry {dist.spec}", worst, 1e-8)

        worst = max(
            abs(occupation.rate_at(0.5 - w).value - occupation.rate_at(0.5 + w).value)
            for w in np.linspace(0.05, 0.45, 9)
        )
        _deviation(failures, "occupation reflection", worst, 1e-8)
        worst = max(
            abs(area.rate_at(-w).value - area.rate_at(w).value)
            for w in (0.5, 1.0, 2.0, 6.0)
        )
        _deviation(failures, "area evenness", worst, 1e-8)

        for solver, k_grid, support in (
            (occupation, np.linspace(-2.0, 2.0, 9), (0.005, 0.995)),
            (area, np.linspace(-2.0, 2.0, 9), (-4.0, 4.0)),
        ):
            # maximizers of k w - I(w) sit on the grid
            optima = [-solver.phi.derivative(float(k)) for k in k_grid]
            grid = np.unique(np.concatenate([np.linspace(*support, 101), optima]))
            profile = solver.profile(grid)
            worst = max(
                abs(
                    solver.conjugate(profile, float(k))
                    + solver.phi.solve(float(k)).value
                )
                for k in k_grid
            )
            _deviation(failures, f"{solver.fn.name} duality", worst, 1e-5)
            worst = max(
                abs(point.w + solver.phi.derivative(point.k_star))
                for point in profile.points
                if point.regime == RateRegime.INTERIOR
            )
            _deviation(failures, f"{solver.fn.name} subgradient", worst, 1e-6)
        _conclude(failures)
        return "all property checks hold"


def run_acceptance(opts: AcceptanceOpts) -> List[CheckResult]:
    return AcceptanceRun(opts).run()
