"""
Joint moment generating function Phi(zeta, k) = E[exp(zeta S + k X)] of a
waiting time S and the reward X collected during it, the function
phi(k) = sup{zeta : Phi(zeta, k) <= 1} and the diagnostics of its
singularities.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import optimize

from ..definitions.constants import (
    ARCSINE_NODES,
    BOUNDARY_DELTAS,
    EDGE_STANDOFF,
    PHI_RESIDUAL_TOL,
    Classification,
    DistFamily,
    FunctionalKind,
    PhiRegime,
)
from ..tools.exceptions import ResetLdpDomainException, ResetLdpNumericException
from ..tools.resources import plugin_name
from . import airy
from .dist import WaitingTimeModel
from .functionals import FunctionalModel, Kernel
from .quadrature import DEFAULT_TOLERANCES, QuadratureTolerances

LOGGER = logging.getLogger(plugin_name())

# relative size below which an exponent is treated as zero
EXPONENT_TOL = 1e-12
# log Phi reported for a divergent Phi inside a root bracket
DIVERGENT_LOG = 1e3
MAX_BRACKET_STEPS = 200
# Lambda counts as 1 within the root residual of Phi = 1
LAMBDA_TOL = 1e-8


@dataclass(frozen=True)
class PhiValue:
    k: float
    value: float
    regime: PhiRegime
    residual: float = math.nan


@dataclass
class RegimeReport:
    functional: str
    dist: str
    ell: float
    r_cubic: float
    mu: float
    lam: float = math.nan
    xi: float = math.nan
    lambda_diag: float = math.nan
    xi_diag: float = math.nan
    w_minus: float = math.nan
    w_plus: float = math.nan
    classification: Optional[Classification] = None
    k_lo: float = -math.inf
    k_hi: float = math.inf
    k_a: float = -math.inf
    k_b: float = math.inf
    slope_lo: float = math.nan
    slope_hi: float = math.nan
    steep: bool = True
    warnings: List[str] = field(default_factory=list)

    @property
    def has_stretch(self) -> bool:
        return self.classification in (
            Classification.AFFINE_STRETCHES,
            Classification.ONE_SIDED_STRETCH,
            Classification.FLAT_ABOVE_MEAN,
        )

    def to_dict(self) -> Dict[str, Any]:
        result = asdict(self)
        for key, value in result.items():
            if isinstance(value, Enum):
                result[key] = value.value
        return result


@dataclass
class _KernelTerms:
    kernel: Kernel
    log_rest: np.ndarray
    log_dk: np.ndarray


class JointMgf:
    """
    Phi(zeta, k) and its tilted moments for one functional and waiting time.

    All expectations are integrals over the waiting time s of the density
    times exp(zeta s) E_s(k). The exponent is collected as a s + b s^3 plus
    slowly varying terms before exponentiating, which decides finiteness
    analytically whenever a or b is nonzero.
    """

    def __init__(
        self,
        fn: FunctionalModel,
        dist: WaitingTimeModel,
        tolerances: QuadratureTolerances = DEFAULT_TOLERANCES,
    ) -> None:
        self.fn = fn
        self.dist = dist
        self.tolerances = tolerances
        self.grid = dist.grid(tolerances)
        self.log_s = self.grid.log_nodes
        self.density_rest = dist.log_density_rest(self.grid.nodes)
        self.__kernels: Dict[float, _KernelTerms] = {}
        self.closed_form = dist.family == DistFamily.EXPONENTIAL and fn.kind in (
            FunctionalKind.OCCUPATION,
            FunctionalKind.ABS_AREA,
        )

    def terms(self, k: float) -> _KernelTerms:
        terms = self.__kernels.get(k)
        if terms is None:
            kernel = self.fn.kernel(k)
            nodes = self.grid.nodes
            terms = _KernelTerms(kernel, kernel.log_rest(nodes), kernel.log_dk(nodes))
            self.__kernels[k] = terms
        return terms

    def cubic_exponent(self, k: float) -> float:
        b = self.terms(k).kernel.cubic - self.dist.cubic_rate
        scale = max(self.terms(k).kernel.cubic, self.dist.cubic_rate, 1.0)
        return 0.0 if abs(b) <= EXPONENT_TOL * scale else b

    def zeta_edge(self, k: float) -> float:
        """Supremum of the zeta with exponentially decaying integrand."""
        b = self.cubic_exponent(k)
        if b > 0:
            return -math.inf
        if b < 0:
            return math.inf
        return self.dist.linear_rate - self.terms(k).kernel.linear

    def edge_slope(self, k: float) -> float:
        """d/dk of the zeta edge, where it is finite."""
        h = 1e-7 * max(1.0, abs(k))
        return (self.zeta_edge(k + h) - self.zeta_edge(k - h)) / (2.0 * h)

    def expectation(
        self,
        zeta: float,
        k: float,
        log_weight: Optional[np.ndarray] = None,
        derivative: bool = False,
    ) -> float:
        """
        E[w(S) exp(zeta S + k X)] for the weight exp(log_weight) on the nodes,
        or E[w(S) X exp(zeta S + k X)] when derivative is set.
        """
        terms = self.terms(k)
        b = self.cubic_exponent(k)
        a = zeta + terms.kernel.linear - self.dist.linear_rate
        if b > 0:
            return math.inf
        if b == 0 and a > EXPONENT_TOL * max(1.0, abs(zeta)):
            return math.inf
        if b == 0 and a > 0:
            a = 0.0
        nodes = self.grid.nodes
        with np.errstate(over="ignore", invalid="ignore"):
            log_values = a * nodes + b * nodes**3 + self.density_rest + terms.log_rest
            if log_weight is not None:
                log_values = log_values + log_weight
            sign = 1.0
            if derivative:
                if terms.kernel.dk_sign == 0:
                    return 0.0
                sign = terms.kernel.dk_sign
                log_values = log_values + terms.log_dk
        return sign * self.grid.integrate_log(log_values)

    def value(self, zeta: float, k: float) -> float:
        if self.closed_form:
            return self.__closed_form(zeta, k)[0]
        return self.expectation(zeta, k)

    def mean_s(self, zeta: float, k: float) -> float:
        """E[S exp(zeta S + k X)]."""
        if self.closed_form:
            return self.__closed_form(zeta, k)[1]
        return self.expectation(zeta, k, self.log_s)

    def mean_x(self, zeta: float, k: float) -> float:
        """E[X exp(zeta S + k X)]."""
        if self.closed_form:
            return self.__closed_form(zeta, k)[2]
        return self.expectation(zeta, k, derivative=True)

    def __closed_form(self, zeta: float, k: float) -> Tuple[float, float, float]:
        rate = self.dist.linear_rate
        if self.fn.kind == FunctionalKind.OCCUPATION:
            a, b = rate - zeta, rate - zeta - k
            if a <= 0 or b <= 0:
                return math.inf, math.inf, math.inf
            ab = a * b
            return (
                rate / math.sqrt(ab),
                0.5 * rate * (a + b) * ab**-1.5,
                0.5 * rate * a * ab**-1.5,
            )
        if k >= 0:
            # positive tilts of the absolute area have no series form
            return (
                self.expectation(zeta, k),
                self.expectation(zeta, k, self.log_s),
                self.expectation(zeta, k, derivative=True),
            )
        table = airy.build_table()
        magnitude = abs(k) ** (2.0 / 3.0)
        denominators = rate + table.nu * magnitude - zeta
        if denominators[0] <= 0:
            return math.inf, math.inf, math.inf
        terms = rate * table.c / denominators
        squared = terms / denominators
        slopes = (2.0 / 3.0) * table.nu * abs(k) ** (-1.0 / 3.0)
        return (
            float(airy.accelerated_sum(terms)),
            float(airy.accelerated_sum(squared)),
            float(airy.accelerated_sum(slopes * squared)),
        )

    def log_value(self, zeta: float, k: float) -> float:
        value = self.value(zeta, k)
        if value == 0.0:
            return -math.inf
        return math.log(value) if math.isfinite(value) else DIVERGENT_LOG


def joint_mgf(
    fn: FunctionalModel, dist: WaitingTimeModel, zeta: float, k: float
) -> float:
    return JointMgf(fn, dist).value(zeta, k)


def joint_mgf_arcsine(
    dist: WaitingTimeModel, zeta: float, k: float, nodes: int = ARCSINE_NODES
) -> float:
    """
    Occupation time Phi as an average of mgf_S(zeta + k x) over the arcsine
    law of x, computed with x = sin^2(t) and monitored by doubling the nodes.
    """

    def average(count: int) -> float:
        x, w = leggauss(count)
        t = 0.25 * math.pi * (x + 1.0)
        values = [dist.mgf_S(zeta + k * math.sin(angle) ** 2) for angle in t]
        return float(0.5 * np.dot(w, values))

    coarse, fine = average(nodes), average(2 * nodes)
    if math.isfinite(fine) and abs(fine - coarse) > 1e-8 * max(1.0, abs(fine)):
        raise ResetLdpNumericException(
            "Arcsine quadrature did not settle",
            {"zeta": zeta, "k": k, "nodes": nodes, "coarse": coarse, "fine": fine},
        )
    return fine


class PhiSolver:
    def __init__(
        self,
        fn: FunctionalModel,
        dist: WaitingTimeModel,
        tolerances: QuadratureTolerances = DEFAULT_TOLERANCES,
    ) -> None:
        self.fn = fn
        self.dist = dist
        self.mgf = JointMgf(fn, dist, tolerances)
        self.__cache: Dict[float, PhiValue] = {}

    def solve(self, k: float) -> PhiValue:
        cached = self.__cache.get(k)
        if cached is None:
            cached = self.__solve(k)
            self.__cache[k] = cached
        return cached

    def __solve(self, k: float) -> PhiValue:
        if k == 0:
            return PhiValue(k, 0.0, PhiRegime.INTERIOR_ROOT, 0.0)
        edge = self.mgf.zeta_edge(k)
        if edge == -math.inf:
            return PhiValue(k, -math.inf, PhiRegime.MINUS_INFINITY)

        def log_phi(zeta: float) -> float:
            return self.mgf.log_value(zeta, k)

        hi = self.__upper_bracket(k, edge, log_phi)
        if hi is None:
            return PhiValue(k, edge, PhiRegime.BOUNDARY_FORMULA)

        lo = min(hi - 1.0, -1.0)
        width = hi - lo
        for _ in range(MAX_BRACKET_STEPS):
            if log_phi(lo) < 0:
                break
            width *= 2.0
            lo = hi - width
        else:
            raise ResetLdpNumericException(
                "No lower bracket for phi", {"k": k, "lo": lo, "hi": hi}
            )

        root = optimize.brentq(
            log_phi, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps
        )
        residual = abs(self.mgf.value(root, k) - 1.0)
        if residual > 10 * PHI_RESIDUAL_TOL:
            raise ResetLdpNumericException(
                "Root of Phi does not satisfy Phi = 1",
                {"k": k, "zeta": root, "residual": residual, "bracket": (lo, hi)},
            )
        return PhiValue(k, float(root), PhiRegime.INTERIOR_ROOT, residual)

    def __upper_bracket(self, k: float, edge: float, log_phi) -> Optional[float]:
        """A zeta with Phi > 1 inside the domain, None if Phi <= 1 up to the edge."""
        if edge == math.inf:
            hi = 1.0
            for _ in range(MAX_BRACKET_STEPS):
                if log_phi(hi) > 0:
                    return hi
                hi = 2.0 * hi + 1.0
            raise ResetLdpNumericException("No upper bracket for phi", {"k": k})
        scale = max(1.0, abs(edge))
        for delta in BOUNDARY_DELTAS + (EDGE_STANDOFF,):
            candidate = edge - delta * scale
            if log_phi(candidate) > 0:
                return candidate
        LOGGER.debug(f"Phi <= 1 up to the edge {edge} at k={k}")
        return None

    def derivative(self, k: float) -> float:
        """
        phi'(k) in every regime: the tilted mean ratio at an interior root,
        the slope of the edge formula on a boundary.
        """
        value = self.solve(k)
        if value.regime == PhiRegime.MINUS_INFINITY:
            return math.nan
        if value.regime == PhiRegime.BOUNDARY_FORMULA:
            return self.mgf.edge_slope(k)
        mean_s = self.mgf.mean_s(value.value, k)
        if not math.isfinite(mean_s):
            return 0.0
        return -self.mgf.mean_x(value.value, k) / mean_s

    def prime(self, k: float) -> float:
        value = self.solve(k)
        if value.regime != PhiRegime.INTERIOR_ROOT:
            raise ResetLdpDomainException(
                f"phi is not analytic at k={k} ({value.regime.value})",
                "Use the slope limits of the regime report instead",
            )
        mean_s = self.mgf.mean_s(value.value, k)
        if not math.isfinite(mean_s):
            raise ResetLdpDomainException(
                f"k={k} is on the edge of the analytic region",
                "Use the slope limits of the regime report instead",
            )
        return -self.mgf.mean_x(value.value, k) / mean_s


def phi_solve(fn: FunctionalModel, dist: WaitingTimeModel, k: float) -> PhiValue:
    return PhiSolver(fn, dist).solve(k)


def phi_prime(fn: FunctionalModel, dist: WaitingTimeModel, k: float) -> float:
    return PhiSolver(fn, dist).prime(k)


def _occupation_report(solver: PhiSolver, report: RegimeReport) -> None:
    mgf, dist = solver.mgf, solver.dist
    report.slope_lo, report.slope_hi = 0.0, 1.0
    ell = dist.tail_rate_ell
    if not math.isfinite(ell):
        report.lambda_diag = report.xi_diag = math.inf
        report.classification = Classification.SMOOTH_EVERYWHERE
        return
    s = mgf.grid.nodes
    # E[exp(ell S) / sqrt(1 + S)] and E[sqrt(S) exp(ell S)]
    report.lambda_diag = mgf.expectation(ell, 0.0, -0.5 * np.log1p(s))
    report.xi_diag = mgf.expectation(ell, 0.0, 0.5 * mgf.log_s)
    if not math.isfinite(report.lambda_diag):
        report.classification = Classification.SMOOTH_EVERYWHERE
        return

    def log_phi(lam: float) -> float:
        value = mgf.expectation(ell, -lam)
        return math.log(value) if math.isfinite(value) else DIVERGENT_LOG

    hi = 1.0
    while log_phi(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise ResetLdpNumericException("No bracket for lambda", {"ell": ell})
    lam = float(optimize.brentq(log_phi, 0.0, hi, xtol=1e-14))
    report.lam = lam
    report.k_a, report.k_b = -lam, lam
    if math.isfinite(report.xi_diag):
        report.classification = Classification.AFFINE_STRETCHES
        report.w_minus = mgf.expectation(ell, -lam, derivative=True) / mgf.expectation(
            ell, -lam, mgf.log_s
        )
        report.w_plus = 1.0 - report.w_minus
    else:
        report.classification = Classification.KINK_AT_LAMBDA
        report.w_minus, report.w_plus = 0.0, 1.0
    report.slope_lo, report.slope_hi = report.w_minus, report.w_plus


def _edge_quantities(
    solver: PhiSolver, k_edge: float, report: RegimeReport
) -> Tuple[float, float]:
    """xi, Lambda, Xi at the k-edge; returns (E[X e], E[S e])."""
    mgf = solver.mgf
    xi = solver.solve(k_edge).value
    report.xi = xi
    if not math.isfinite(xi):
        return math.nan, math.nan
    report.lambda_diag = mgf.expectation(xi, k_edge)
    report.xi_diag = mgf.expectation(xi, k_edge, 3.0 * mgf.log_s)
    return (
        mgf.expectation(xi, k_edge, derivative=True),
        mgf.expectation(xi, k_edge, mgf.log_s),
    )


def _edge_stretch(report: RegimeReport, mean_s: float) -> bool:
    """A finite xi with Lambda = 1 and Xi < inf pins phi' at the k-edge."""
    return (
        math.isfinite(report.xi)
        and abs(report.lambda_diag - 1.0) <= LAMBDA_TOL
        and math.isfinite(report.xi_diag)
        and math.isfinite(mean_s)
        and mean_s > 0
    )


def _area_report(solver: PhiSolver, report: RegimeReport) -> None:
    r = solver.dist.tail_rate_cubic
    if r == 0:
        report.classification = Classification.FLAT_ZERO
        report.k_lo = report.k_hi = report.k_a = report.k_b = 0.0
        report.slope_lo = report.slope_hi = 0.0
        return
    report.classification = Classification.SMOOTH_EVERYWHERE
    report.w_plus, report.w_minus = math.inf, -math.inf
    if math.isfinite(r):
        k_edge = math.sqrt(6.0 * r)
        report.k_lo, report.k_hi = -k_edge, k_edge
        report.k_a, report.k_b = -k_edge, k_edge
        mean_x, mean_s = _edge_quantities(solver, k_edge, report)
        if _edge_stretch(report, mean_s):
            report.classification = Classification.AFFINE_STRETCHES
            report.w_plus = mean_x / mean_s
            report.w_minus = -report.w_plus
    report.slope_lo, report.slope_hi = report.w_minus, report.w_plus


def _abs_area_report(solver: PhiSolver, report: RegimeReport) -> None:
    r = solver.dist.tail_rate_cubic
    report.slope_lo = 0.0
    if r == 0:
        report.classification = Classification.FLAT_ABOVE_MEAN
        report.k_hi = report.k_b = 0.0
        report.w_plus = report.slope_hi = report.mu
    else:
        report.classification = Classification.SMOOTH_EVERYWHERE
        report.w_plus = report.slope_hi = math.inf
        if math.isfinite(r):
            k_edge = math.sqrt(6.0 * r)
            report.k_hi = report.k_b = k_edge
            mean_x, mean_s = _edge_quantities(solver, k_edge, report)
            if _edge_stretch(report, mean_s):
                report.classification = Classification.ONE_SIDED_STRETCH
                report.w_plus = report.slope_hi = mean_x / mean_s

    ell = solver.dist.tail_rate_ell
    if math.isfinite(ell) and math.isfinite(solver.dist.mgf_S(ell)):
        # Phi <= 1 on the zeta edge at some k < 0 is not covered by the theory
        for k in -np.geomspace(1e-2, 1e2, 25):
            if solver.solve(float(k)).regime == PhiRegime.BOUNDARY_FORMULA:
                message = f"Phi <= 1 on the zeta edge at k={k:.4g}, no classification"
                LOGGER.warning(message)
                report.warnings.append(message)
                report.classification = None
                break


def diagnose(
    fn: FunctionalModel,
    dist: WaitingTimeModel,
    tolerances: QuadratureTolerances = DEFAULT_TOLERANCES,
) -> RegimeReport:
    solver = PhiSolver(fn, dist, tolerances)
    return diagnose_with(solver)


def diagnose_with(solver: PhiSolver) -> RegimeReport:
    fn, dist = solver.fn, solver.dist
    report = RegimeReport(
        functional=fn.name,
        dist=dist.spec,
        ell=dist.tail_rate_ell,
        r_cubic=dist.tail_rate_cubic,
        mu=fn.typical_stats(dist).mu,
    )
    if fn.kind == FunctionalKind.OCCUPATION:
        _occupation_report(solver, report)
    elif fn.kind == FunctionalKind.AREA:
        _area_report(solver, report)
    else:
        _abs_area_report(solver, report)

    report.steep = not report.has_stretch and (
        report.classification != Classification.FLAT_ZERO
    )
    if (
        math.isfinite(report.lambda_diag)
        and fn.kind != FunctionalKind.OCCUPATION
        and report.lambda_diag > 1.0 + 1e-8
    ):
        report.warnings.append(f"Lambda = {report.lambda_diag} exceeds 1")
    if (
        math.isfinite(report.w_minus)
        and math.isfinite(report.w_plus)
        and not report.w_minus < report.mu < report.w_plus
        and report.classification != Classification.FLAT_ZERO
    ):
        message = f"Singular points {report.w_minus}, {report.w_plus} do not enclose mu"
        LOGGER.warning(message, extra={"details": str(report.to_dict())})
        report.warnings.append(message)
    LOGGER.info(
        f"{fn.name} with {dist.spec}: "
        f"{report.classification.value if report.classification else 'unclassified'}"
    )
    return report


@dataclass(frozen=True)
class VarpiRow:
    k: float
    varpi: float
    phi: float
    ok: bool
    boundary: bool = False


def varpi_check(
    fn: FunctionalModel,
    dist: WaitingTimeModel,
    k_grid: Sequence[float],
    tolerance: float = 1e-8,
    solver: Optional[PhiSolver] = None,
) -> List[VarpiRow]:
    """
    varpi(k) >= phi(k) on the grid. A boundary varpi without a known
    exponent is reported as nan and not counted as a violation.
    """
    solver = solver or PhiSolver(fn, dist)
    rows = []
    for k in k_grid:
        varpi = fn.varpi(dist, float(k))
        phi = solver.solve(float(k)).value
        if math.isnan(varpi.value) or phi == -math.inf:
            ok = True
        else:
            ok = varpi.value >= phi - tolerance * max(1.0, abs(phi))
        if not ok:
            LOGGER.warning(f"varpi({k}) = {varpi.value} is below phi = {phi}")
        rows.append(VarpiRow(float(k), varpi.value, phi, ok, varpi.boundary))
    return rows
