"""
Integrals over [0, inf) of positive integrands given in log form.

The half line is cut into dyadic segments around a time scale. Each segment
is integrated separately, which makes the decay of the integrand visible:
segment contributions that stop shrinking mark a divergent integral, and a
geometric decay is summed analytically past the last segment.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from ..definitions.constants import (
    DIVERGENCE_THRESHOLD,
    GL_ORDER,
    LOWER_SEGMENTS,
    NON_DECAY_RATIO,
    QUAD_ABS_TOL,
    QUAD_REL_TOL,
    UPPER_SEGMENTS,
)
from ..tools.exceptions import ResetLdpNumericException, ResetLdpUsageException
from ..tools.resources import plugin_name

LOGGER = logging.getLogger(plugin_name())

LogIntegrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureTolerances:
    abs_tol: float = QUAD_ABS_TOL
    rel_tol: float = QUAD_REL_TOL
    divergence: float = DIVERGENCE_THRESHOLD
    non_decay_ratio: float = NON_DECAY_RATIO
    order: int = GL_ORDER
    lower_segments: int = LOWER_SEGMENTS
    upper_segments: int = UPPER_SEGMENTS

    def check_if_opts_set(self) -> bool:
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            return False
        if not 0 < self.non_decay_ratio < 1:
            return False
        if self.order < 4 or self.lower_segments < 1:
            return False
        return self.upper_segments >= 8

    def validated(self) -> "QuadratureTolerances":
        if not self.check_if_opts_set():
            raise ResetLdpUsageException("tolerances", f"invalid values {self}")
        return self


DEFAULT_TOLERANCES = QuadratureTolerances()


def segment_edges(scale: float, tolerances: QuadratureTolerances) -> np.ndarray:
    """Edges s_min * 2^j; the piece [0, s_min] is handled separately."""
    s_min = scale * 2.0 ** (-tolerances.lower_segments)
    count = tolerances.lower_segments + tolerances.upper_segments
    return s_min * 2.0 ** np.arange(count + 1)


def sum_with_tail(parts: np.ndarray, tolerances: QuadratureTolerances) -> float:
    """
    Sum per-segment contributions, deciding finiteness from the last ones.

    Returns inf when the contributions stop decaying.
    """
    total = float(parts.sum())
    if total == 0.0:
        return 0.0
    if not math.isfinite(total):
        return math.inf
    nonzero = parts[parts > 0]
    last = float(nonzero[-1])
    if last <= tolerances.rel_tol * total or len(nonzero) < 2:
        return total
    ratio = last / float(nonzero[-2])
    if ratio >= tolerances.non_decay_ratio:
        return math.inf
    return total + last * ratio / (1.0 - ratio)


def _finalize(
    scaled: float, log_shift: float, tolerances: QuadratureTolerances
) -> float:
    if scaled == 0.0:
        return 0.0
    if not math.isfinite(scaled):
        return math.inf
    log_value = math.log(scaled) + log_shift
    if log_value > math.log(tolerances.divergence):
        return math.inf
    return math.exp(log_value)


class DyadicGrid:
    """Gauss-Legendre nodes on the dyadic segments of one time scale."""

    def __init__(
        self, scale: float, tolerances: QuadratureTolerances = DEFAULT_TOLERANCES
    ) -> None:
        self.scale = scale
        self.tolerances = tolerances
        x, w = leggauss(tolerances.order)
        unit_x = 0.5 * (x + 1.0)
        unit_w = 0.5 * w
        edges = segment_edges(scale, tolerances)

        # s = s_min * v^2 on the first piece removes s^(-1/2) endpoint singularities
        s_min = edges[0]
        first_nodes = s_min * unit_x**2
        first_weights = unit_w * 2.0 * s_min * unit_x

        lefts = edges[:-1, None]
        widths = np.diff(edges)[:, None]
        nodes = lefts + widths * unit_x[None, :]
        weights = widths * unit_w[None, :]

        self.n_segments = len(edges)
        self.nodes = np.concatenate([first_nodes, nodes.ravel()])
        self.weights = np.concatenate([first_weights, weights.ravel()])
        self.segment_of_node = np.concatenate(
            [
                np.zeros(tolerances.order, dtype=int),
                np.repeat(np.arange(1, self.n_segments), tolerances.order),
            ]
        )
        with np.errstate(divide="ignore"):
            self.log_nodes = np.log(self.nodes)

    def integrate_log(self, log_values: np.ndarray) -> float:
        """Integral of exp(log_values) sampled at the grid nodes."""
        log_values = np.asarray(log_values, dtype=float)
        if np.isnan(log_values).any():
            raise ResetLdpNumericException(
                "NaN in quadrature integrand", {"scale": self.scale}
            )
        if np.isposinf(log_values).any():
            return math.inf
        shift = float(log_values.max())
        if shift == -math.inf:
            return 0.0
        scaled = self.weights * np.exp(log_values - shift)
        parts = np.bincount(
            self.segment_of_node, weights=scaled, minlength=self.n_segments
        )
        total = sum_with_tail(parts, self.tolerances)
        return _finalize(total, shift, self.tolerances)


@lru_cache(maxsize=64)
def dyadic_grid(
    scale: float, tolerances: QuadratureTolerances = DEFAULT_TOLERANCES
) -> DyadicGrid:
    return DyadicGrid(scale, tolerances)


def integrate_log_adaptive(
    log_integrand: LogIntegrand,
    scale: float,
    tolerances: QuadratureTolerances = DEFAULT_TOLERANCES,
    points: Sequence[float] = (),
) -> float:
    """
    Same segmentation as DyadicGrid, with adaptive Gauss-Kronrod on every segment.

    Slower but error controlled; used for one-off moments and MGFs.
    """
    edges = segment_edges(scale, tolerances)
    bounds: Tuple[Tuple[float, float], ...] = ((0.0, float(edges[0])),) + tuple(
        (float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])
    )
    # a common shift keeps exp() in range, taken from a coarse scan
    scan = np.concatenate([np.geomspace(edges[0], edges[-1], 512), list(points)])
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        scan_values = log_integrand(scan)
    if np.isposinf(scan_values).any():
        return math.inf
    finite = scan_values[np.isfinite(scan_values)]
    shift = float(finite.max()) if finite.size else 0.0

    def scaled(s: float) -> float:
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            log_value = float(log_integrand(np.asarray([s]))[0])
            value = float(np.exp(log_value - shift))
        if math.isnan(value) or value == math.inf:
            raise ResetLdpNumericException(
                "Quadrature integrand is not finite",
                {"s": s, "log_value": log_value, "log_shift": shift},
            )
        return value

    parts = np.zeros(len(bounds))
    for idx, (a, b) in enumerate(bounds):
        value, error = integrate.quad(
            scaled, a, b, epsabs=1e-14, epsrel=tolerances.rel_tol, limit=200
        )
        if not math.isfinite(value):
            return math.inf
        if error > max(tolerances.abs_tol, 1e-6 * abs(value)):
            raise ResetLdpNumericException(
                "Adaptive quadrature did not converge",
                {
                    "segment": (a, b),
                    "value": value,
                    "error": error,
                    "log_shift": shift,
                },
            )
        parts[idx] = value
    return _finalize(sum_with_tail(parts, tolerances), shift, tolerances)
