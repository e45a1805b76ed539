"""Options of one command line run."""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..core.quadrature import QuadratureTolerances
from ..definitions.constants import (
    PATH_STEP,
    QUAD_ABS_TOL,
    QUAD_REL_TOL,
    Command,
    OutputFormat,
)
from ..tools.exceptions import ResetLdpUsageException


def parse_grid(field_name: str, text: str) -> np.ndarray:
    """``lo:hi:n`` as n evenly spaced points, or a comma separated list."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            count = int(n)
            if count < 1:
                raise ValueError("at least one point is needed")
            return np.linspace(float(lo), float(hi), count)
        return np.array([float(value) for value in text.split(",")])
    except ValueError as e:
        raise ResetLdpUsageException(field_name, f"cannot parse grid '{text}': {e}")


def parse_bins(text: str) -> np.ndarray:
    """``lo:hi:n`` as the edges of n equal bins."""
    try:
        lo, hi, n = text.split(":")
        count = int(n)
        low, high = float(lo), float(hi)
    except ValueError:
        raise ResetLdpUsageException("bins", f"expected lo:hi:n, got '{text}'")
    if count < 1 or high <= low:
        raise ResetLdpUsageException("bins", f"empty bin range '{text}'")
    return np.linspace(low, high, count + 1)


@dataclass
class RunConfig:
    command: Command
    functional: Optional[str] = None
    dist: Optional[str] = None
    k_grid: Optional[List[float]] = None
    w_grid: Optional[List[float]] = None
    bins: Optional[List[float]] = None
    t: Optional[float] = None
    n: Optional[int] = None
    seed: int = 0
    workers: Optional[int] = None
    count: Optional[int] = None
    paths: Optional[int] = None
    step_exponent: Optional[int] = None
    path_step: float = PATH_STEP
    r_list: List[float] = field(default_factory=lambda: [0.25, 1.0, 4.0])
    checks: Optional[List[str]] = None
    quick: bool = False
    trajectories: Optional[str] = None
    cache: Optional[str] = None
    log_level: Optional[str] = None
    log_file: Optional[str] = None
    tol_abs: float = QUAD_ABS_TOL
    tol_rel: float = QUAD_REL_TOL
    output_format: OutputFormat = OutputFormat.CSV
    output: Optional[str] = None

    def validate(self) -> None:
        """Raises a usage error naming the first offending field."""
        if self.t is not None and self.t <= 0:
            raise ResetLdpUsageException("t", f"horizon must be positive: {self.t}")
        if self.n is not None and self.n < 2:
            raise ResetLdpUsageException("n", f"at least two trajectories: {self.n}")
        if self.seed < 0:
            raise ResetLdpUsageException("seed", f"must be non-negative: {self.seed}")
        for name in ("workers", "count", "paths", "step_exponent"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ResetLdpUsageException(name, f"at least one: {value}")
        if self.path_step <= 0:
            raise ResetLdpUsageException(
                "path_step", f"must be positive: {self.path_step}"
            )
        if any(r <= 0 for r in self.r_list):
            raise ResetLdpUsageException("r_list", f"must be positive: {self.r_list}")
        if self.w_grid is not None and np.any(np.diff(self.w_grid) < 0):
            raise ResetLdpUsageException("w_grid", "the grid must be sorted")
        self.tolerances()

    def check_if_opts_set(self) -> bool:
        try:
            self.validate()
        except ResetLdpUsageException:
            return False
        return True

    def tolerances(self) -> QuadratureTolerances:
        tolerances = QuadratureTolerances(abs_tol=self.tol_abs, rel_tol=self.tol_rel)
        if not tolerances.check_if_opts_set():
            raise ResetLdpUsageException(
                "tol", f"tolerances must be positive: {self.tol_abs}, {self.tol_rel}"
            )
        return tolerances

    def to_dict(self) -> Dict[str, Any]:
        """Embedded in every output header, without the logging and output options."""
        result = asdict(self)
        for key in ("log_level", "log_file", "output"):
            result.pop(key)
        return result
