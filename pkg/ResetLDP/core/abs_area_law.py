"""Tabulated law of the absolute area A of a unit Brownian path."""
import logging
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import logsumexp

from ..definitions.constants import (
    MAX_TABULATED_TILT,
    MEAN_ABS_AREA,
    MIN_EFFECTIVE_QUANTILES,
    QUANTILE_COUNT,
    SECOND_MOMENT_ABS_AREA,
    TABLE_MAGIC,
    TABLE_PATHS,
    TABLE_STEP_EXPONENT,
    TABLE_VERSION,
)
from ..tools.exceptions import (
    ResetLdpNumericException,
    ResetLdpOracleRequiredException,
    ResetLdpUsageException,
)
from ..tools.resources import plugin_name
from ..tools.settings import get_setting
from .brownian import chunk_rng, unit_abs_area

LOGGER = logging.getLogger(plugin_name())
TASK_LOGGER = logging.getLogger(f"{plugin_name()}_task")

HEADER = struct.Struct("<4sIII")
SPLINE_NODES = 257

ArrayLike = Union[float, np.ndarray]


def default_cache_path() -> str:
    default = Path.home() / ".cache" / plugin_name() / "abs_area_quantiles.bin"
    return str(get_setting("cache", str(default)))


@dataclass
class AbsAreaLawOpts:
    paths: int = TABLE_PATHS
    count: int = QUANTILE_COUNT
    step_exponent: int = TABLE_STEP_EXPONENT
    seed: int = 0
    chunk_size: int = 100_000
    workers: Optional[int] = None

    def check_if_opts_set(self) -> bool:
        if self.paths < self.count or self.count < 2:
            return False
        if not 1 <= self.step_exponent <= 16:
            return False
        return self.chunk_size > 0 and (self.workers is None or self.workers > 0)


class AbsAreaLaw:
    """
    Quantile table of A taken at the midpoints (q + 1/2) / count.

    Tilted expectations E[exp(theta A)] are midpoint averages over the table.
    They are trusted while enough quantiles carry the tilted weight; beyond
    that tilt the ratio E[exp(theta A)] / exp(theta^2 / 6), which lies between
    1 and a finite constant, is held at its last reliable value.
    """

    def __init__(self, quantiles: np.ndarray, step_exponent: int) -> None:
        quantiles = np.sort(np.asarray(quantiles, dtype=float))
        if quantiles.ndim != 1 or quantiles.size < 2 or np.any(quantiles < 0):
            raise ResetLdpNumericException(
                "Absolute area quantiles must be a non-negative vector",
                {"shape": quantiles.shape},
            )
        self.quantiles = quantiles
        self.step_exponent = step_exponent
        self.count = quantiles.size
        self.reliable_tilt = self.__find_reliable_tilt()
        grid = np.linspace(0.0, self.reliable_tilt, SPLINE_NODES)
        self.__spline = CubicSpline(grid, self.__empirical_log_ratio(grid))
        self.__derivative = self.__spline.derivative()
        self.sandwich_constant = float(np.exp(self.__spline(grid).max()))

    @classmethod
    def from_samples(
        cls, samples: np.ndarray, count: int = QUANTILE_COUNT, step_exponent: int = 0
    ) -> "AbsAreaLaw":
        levels = (np.arange(count) + 0.5) / count
        return cls(np.quantile(samples, levels), step_exponent)

    @classmethod
    def build(cls, opts: AbsAreaLawOpts) -> "AbsAreaLaw":
        if not opts.check_if_opts_set():
            raise ResetLdpUsageException("abs-area-table", f"invalid options {opts}")
        starts = list(range(0, opts.paths, opts.chunk_size))
        n_chunks = len(starts)

        def run_chunk(idx: int) -> np.ndarray:
            size = min(opts.chunk_size, opts.paths - starts[idx])
            samples = unit_abs_area(chunk_rng(opts.seed, idx), size, opts.step_exponent)
            TASK_LOGGER.debug(f"{idx + 1} out of {n_chunks} chunks")
            return samples

        LOGGER.info(
            f"Simulating {opts.paths} paths with 2^{opts.step_exponent} steps"
            f" in {n_chunks} chunks"
        )
        with ThreadPoolExecutor(max_workers=opts.workers) as executor:
            samples = np.concatenate(list(executor.map(run_chunk, range(n_chunks))))
        law = cls.from_samples(samples, opts.count, opts.step_exponent)
        LOGGER.info(
            f"Absolute area law: mean {law.mean:.6f} (exact {MEAN_ABS_AREA:.6f}),"
            f" second moment {law.second_moment:.6f} (exact {SECOND_MOMENT_ABS_AREA})"
        )
        return law

    def save(self, path: str) -> None:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        header = HEADER.pack(TABLE_MAGIC, TABLE_VERSION, self.count, self.step_exponent)
        with open(path, "wb") as f:
            f.write(header)
            f.write(self.quantiles.astype("<f8").tobytes())
        LOGGER.info(f"Absolute area table written to {path}")

    @classmethod
    def load(cls, path: str) -> "AbsAreaLaw":
        with open(path, "rb") as f:
            payload = f.read()
        if len(payload) < HEADER.size:
            raise ResetLdpOracleRequiredException(f"Truncated table file {path}")
        magic, version, count, step_exponent = HEADER.unpack_from(payload)
        if magic != TABLE_MAGIC or version != TABLE_VERSION:
            raise ResetLdpOracleRequiredException(
                f"Not an absolute area table: {path}",
                f"magic {magic!r}, version {version}",
            )
        values = np.frombuffer(payload, dtype="<f8", offset=HEADER.size)
        if values.size != count:
            raise ResetLdpOracleRequiredException(
                f"Table {path} holds {values.size} values, header says {count}"
            )
        return cls(values.astype(float), step_exponent)

    @property
    def mean(self) -> float:
        return float(self.quantiles.mean())

    @property
    def second_moment(self) -> float:
        return float(np.mean(self.quantiles**2))

    @property
    def mc_stderr(self) -> float:
        """Standard error of a table average, counting each quantile once."""
        return float(self.quantiles.std(ddof=1) / math.sqrt(self.count))

    def laplace(self, theta: ArrayLike) -> ArrayLike:
        """E[exp(-theta A)]."""
        values = np.atleast_1d(np.asarray(theta, dtype=float))
        result = np.exp(-np.outer(values, self.quantiles)).mean(axis=1)
        return float(result[0]) if np.ndim(theta) == 0 else result

    def laplace_stderr(self, theta: float) -> float:
        weights = np.exp(-theta * self.quantiles)
        return float(weights.std(ddof=1) / math.sqrt(self.count))

    def effective_quantiles(self, theta: float) -> float:
        """(sum w)^2 / sum w^2 for the tilted weights w = exp(theta a)."""
        log_w = theta * self.quantiles
        return float(np.exp(2.0 * logsumexp(log_w) - logsumexp(2.0 * log_w)))

    def __find_reliable_tilt(self) -> float:
        tilts = np.linspace(0.0, MAX_TABULATED_TILT, 1201)
        reliable = [
            t for t in tilts if self.effective_quantiles(t) >= MIN_EFFECTIVE_QUANTILES
        ]
        tilt = float(max(reliable)) if reliable else 0.0
        if tilt <= 0.0:
            raise ResetLdpNumericException(
                "Absolute area table too small for any tilt", {"count": self.count}
            )
        return tilt

    def __empirical_log_ratio(self, theta: np.ndarray) -> np.ndarray:
        log_mgf = logsumexp(np.outer(theta, self.quantiles), axis=1) - math.log(
            self.count
        )
        return np.maximum(log_mgf - theta**2 / 6.0, 0.0)

    def log_ratio(self, theta: ArrayLike) -> ArrayLike:
        """log(E[exp(theta A)] exp(-theta^2 / 6)) for theta >= 0."""
        values = np.clip(np.asarray(theta, dtype=float), 0.0, self.reliable_tilt)
        result = np.maximum(self.__spline(values), 0.0)
        return float(result) if np.ndim(theta) == 0 else result

    def dlog_ratio(self, theta: ArrayLike) -> ArrayLike:
        values = np.asarray(theta, dtype=float)
        inside = (values >= 0) & (values < self.reliable_tilt)
        result = np.where(inside, self.__derivative(np.clip(values, 0, None)), 0.0)
        return float(result) if np.ndim(theta) == 0 else result

    def log_mgf(self, theta: ArrayLike) -> ArrayLike:
        """log E[exp(theta A)], inside the sandwich [theta^2/6, theta^2/6 + log L]."""
        values = np.asarray(theta, dtype=float)
        result = values**2 / 6.0 + np.asarray(self.log_ratio(values))
        return float(result) if np.ndim(theta) == 0 else result


@lru_cache(maxsize=4)
def _load_cached(path: str, mtime: float) -> AbsAreaLaw:
    LOGGER.debug(f"Loading absolute area table from {path}")
    return AbsAreaLaw.load(path)


def load_default_law(path: Optional[str] = None) -> AbsAreaLaw:
    """Law from the cache file; raises when no table has been built yet."""
    path = path or default_cache_path()
    if not os.path.isfile(path):
        raise ResetLdpOracleRequiredException(
            "Absolute area law is not tabulated",
            f"No table at {path}, run the abs-area-table command first",
        )
    return _load_cached(path, os.path.getmtime(path))
