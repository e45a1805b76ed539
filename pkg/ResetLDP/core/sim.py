"""Monte Carlo simulation of the reset process and of the functional F_t."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from ..definitions.constants import (
    BOOTSTRAP_RESAMPLES,
    CHUNK_SIZE,
    DEFAULT_HORIZON,
    DEFAULT_SAMPLES,
    MAX_CGF_EXPONENT,
    MIN_EFFECTIVE_SAMPLES,
    MIN_SUMMARY_SAMPLES,
    PATH_STEP,
)
from ..tools.exceptions import ResetLdpDomainException, ResetLdpUsageException
from ..tools.resources import plugin_name
from .brownian import chunk_rng
from .dist import WaitingTimeModel
from .functionals import AbsArea, FunctionalModel

MAIN_LOGGER = logging.getLogger(plugin_name())
TASK_LOGGER = logging.getLogger(f"{plugin_name()}_task")

# stream index of the bootstrap resampler, disjoint from the chunk streams
BOOTSTRAP_STREAM = 2**31


@dataclass
class SimulationOpts:
    t: float = DEFAULT_HORIZON
    n: int = DEFAULT_SAMPLES
    seed: int = 0
    chunk_size: int = CHUNK_SIZE
    workers: Optional[int] = None
    path_step: float = PATH_STEP

    def check_if_opts_set(self) -> bool:
        if self.t < 0 or self.n < 1 or self.chunk_size < 1:
            return False
        if self.workers is not None and self.workers < 1:
            return False
        return self.path_step > 0


@dataclass(frozen=True)
class TrajectoryOutcome:
    F: float
    W: float
    N: int
    backlog: float


@dataclass
class TrajectoryBatch:
    F: np.ndarray
    W: np.ndarray
    N: np.ndarray
    backlog: np.ndarray

    def __len__(self) -> int:
        return int(self.F.size)

    def outcome(self, idx: int) -> TrajectoryOutcome:
        return TrajectoryOutcome(
            float(self.F[idx]),
            float(self.W[idx]),
            int(self.N[idx]),
            float(self.backlog[idx]),
        )

    @classmethod
    def concatenate(cls, batches: Sequence["TrajectoryBatch"]) -> "TrajectoryBatch":
        return cls(
            F=np.concatenate([b.F for b in batches]),
            W=np.concatenate([b.W for b in batches]),
            N=np.concatenate([b.N for b in batches]),
            backlog=np.concatenate([b.backlog for b in batches]),
        )


def simulate_batch(
    fn: FunctionalModel,
    dist: WaitingTimeModel,
    t: float,
    size: int,
    rng: np.random.Generator,
) -> TrajectoryBatch:
    """
    Waiting times are drawn until every row passes t. Completed intervals
    earn a fresh reward each; the running interval earns a fresh reward over
    its age t - T_N, independent of everything else.
    """
    if t < 0:
        raise ResetLdpDomainException(f"Horizon must be non-negative: {t}")
    columns = 16
    waits = np.asarray(dist.sample(rng, (size, columns)))
    renewals = np.cumsum(waits, axis=1)
    while size and renewals[:, -1].min() <= t:
        extra = np.asarray(dist.sample(rng, (size, columns)))
        waits = np.concatenate([waits, extra], axis=1)
        renewals = np.concatenate(
            [renewals, renewals[:, -1:] + np.cumsum(extra, axis=1)], axis=1
        )
        columns *= 2

    completed = renewals <= t
    counts = completed.sum(axis=1)
    rows = np.nonzero(completed)[0]
    rewards = fn.sample_rewards(waits[completed], rng)
    cumulative = np.bincount(rows, weights=rewards, minlength=size).astype(float)

    last = np.where(
        counts > 0, renewals[np.arange(size), np.maximum(counts - 1, 0)], 0.0
    )
    backlog = fn.sample_rewards(t - last, rng)
    return TrajectoryBatch(
        F=cumulative + backlog, W=cumulative, N=counts.astype(np.int64), backlog=backlog
    )


def simulate_trajectory(
    fn: FunctionalModel, dist: WaitingTimeModel, t: float, rng: np.random.Generator
) -> TrajectoryOutcome:
    return simulate_batch(fn, dist, t, 1, rng).outcome(0)


class Simulator:
    """
    Chunked simulation over a thread pool. Chunk i always uses the stream
    derived from (seed, i) and results are merged in chunk order.
    """

    def __init__(
        self, fn: FunctionalModel, dist: WaitingTimeModel, opts: SimulationOpts
    ) -> None:
        if not opts.check_if_opts_set():
            raise ResetLdpUsageException("simulation", f"invalid options {opts}")
        self.fn = fn
        if isinstance(fn, AbsArea) and fn.path_step != opts.path_step:
            self.fn = AbsArea(law=fn.law, path_step=opts.path_step)
        self.dist = dist
        self.opts = opts
        self.error: Optional[Exception] = None
        self.batch: Optional[TrajectoryBatch] = None
        self.name = f"{fn.name} with {dist.spec}, t={opts.t}, n={opts.n}"

    def run(self) -> bool:
        try:
            self.batch = self.__simulate()
        except Exception as e:
            TASK_LOGGER.error(f"Simulation failed, aborting run: {repr(e)}")
            self.error = e
            return False
        TASK_LOGGER.info(f"Total of {len(self.batch)} trajectories simulated.")
        return bool(len(self.batch))

    def finished(self, result: bool) -> TrajectoryBatch:
        if not result or self.batch is None:
            MAIN_LOGGER.error(
                f"Simulation {self.name} failed",
                extra={"details": repr(self.error)},
            )
            if self.error:
                raise self.error
            raise ResetLdpUsageException("n", "no trajectories requested")
        return self.batch

    def __simulate(self) -> TrajectoryBatch:
        opts = self.opts
        starts = list(range(0, opts.n, opts.chunk_size))
        n_chunks = len(starts)

        def run_chunk(idx: int) -> TrajectoryBatch:
            size = min(opts.chunk_size, opts.n - starts[idx])
            batch = simulate_batch(
                self.fn, self.dist, opts.t, size, chunk_rng(opts.seed, idx)
            )
            TASK_LOGGER.debug(f"{idx + 1} out of {n_chunks} chunks")
            return batch

        MAIN_LOGGER.info(f"Simulating {self.name} in {n_chunks} chunks")
        with ThreadPoolExecutor(max_workers=opts.workers) as executor:
            batches = list(executor.map(run_chunk, range(n_chunks)))
        return TrajectoryBatch.concatenate(batches)


def simulate(
    fn: FunctionalModel, dist: WaitingTimeModel, opts: SimulationOpts
) -> TrajectoryBatch:
    simulator = Simulator(fn, dist, opts)
    return simulator.finished(simulator.run())


@dataclass
class CgfPoint:
    k: float
    g_hat: float
    ci_lo: float
    ci_hi: float
    ess: float
    reliable: bool


@dataclass
class SimulationSummary:
    n_samples: int
    t_horizon: float
    mu: float
    v: float
    mean_F_over_t: float
    mean_stderr: float
    var_scaled: float
    var_stderr: float
    skew: float
    skew_stderr: float
    kurtosis: float
    kurtosis_stderr: float
    renewal_rate: float
    renewal_stderr: float
    expected_renewal_rate: float
    cgf_grid: List[CgfPoint] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def cgf_estimates(
    values: np.ndarray, t: float, k_grid: Sequence[float], seed: int
) -> List[CgfPoint]:
    """(1/t) log mean exp(k F) with a percentile bootstrap on shared resamples."""
    ks = np.asarray([float(k) for k in k_grid])
    if ks.size == 0:
        return []
    n = values.size
    log_n = math.log(n)
    exponents = np.outer(ks, values)
    log_sum = logsumexp(exponents, axis=1)
    g_hat = (log_sum - log_n) / t
    ess = np.exp(2.0 * log_sum - logsumexp(2.0 * exponents, axis=1))

    rng = chunk_rng(seed, BOOTSTRAP_STREAM)
    resampled = np.empty((BOOTSTRAP_RESAMPLES, ks.size))
    for b in range(BOOTSTRAP_RESAMPLES):
        idx = rng.integers(0, n, size=n)
        resampled[b] = (logsumexp(np.outer(ks, values[idx]), axis=1) - log_n) / t
    ci_lo, ci_hi = np.percentile(resampled, [2.5, 97.5], axis=0)

    extent = float(np.abs(values).max()) if n else 0.0
    points = []
    for i, k in enumerate(ks):
        if k == 0:
            points.append(CgfPoint(0.0, 0.0, 0.0, 0.0, float(n), True))
            continue
        reliable = bool(
            ess[i] >= MIN_EFFECTIVE_SAMPLES and abs(k) * extent < MAX_CGF_EXPONENT
        )
        if not reliable:
            MAIN_LOGGER.debug(f"CGF estimate at k={k} unreliable, ess={ess[i]:.1f}")
        points.append(
            CgfPoint(
                float(k),
                float(g_hat[i]),
                float(ci_lo[i]),
                float(ci_hi[i]),
                float(ess[i]),
                reliable,
            )
        )
    return points


def summarize(
    fn: FunctionalModel,
    dist: WaitingTimeModel,
    batch: TrajectoryBatch,
    opts: SimulationOpts,
    k_grid: Sequence[float] = (),
) -> SimulationSummary:
    n, t = len(batch), opts.t
    if t <= 0:
        raise ResetLdpDomainException(f"summaries need a positive horizon, got t={t}")
    if n < MIN_SUMMARY_SAMPLES:
        raise ResetLdpDomainException(
            f"summaries need at least {MIN_SUMMARY_SAMPLES} trajectories, got {n}"
        )
    typical = fn.typical_stats(dist)
    ratio = batch.F / t
    scaled = (batch.F - typical.mu * t) / math.sqrt(t)
    var_scaled = float(scaled.var(ddof=1))
    fourth = float(np.mean((scaled - scaled.mean()) ** 4))
    standardized = scaled / math.sqrt(typical.v) if typical.v > 0 else scaled
    renewal = batch.N / t
    return SimulationSummary(
        n_samples=n,
        t_horizon=t,
        mu=typical.mu,
        v=typical.v,
        mean_F_over_t=float(ratio.mean()),
        mean_stderr=float(ratio.std(ddof=1) / math.sqrt(n)),
        var_scaled=var_scaled,
        var_stderr=math.sqrt(max(fourth - var_scaled**2, 0.0) / n),
        skew=float(stats.skew(standardized)),
        skew_stderr=math.sqrt(6.0 / n),
        kurtosis=float(stats.kurtosis(standardized)),
        kurtosis_stderr=math.sqrt(24.0 / n),
        renewal_rate=float(renewal.mean()),
        renewal_stderr=float(renewal.std(ddof=1) / math.sqrt(n)),
        expected_renewal_rate=1.0 / dist.moment(1.0),
        cgf_grid=cgf_estimates(batch.F, t, k_grid, opts.seed),
    )


def run_summary(
    fn: FunctionalModel,
    dist: WaitingTimeModel,
    opts: SimulationOpts,
    k_grid: Sequence[float] = (),
) -> SimulationSummary:
    return summarize(fn, dist, simulate(fn, dist, opts), opts, k_grid)


@dataclass
class EmpiricalRateBin:
    w_lo: float
    w_hi: float
    count: int
    p_hat: float
    I_hat: float
    I_lo: float
    I_hi: float
    bound: bool


def empirical_rate_from(
    values: np.ndarray, t: float, bins: Sequence[float], confidence: float = 0.95
) -> List[EmpiricalRateBin]:
    """
    -(1/t) log P[F_t / t in bin] with Wilson intervals. A finite-t estimate:
    it sits below the asymptotic rate near the mean and degrades in the tails.
    Empty bins only give a lower bound, from the upper end of the interval.
    """
    if t <= 0:
        raise ResetLdpDomainException(f"empirical rates need t > 0, got t={t}")
    edges = np.asarray(bins, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ResetLdpUsageException("bins", "bin edges must be increasing")
    n = values.size
    counts, _ = np.histogram(values / t, bins=edges)
    result = []
    for lo, hi, count in zip(edges[:-1], edges[1:], counts):
        interval = stats.binomtest(int(count), n).proportion_ci(
            confidence_level=confidence, method="wilson"
        )
        upper_rate = -math.log(interval.low) / t if interval.low > 0 else math.inf
        lower_rate = -math.log(interval.high) / t
        if count == 0:
            result.append(
                EmpiricalRateBin(lo, hi, 0, 0.0, lower_rate, lower_rate, math.inf, True)
            )
            continue
        p_hat = count / n
        result.append(
            EmpiricalRateBin(
                float(lo),
                float(hi),
                int(count),
                p_hat,
                -math.log(p_hat) / t,
                lower_rate,
                upper_rate,
                False,
            )
        )
    return result


def empirical_rate(
    fn: FunctionalModel,
    dist: WaitingTimeModel,
    opts: SimulationOpts,
    bins: Sequence[float],
) -> List[EmpiricalRateBin]:
    return empirical_rate_from(simulate(fn, dist, opts).F, opts.t, bins)
