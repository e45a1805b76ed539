"""
Brownian path integrals of |B| with a Brownian bridge correction.

Between two grid points the path is a Brownian bridge, so the expected
integral of |B| over a step given its endpoints is known in closed form up to
a one dimensional integral over time, which a short Gauss-Legendre rule
handles. Summing these conditional expectations removes the bias of the
plain trapezoid rule while keeping the sampled randomness.
"""
import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import erf

from ..definitions.constants import BRIDGE_NODES, MIN_PATH_STEPS, PATH_STEP
from ..tools.exceptions import ResetLdpDomainException

# grid values held at once when simulating unit areas
BLOCK_ELEMENTS = 2**22


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Counter based stream for one chunk, independent of scheduling."""
    sequence = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(sequence))


@lru_cache(maxsize=8)
def _bridge_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def expected_abs_normal(mean: np.ndarray, sd: np.ndarray) -> np.ndarray:
    """E|N(mean, sd^2)|, reducing to |mean| where sd vanishes."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = mean / sd
        folded = sd * math.sqrt(2.0 / math.pi) * np.exp(-0.5 * ratio**2) + mean * erf(
            ratio / math.sqrt(2.0)
        )
    return np.where(sd > 0, folded, np.abs(mean))


def bridge_abs_integral(
    path: np.ndarray, dt: float, nodes: int = BRIDGE_NODES
) -> np.ndarray:
    """
    E[∫|B| dt | grid values] summed over the steps of each path.

    ``path`` has shape (..., steps + 1) and starts from the path origin.
    """
    left = path[..., :-1]
    right = path[..., 1:]
    u, w = _bridge_rule(nodes)
    total = np.zeros(left.shape)
    for u_j, w_j in zip(u, w):
        mean = left + u_j * (right - left)
        sd = math.sqrt(dt * u_j * (1.0 - u_j))
        total += w_j * expected_abs_normal(mean, np.full_like(mean, sd))
    return dt * total.sum(axis=-1)


def steps_for_duration(s: np.ndarray, path_step: float = PATH_STEP) -> np.ndarray:
    """Grid size per interval: at least MIN_PATH_STEPS, rounded up to a power of 2."""
    raw = np.maximum(MIN_PATH_STEPS, np.ceil(np.asarray(s) / path_step))
    return (2 ** np.ceil(np.log2(raw))).astype(np.int64)


def unit_abs_area(
    rng: np.random.Generator, size: int, step_exponent: int
) -> np.ndarray:
    """Samples of ∫_0^1 |B| on a grid of 2^step_exponent steps."""
    if size < 0 or step_exponent < 1:
        raise ResetLdpDomainException(
            f"Invalid path request: size={size}, step_exponent={step_exponent}"
        )
    steps = 2**step_exponent
    dt = 1.0 / steps
    areas = np.empty(size)
    block = max(1, BLOCK_ELEMENTS // steps)
    for start in range(0, size, block):
        count = min(block, size - start)
        increments = rng.normal(0.0, math.sqrt(dt), size=(count, steps))
        path = np.concatenate(
            [np.zeros((count, 1)), np.cumsum(increments, axis=1)], axis=1
        )
        areas[start : start + count] = bridge_abs_integral(path, dt)
    return areas


def abs_area_rewards(
    durations: np.ndarray, rng: np.random.Generator, path_step: float = PATH_STEP
) -> np.ndarray:
    """∫_0^s |B| for each duration s, by Brownian scaling of unit-time paths."""
    durations = np.asarray(durations, dtype=float)
    rewards = np.zeros(durations.shape)
    positive = durations > 0
    if not positive.any():
        return rewards
    flat = durations[positive]
    steps = steps_for_duration(flat, path_step)
    values = np.empty(flat.shape)
    # one vectorised batch per grid size
    for n in np.unique(steps):
        selected = steps == n
        values[selected] = unit_abs_area(rng, int(selected.sum()), int(np.log2(n)))
    rewards[positive] = flat**1.5 * values
    return rewards
