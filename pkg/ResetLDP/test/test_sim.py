import math

import numpy as np
import pytest

from ..core.brownian import chunk_rng
from ..core.dist import Exponential
from ..core.functionals import AbsArea, Area, OccupationTime
from ..core.sim import (
    SimulationOpts,
    Simulator,
    TrajectoryBatch,
    cgf_estimates,
    empirical_rate_from,
    run_summary,
    simulate,
    simulate_batch,
    simulate_trajectory,
    summarize,
)
from ..tools.exceptions import ResetLdpDomainException, ResetLdpUsageException


def test_batch_bookkeeping(poisson):
    batch = simulate_batch(OccupationTime(), poisson, 20.0, 500, chunk_rng(0, 0))
    assert len(batch) == 500
    assert np.allclose(batch.F, batch.W + batch.backlog)
    assert np.all((batch.F >= 0) & (batch.F <= 20.0))
    assert np.all(batch.N >= 0)


def test_horizon_zero_has_no_renewals(poisson):
    batch = simulate_batch(Area(), poisson, 0.0, 10, chunk_rng(0, 0))
    assert batch.N.tolist() == [0] * 10
    assert np.all(batch.F == 0.0)


def test_negative_horizon(poisson):
    with pytest.raises(ResetLdpDomainException):
        simulate_batch(Area(), poisson, -1.0, 10, chunk_rng(0, 0))


def test_single_trajectory(cubic):
    outcome = simulate_trajectory(Area(), cubic, 5.0, chunk_rng(1, 0))
    assert isinstance(outcome.N, int)
    assert outcome.F == pytest.approx(outcome.W + outcome.backlog)


def test_reproducible_across_worker_counts(poisson):
    one, many = (
        simulate(
            Area(),
            poisson,
            SimulationOpts(t=10.0, n=600, seed=3, chunk_size=100, workers=workers),
        )
        for workers in (1, 4)
    )
    assert np.array_equal(one.F, many.F)
    assert np.array_equal(one.N, many.N)


def test_seed_changes_the_sample(poisson):
    first = simulate(Area(), poisson, SimulationOpts(t=5.0, n=100, seed=1))
    second = simulate(Area(), poisson, SimulationOpts(t=5.0, n=100, seed=2))
    assert not np.array_equal(first.F, second.F)


def test_concatenate_keeps_order():
    parts = [
        TrajectoryBatch(np.array([i]), np.array([i]), np.array([i]), np.zeros(1))
        for i in range(3)
    ]
    assert TrajectoryBatch.concatenate(parts).F.tolist() == [0, 1, 2]


def test_invalid_options(poisson):
    with pytest.raises(ResetLdpUsageException):
        Simulator(Area(), poisson, SimulationOpts(n=0))


def test_chunk_failure_is_raised(mocker, poisson):
    mocker.patch(
        "ResetLDP.core.sim.simulate_batch", side_effect=ValueError("broken chunk")
    )
    simulator = Simulator(Area(), poisson, SimulationOpts(t=1.0, n=10))
    assert not simulator.run()
    with pytest.raises(ValueError):
        simulator.finished(False)


def test_abs_area_path_step_follows_options(small_law, poisson):
    simulator = Simulator(
        AbsArea(law=small_law), poisson, SimulationOpts(path_step=0.25)
    )
    assert simulator.fn.path_step == 0.25
    assert simulator.fn.law is small_law


def test_occupation_summary(poisson):
    opts = SimulationOpts(t=20.0, n=4_000, seed=5)
    summary = run_summary(OccupationTime(), poisson, opts, k_grid=[0.0, 0.5])
    assert summary.n_samples == 4_000
    assert summary.mean_F_over_t == pytest.approx(0.5, abs=5 * summary.mean_stderr)
    # E[N_t] = t for unit Poisson renewals
    assert summary.renewal_rate == pytest.approx(1.0, abs=5 * summary.renewal_stderr)
    assert summary.expected_renewal_rate == pytest.approx(1.0)
    assert [point.k for point in summary.cgf_grid] == [0.0, 0.5]
    assert summary.to_dict()["cgf_grid"][0]["g_hat"] == 0.0


def test_cubic_area_variance(cubic):
    opts = SimulationOpts(t=50.0, n=4_000, seed=9)
    summary = run_summary(Area(), cubic, opts)
    # O(1/t) horizon bias on top of the sampling error
    assert summary.var_scaled == pytest.approx(summary.v, rel=0.15)


def test_cgf_of_a_constant():
    values = np.full(200, 3.0)
    points = cgf_estimates(values, 2.0, [-1.0, 0.0, 1.0], seed=0)
    assert [p.g_hat for p in points] == pytest.approx([-1.5, 0.0, 1.5])
    assert points[2].ci_lo == pytest.approx(1.5)
    assert points[2].ci_hi == pytest.approx(1.5)
    assert all(p.reliable for p in points)
    assert cgf_estimates(values, 2.0, [], seed=0) == []


def test_cgf_flags_dominated_estimates():
    values = np.concatenate([np.zeros(999), [100.0]])
    point = cgf_estimates(values, 1.0, [1.0], seed=0)[0]
    assert point.ess < 2.0
    assert not point.reliable


def test_empirical_rate():
    values = np.concatenate([np.full(900, 0.25), np.full(100, 0.75)])
    bins = empirical_rate_from(values, 1.0, [0.0, 0.5, 1.0, 1.5])
    assert [b.count for b in bins] == [900, 100, 0]
    assert bins[1].I_hat == pytest.approx(-math.log(0.1))
    assert bins[1].I_lo <= bins[1].I_hat <= bins[1].I_hi
    assert bins[2].bound
    assert bins[2].I_hi == math.inf
    assert bins[2].I_lo > 0


def test_empirical_rate_rejects_bad_bins():
    with pytest.raises(ResetLdpUsageException):
        empirical_rate_from(np.ones(10), 1.0, [1.0, 0.0])


def test_cubic_renewals_are_regular(cubic):
    batch = simulate(OccupationTime(), cubic, SimulationOpts(t=30.0, n=200, seed=1))
    expected = 30.0 / cubic.moment(1.0)
    assert batch.N.mean() == pytest.approx(expected, rel=0.1)


def test_exponential_backlog_bounded():
    batch = simulate(OccupationTime(), Exponential(2.0), SimulationOpts(t=5.0, n=50))
    assert np.all(batch.backlog <= 5.0)


def test_summary_needs_a_hundred_trajectories(poisson):
    opts = SimulationOpts(t=5.0, n=99, seed=1)
    with pytest.raises(ResetLdpDomainException, match="at least 100"):
        run_summary(OccupationTime(), poisson, opts)
    summary = run_summary(OccupationTime(), poisson, SimulationOpts(t=5.0, n=100))
    assert summary.n_samples == 100


def test_summary_needs_a_positive_horizon(poisson):
    batch = simulate(OccupationTime(), poisson, SimulationOpts(t=1.0, n=200))
    with pytest.raises(ResetLdpDomainException):
        summarize(OccupationTime(), poisson, batch, SimulationOpts(t=0.0, n=200))


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_empirical_rate_needs_a_positive_horizon(t):
    with pytest.raises(ResetLdpDomainException):
        empirical_rate_from(np.ones(10), t, [0.0, 1.0, 2.0])
