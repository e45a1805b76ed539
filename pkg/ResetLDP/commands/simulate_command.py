import argparse

from ..core.sim import SimulationOpts, empirical_rate_from, simulate, summarize
from ..core.table_writer import TableWriter
from ..definitions.constants import (
    CHUNK_SIZE,
    DEFAULT_HORIZON,
    DEFAULT_SAMPLES,
    MIN_PATH_STEPS,
    PATH_STEP,
    ExitCode,
    OutputFormat,
)
from ..definitions.tables import Tables
from .base_command import BaseCommand
from .run_config import RunConfig

PATH_STEP_HELP = (
    f"grid step of absolute area paths, default {PATH_STEP}; each interval gets"
    f" at least {MIN_PATH_STEPS} steps, rounded up to a power of 2"
)


class SimulateCommand(BaseCommand):
    help = "Monte Carlo summary of F_t with an empirical cumulant generating function"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--functional", required=True)
        parser.add_argument("--dist", required=True)
        parser.add_argument("--t", type=float, default=DEFAULT_HORIZON)
        parser.add_argument("--n", type=int, default=DEFAULT_SAMPLES)
        parser.add_argument("--k-grid", help="lo:hi:n")
        parser.add_argument("--bins", help="lo:hi:n, bins of F_t / t")
        parser.add_argument("--path-step", type=float, help=PATH_STEP_HELP)
        parser.add_argument("--trajectories", help="per-trajectory CSV file")

    @staticmethod
    def sim_opts(config: RunConfig) -> SimulationOpts:
        return SimulationOpts(
            t=config.t if config.t is not None else DEFAULT_HORIZON,
            n=config.n if config.n is not None else DEFAULT_SAMPLES,
            seed=config.seed,
            chunk_size=CHUNK_SIZE,
            workers=config.workers,
            path_step=config.path_step,
        )

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        fn, dist = self.functional(config), self.dist(config)
        opts = self.sim_opts(config)
        batch = simulate(fn, dist, opts)
        summary = summarize(fn, dist, batch, opts, config.k_grid or ())
        document = summary.to_dict()
        if config.bins:
            document["empirical_rate"] = empirical_rate_from(
                batch.F, opts.t, config.bins
            )
        writer.write_document(document)

        if config.trajectories:
            rows = zip(batch.F, batch.W, batch.N, batch.backlog)
            TableWriter(writer.config, OutputFormat.CSV).write_table(
                Tables.Trajectories, rows, path=config.trajectories
            )
        return ExitCode.OK
