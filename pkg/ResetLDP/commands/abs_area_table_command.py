import argparse

from ..core.abs_area_law import AbsAreaLaw, AbsAreaLawOpts, default_cache_path
from ..core.table_writer import TableWriter
from ..definitions.constants import (
    MEAN_ABS_AREA,
    QUANTILE_COUNT,
    SECOND_MOMENT_ABS_AREA,
    TABLE_PATHS,
    TABLE_STEP_EXPONENT,
    ExitCode,
)
from .base_command import BaseCommand
from .run_config import RunConfig


class AbsAreaTableCommand(BaseCommand):
    help = "simulate and cache the quantile table of the unit absolute area"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--paths", type=int, default=TABLE_PATHS, help="unit paths, %(default)s"
        )
        parser.add_argument(
            "--count", type=int, default=QUANTILE_COUNT, help="quantiles, %(default)s"
        )
        parser.add_argument(
            "--step-exponent",
            type=int,
            default=TABLE_STEP_EXPONENT,
            help="grid of 2^-N on [0, 1] with a bridge correction of |B| between"
            " nodes, N=%(default)s",
        )

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        opts = AbsAreaLawOpts(
            paths=config.paths or TABLE_PATHS,
            count=config.count or QUANTILE_COUNT,
            step_exponent=config.step_exponent or TABLE_STEP_EXPONENT,
            seed=config.seed,
            workers=config.workers,
        )
        law = AbsAreaLaw.build(opts)
        path = default_cache_path()
        law.save(path)
        writer.write_document(
            {
                "path": path,
                "count": law.count,
                "step_exponent": law.step_exponent,
                "mean": law.mean,
                "mean_exact": MEAN_ABS_AREA,
                "second_moment": law.second_moment,
                "second_moment_exact": SECOND_MOMENT_ABS_AREA,
                "mc_stderr": law.mc_stderr,
                "reliable_tilt": law.reliable_tilt,
                "sandwich_constant": law.sandwich_constant,
            }
        )
        return ExitCode.OK
