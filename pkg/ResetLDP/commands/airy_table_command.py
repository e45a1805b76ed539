import argparse

import numpy as np

from ..core import airy
from ..core.table_writer import TableWriter
from ..definitions.constants import AIRY_TABLE_SIZE, ExitCode
from ..definitions.tables import Tables
from .base_command import BaseCommand
from .run_config import RunConfig

SCAN_GRID = np.geomspace(1e-3, 1e2, 1000)


class AiryTableCommand(BaseCommand):
    help = "zeros of Ai' and the coefficients of the absolute area series"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--count", type=int, default=AIRY_TABLE_SIZE)

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        table = airy.build_table(config.count or AIRY_TABLE_SIZE)
        scan = airy.conjecture_scan(SCAN_GRID, airy.build_table())
        extra = {
            "h_non_decreasing": scan.non_decreasing,
            "h_min_slope": scan.min_slope,
            "h_small_limit": scan.small_limit,
            "h_large_limit": scan.large_limit,
        }
        writer.write_table(Tables.Airy, table.rows(), extra=extra)
        return ExitCode.OK
