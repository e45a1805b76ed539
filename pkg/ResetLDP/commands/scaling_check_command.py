import argparse
import logging

from ..core.rate import scaling_check
from ..core.table_writer import TableWriter
from ..definitions.constants import ExitCode
from ..definitions.tables import Tables
from ..tools.resources import plugin_name
from .base_command import BaseCommand
from .run_config import RunConfig

LOGGER = logging.getLogger(plugin_name())

SCALING_TOLERANCE = 1e-6


class ScalingCheckCommand(BaseCommand):
    help = "zero resetting scaling of the area rate functions"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--functional", required=True)
        parser.add_argument("--r-list", default="0.25,1,4")
        parser.add_argument("--w-grid", default="0.5,1,2")

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        fn = self.functional(config)
        report = scaling_check(
            fn, config.r_list, config.w_grid or [], tolerance=SCALING_TOLERANCE
        )
        rows = [
            (row.r, row.w, row.I_r, row.scaled_I_1, row.rel_dev) for row in report.rows
        ]
        extra = {
            "max_rel_dev": report.max_rel_dev,
            "small_w": report.small_w,
            "small_w_ok": report.small_w_ok,
        }
        writer.write_table(Tables.Scaling, rows, extra=extra)
        if report.max_rel_dev > SCALING_TOLERANCE or not report.small_w_ok:
            LOGGER.error(
                "Scaling check failed",
                extra={"details": f"max relative deviation {report.max_rel_dev:.3e}"},
            )
            return ExitCode.ACCEPTANCE
        return ExitCode.OK
