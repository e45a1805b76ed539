import argparse
import logging

from ..core.phi import varpi_check
from ..core.table_writer import TableWriter
from ..definitions.constants import ExitCode
from ..definitions.tables import Tables
from ..tools.resources import plugin_name
from .base_command import BaseCommand
from .phi_command import DEFAULT_K_GRID
from .run_config import RunConfig

LOGGER = logging.getLogger(plugin_name())


class VarpiCheckCommand(BaseCommand):
    help = "varpi(k) against phi(k), the hypothesis of the full large deviations"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--functional", required=True)
        parser.add_argument("--dist", required=True)
        parser.add_argument("--k-grid", default=DEFAULT_K_GRID, help="lo:hi:n")

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        fn, dist = self.functional(config), self.dist(config)
        rows = varpi_check(fn, dist, config.k_grid or [])
        writer.write_table(Tables.Varpi, [(r.k, r.varpi, r.phi, r.ok) for r in rows])
        failed = [row.k for row in rows if not row.ok]
        if failed:
            LOGGER.error(f"varpi < phi at k = {failed}")
            return ExitCode.ACCEPTANCE
        return ExitCode.OK
