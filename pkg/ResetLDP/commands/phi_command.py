import argparse

from ..core.phi import PhiSolver
from ..core.table_writer import TableWriter
from ..definitions.constants import ExitCode
from ..definitions.tables import Tables
from .base_command import BaseCommand
from .run_config import RunConfig

DEFAULT_K_GRID = "-3:3:61"


class PhiCommand(BaseCommand):
    help = "phi(k) on a grid of tilts"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--functional", required=True)
        parser.add_argument("--dist", required=True)
        parser.add_argument("--k-grid", default=DEFAULT_K_GRID, help="lo:hi:n")

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        fn, dist = self.functional(config), self.dist(config)
        solver = PhiSolver(fn, dist, config.tolerances())
        rows = []
        for k in config.k_grid or []:
            value = solver.solve(k)
            rows.append((value.k, value.value, value.regime, value.residual))
        writer.write_table(Tables.Phi, rows)
        return ExitCode.OK
