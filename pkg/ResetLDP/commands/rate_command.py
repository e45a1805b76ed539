import argparse
from typing import Dict

import numpy as np

from ..core.rate import RateSolver
from ..core.table_writer import TableWriter
from ..definitions.constants import ExitCode, FunctionalKind
from ..definitions.tables import Tables
from .base_command import BaseCommand
from .run_config import RunConfig

DEFAULT_W_GRIDS: Dict[FunctionalKind, np.ndarray] = {
    FunctionalKind.OCCUPATION: np.linspace(0.0, 1.0, 101),
    FunctionalKind.AREA: np.linspace(-6.0, 6.0, 121),
    FunctionalKind.ABS_AREA: np.linspace(0.0, 6.0, 121),
}


class RateCommand(BaseCommand):
    help = "rate function I(w) with its affine stretches"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--functional", required=True)
        parser.add_argument("--dist", required=True)
        parser.add_argument("--w-grid", help="lo:hi:n, by default the support")

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        fn, dist = self.functional(config), self.dist(config)
        w_grid = config.w_grid
        if w_grid is None:
            w_grid = DEFAULT_W_GRIDS[fn.kind].tolist()
        solver = RateSolver(fn, dist, config.tolerances())
        profile = solver.profile(w_grid)
        rows = [(p.w, p.value, p.k_star, p.regime) for p in profile.points]
        extra = {
            "classification": solver.report.classification,
            "stretches": profile.stretches,
            "singular_points": profile.singular_points,
        }
        writer.write_table(Tables.Rate, rows, extra=extra)
        return ExitCode.OK
