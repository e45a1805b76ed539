import argparse

from ..core.functionals import growth_conditions
from ..core.sim import simulate, summarize
from ..core.table_writer import TableWriter
from ..definitions.constants import CLT_HORIZON, DEFAULT_SAMPLES, ExitCode
from .base_command import BaseCommand
from .run_config import RunConfig
from .simulate_command import PATH_STEP_HELP, SimulateCommand


class CltCommand(BaseCommand):
    help = "law of large numbers and central limit statistics against simulation"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--functional", required=True)
        parser.add_argument("--dist", required=True)
        parser.add_argument("--t", type=float, default=CLT_HORIZON)
        parser.add_argument("--n", type=int, default=DEFAULT_SAMPLES)
        parser.add_argument("--path-step", type=float, help=PATH_STEP_HELP)

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        fn, dist = self.functional(config), self.dist(config)
        typical = fn.typical_stats(dist)
        document = {
            "typical": typical,
            "growth": growth_conditions(fn, dist),
        }
        if typical.valid_clt:
            opts = SimulateCommand.sim_opts(config)
            summary = summarize(fn, dist, simulate(fn, dist, opts), opts)
            document["simulation"] = summary.to_dict()
        writer.write_document(document)
        return ExitCode.OK
