import argparse

from ..core.functionals import growth_conditions
from ..core.phi import diagnose
from ..core.table_writer import TableWriter
from ..definitions.constants import ExitCode
from .base_command import BaseCommand
from .run_config import RunConfig


class DiagnoseCommand(BaseCommand):
    help = "regime diagnostics of phi and the typical behaviour"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--functional", required=True)
        parser.add_argument("--dist", required=True)

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        fn, dist = self.functional(config), self.dist(config)
        report = diagnose(fn, dist, config.tolerances())
        document = report.to_dict()
        document["typical"] = fn.typical_stats(dist)
        document["growth"] = growth_conditions(fn, dist)
        writer.write_document(document)
        return ExitCode.OK
