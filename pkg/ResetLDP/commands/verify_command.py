import argparse

from ..core.acceptance import AcceptanceOpts, Check, run_acceptance
from ..core.table_writer import TableWriter
from ..definitions.constants import ExitCode
from ..definitions.tables import Tables
from .base_command import BaseCommand
from .run_config import RunConfig


class VerifyCommand(BaseCommand):
    help = "run the verification checks"

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--quick", action="store_true", help="smaller samples")
        parser.add_argument("--checks", help="comma separated check ids")

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        checks = [Check.from_id(c) for c in config.checks] if config.checks else None
        opts = AcceptanceOpts(
            quick=config.quick, seed=config.seed, workers=config.workers, checks=checks
        )
        results = run_acceptance(opts)
        writer.write_table(
            Tables.Checks, [(r.check, r.passed, r.detail) for r in results]
        )
        if all(result.passed for result in results):
            return ExitCode.OK
        return ExitCode.ACCEPTANCE
