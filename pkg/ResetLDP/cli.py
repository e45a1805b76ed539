"""Command line runner."""
import argparse
import logging
import sys
from typing import Dict, List, NoReturn, Optional, Sequence

from .commands.abs_area_table_command import AbsAreaTableCommand
from .commands.airy_table_command import AiryTableCommand
from .commands.base_command import BaseCommand
from .commands.clt_command import CltCommand
from .commands.diagnose_command import DiagnoseCommand
from .commands.phi_command import PhiCommand
from .commands.rate_command import RateCommand
from .commands.scaling_check_command import ScalingCheckCommand
from .commands.simulate_command import SimulateCommand
from .commands.varpi_check_command import VarpiCheckCommand
from .commands.verify_command import VerifyCommand
from .commands.run_config import RunConfig, parse_bins, parse_grid
from .core.table_writer import TableWriter
from .definitions.constants import (
    QUAD_ABS_TOL,
    QUAD_REL_TOL,
    Command,
    ExitCode,
    OutputFormat,
)
from .tools.custom_logging import (
    LogTarget,
    get_log_level_key,
    setup_logger,
    setup_task_logger,
)
from .tools.exceptions import (
    ResetLdpAcceptanceException,
    ResetLdpDomainException,
    ResetLdpException,
    ResetLdpNumericException,
    ResetLdpOracleRequiredException,
    ResetLdpUsageException,
)
from .tools.resources import plugin_name
from .tools.settings import set_setting
from .tools.version import version_header

LOGGER = logging.getLogger(plugin_name())

# flags whose values may start with a minus sign
GRID_FLAGS = ("--k-grid", "--w-grid", "--bins", "--r-list")


class UsageErrorParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise ResetLdpUsageException(self.prog, message)


class Runner:
    def __init__(self) -> None:
        self.commands: Dict[Command, BaseCommand] = {
            Command.PHI: PhiCommand(self),
            Command.RATE: RateCommand(self),
            Command.DIAGNOSE: DiagnoseCommand(self),
            Command.SIMULATE: SimulateCommand(self),
            Command.CLT: CltCommand(self),
            Command.AIRY_TABLE: AiryTableCommand(self),
            Command.VARPI_CHECK: VarpiCheckCommand(self),
            Command.SCALING_CHECK: ScalingCheckCommand(self),
            Command.VERIFY: VerifyCommand(self),
            Command.ABS_AREA_TABLE: AbsAreaTableCommand(self),
        }
        for command_enum, command in self.commands.items():
            command.command = command_enum
        self.parser = self.build_parser()

    def build_parser(self) -> argparse.ArgumentParser:
        common = UsageErrorParser(add_help=False)
        common.add_argument("--seed", type=int, default=0)
        common.add_argument("--workers", type=int)
        common.add_argument("--cache", help="absolute area table file")
        common.add_argument("--log-level", dest="log_level")
        common.add_argument("--log-file", dest="log_file")
        common.add_argument(
            "--tol-abs", dest="tol_abs", type=float, default=QUAD_ABS_TOL
        )
        common.add_argument(
            "--tol-rel", dest="tol_rel", type=float, default=QUAD_REL_TOL
        )
        common.add_argument(
            "--out",
            dest="output_format",
            choices=[fmt.value for fmt in OutputFormat],
            default=OutputFormat.CSV.value,
        )
        common.add_argument("--output", help="output file, standard output if omitted")

        parser = UsageErrorParser(prog=plugin_name(), description=version_header())
        parser.add_argument("--version", action="version", version=version_header())
        subparsers = parser.add_subparsers(dest="command", required=True)
        for command_enum, command in self.commands.items():
            subparser = subparsers.add_parser(
                command_enum.value, parents=[common], help=command.help
            )
            command.setup_parser(subparser)
        return parser

    def read_run_config(self, argv: Optional[Sequence[str]] = None) -> RunConfig:
        args = vars(self.parser.parse_args(join_grid_values(argv)))
        config = RunConfig(command=Command(args.pop("command")))
        config.output_format = OutputFormat(args.pop("output_format"))
        for key in ("k_grid", "w_grid"):
            if args.get(key) is not None:
                setattr(config, key, parse_grid(key, args.pop(key)).tolist())
        if args.get("bins") is not None:
            config.bins = parse_bins(args.pop("bins")).tolist()
        if args.get("r_list") is not None:
            config.r_list = parse_grid("r_list", args.pop("r_list")).tolist()
        if args.get("checks") is not None:
            config.checks = [c.strip() for c in args.pop("checks").split(",")]
        for key, value in args.items():
            if value is not None and hasattr(config, key):
                setattr(config, key, value)
        config.validate()
        return config

    def apply_settings(self, config: RunConfig) -> None:
        if config.log_level:
            set_setting(get_log_level_key(LogTarget.STREAM), config.log_level)
        if config.cache:
            set_setting("cache", config.cache)
        setup_logger(plugin_name(), config.log_file)
        setup_task_logger(plugin_name(), config.log_file)

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        try:
            config = self.read_run_config(argv)
            self.apply_settings(config)
            command = self.commands[config.command]
            writer = TableWriter(config.to_dict(), config.output_format, config.output)
            try:
                return int(command.run(config, writer))
            finally:
                command.teardown()
        except (ResetLdpUsageException, ResetLdpDomainException) as e:
            return self.__fail(e, ExitCode.USAGE)
        except (ResetLdpNumericException, ResetLdpOracleRequiredException) as e:
            return self.__fail(e, ExitCode.NUMERIC)
        except ResetLdpAcceptanceException as e:
            return self.__fail(e, ExitCode.ACCEPTANCE)

    @staticmethod
    def __fail(error: ResetLdpException, status: ExitCode) -> int:
        if not LOGGER.handlers:
            setup_logger(plugin_name())
        LOGGER.error(error.message, extra={"details": error.details})
        return int(status)


def join_grid_values(argv: Optional[Sequence[str]]) -> List[str]:
    """``--k-grid -3:3:61`` as ``--k-grid=-3:3:61``, so argparse keeps the value."""
    if argv is None:
        argv = sys.argv[1:]
    joined: List[str] = []
    pending = None
    for arg in argv:
        if pending is not None:
            if arg.startswith("-") and len(arg) > 1 and arg[1] in "0123456789.":
                joined[-1] = f"{pending}={arg}"
                pending = None
                continue
            pending = None
        joined.append(arg)
        if arg in GRID_FLAGS:
            pending = arg
    return joined


def main(argv: Optional[Sequence[str]] = None) -> int:
    return Runner().run(argv)
