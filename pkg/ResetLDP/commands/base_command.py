"""Command base class."""
import argparse
from typing import TYPE_CHECKING, Optional

from ..core.dist import WaitingTimeModel
from ..core.functionals import FunctionalModel, functional_from_name
from ..core.table_writer import TableWriter
from ..definitions.constants import Command
from ..tools.exceptions import ResetLdpNotImplementedException, ResetLdpUsageException
from .run_config import RunConfig

if TYPE_CHECKING:
    from ..cli import Runner


class BaseCommand:
    """
    One subcommand of the runner. Subclasses add their own flags in
    ``setup_parser`` and write their results in ``run``.
    """

    help = ""

    def __init__(self, runner: "Runner") -> None:
        self._command: Optional[Command] = None
        self._runner = runner

    @property
    def command(self) -> Command:
        if self._command:
            return self._command
        else:
            raise NotImplementedError

    @command.setter
    def command(self, command: Command) -> None:
        self._command = command

    @property
    def runner(self) -> "Runner":
        return self._runner

    def setup_parser(self, parser: argparse.ArgumentParser) -> None:
        """Add the flags of the command."""
        raise ResetLdpNotImplementedException()

    def run(self, config: RunConfig, writer: TableWriter) -> int:
        """Run the command and return the exit status."""
        raise ResetLdpNotImplementedException()

    def teardown(self) -> None:
        """Release what the run holds on to"""

    @staticmethod
    def functional(config: RunConfig) -> FunctionalModel:
        if not config.functional:
            raise ResetLdpUsageException("functional", "a functional is required")
        return functional_from_name(config.functional, path_step=config.path_step)

    @staticmethod
    def dist(config: RunConfig) -> WaitingTimeModel:
        if not config.dist:
            raise ResetLdpUsageException("dist", "a waiting time law is required")
        return WaitingTimeModel.from_spec(config.dist)
