"""Main controller for the command-line entry point."""
import argparse
from typing import Dict, List, Optional, Sequence

from application.analyze_run_use_case import AnalyzeRunUseCase
from application.run_simulation_use_case import RunSimulationUseCase
from application.stage_result import StageResult, StageStatus
from application.verify_suite_use_case import SUITES, VerifySuiteUseCase
from domain.exceptions import ConfigValidationError
from domain.ports.logger import AppLogger
from infrastructure.config.run_config_loader import RunConfigLoader
from infrastructure.utils import digest


def parse_params(pairs: Sequence[str]) -> Dict[str, str]:
    """
    Parses oracle overrides given as key=value.

    Raises:
        ConfigValidationError: For a pair without '=' or with an empty key
    """
    params: Dict[str, str] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigValidationError(f"[oracle].{pair}", "parameters are given as key=value")
        params[key.strip()] = value.strip()
    return params


class MainController:
    """Dispatches the run, analyze, verify and oracle subcommands."""

    def __init__(
        self,
        run_use_case: RunSimulationUseCase,
        analyze_use_case: AnalyzeRunUseCase,
        verify_use_case: VerifySuiteUseCase,
        logger: AppLogger,
    ):
        """
        Initializes the main controller.

        Args:
            run_use_case: Simulation stage
            analyze_use_case: Analysis stage
            verify_use_case: Verification suite and single oracle checks
            logger: Logger instance
        """
        self.run_use_case = run_use_case
        self.analyze_use_case = analyze_use_case
        self.verify_use_case = verify_use_case
        self.logger = logger

    def run(self, args: argparse.Namespace) -> StageResult:
        """
        Runs the selected subcommand.

        Args:
            args: Parsed command-line arguments

        Returns:
            StageResult of the stage; its exit_code is the process exit code
        """
        handlers = {
            "run": self._run,
            "analyze": self._analyze,
            "verify": self._verify,
            "oracle": self._oracle,
        }
        try:
            result = handlers[args.command](args)
        except ConfigValidationError as e:
            result = StageResult(stage=args.command, status=StageStatus.CONFIG_ERROR, message=str(e))
        self._display_results(result)
        return result

    def _run(self, args: argparse.Namespace) -> StageResult:
        config = RunConfigLoader.load(args.config)
        text = RunConfigLoader.serialize(config)
        return self.run_use_case.execute(config, text, digest(text))

    def _analyze(self, args: argparse.Namespace) -> StageResult:
        thresholds = RunConfigLoader.load_thresholds(args.thresholds) if args.thresholds else None
        return self.analyze_use_case.execute(args.run_dir, thresholds)

    def _verify(self, args: argparse.Namespace) -> StageResult:
        return self.verify_use_case.execute(args.suite, inject_corruption=args.inject_corruption)

    def _oracle(self, args: argparse.Namespace) -> StageResult:
        return self.verify_use_case.run_check(args.check, parse_params(args.params), fast=args.fast)

    def _display_results(self, result: StageResult) -> None:
        """
        Displays the stage result.

        Args:
            result: Stage result to display
        """
        if result.is_success:
            self.logger.info(str(result))
            return
        if result.status == StageStatus.CONFIG_ERROR:
            self.logger.error(f"Configuration error: {result.message}")
            return
        self.logger.error(str(result))
        for name in result.failures:
            self.logger.error(f"  - failed: {name}")

    @staticmethod
    def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
        """
        Parses command-line arguments.

        Args:
            argv: Argument list (defaults to sys.argv[1:])

        Returns:
            Parsed arguments
        """
        parser = argparse.ArgumentParser(
            prog="rvm",
            description="Relativistic Vlasov-Maxwell simulator and asymptotics verification"
        )
        subparsers = parser.add_subparsers(dest="command", required=True)

        run = subparsers.add_parser("run", help="Simulate a run configuration")
        run.add_argument("config", help="Path to the run configuration (.ini)")

        analyze = subparsers.add_parser("analyze", help="Analyze a completed run directory")
        analyze.add_argument("run_dir", help="Run directory written by 'run'")
        analyze.add_argument(
            "--thresholds",
            help="File with an [analysis] section overriding the stored thresholds"
        )

        verify = subparsers.add_parser("verify", help="Run the verification suite")
        verify.add_argument("--suite", choices=SUITES, default="fast", help="Resolution level")
        verify.add_argument(
            "--inject-corruption",
            action="store_true",
            help="Corrupt the self-similar operator; the suite is expected to fail"
        )

        oracle = subparsers.add_parser("oracle", help="Run a single verification check")
        oracle.add_argument("check", help="Check name, e.g. kirchhoff or retarded")
        oracle.add_argument("params", nargs="*", help="Overrides given as key=value")
        oracle.add_argument("--fast", action="store_true", help="Use the reduced resolutions")
        return parser.parse_args(argv)
