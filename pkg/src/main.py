"""Main entry point - composition root."""
import sys
from typing import List, Optional

from application.analyze_run_use_case import AnalyzeRunUseCase
from application.run_simulation_use_case import RunSimulationUseCase
from application.verify_suite_use_case import VerifySuiteUseCase
from controllers.main_controller import MainController
from infrastructure.config.config import Config
from infrastructure.config.run_config_loader import RunConfigLoader
from infrastructure.db.connection import DatabaseConnection
from infrastructure.db.run_catalog_sql import RunCatalogSQL
from infrastructure.hardware.local_hardware_info import LocalHardwareInfo
from infrastructure.logger import Logger
from infrastructure.storage.local_artifact_store import LocalArtifactStore
from infrastructure.utils import digest


def build_controller(config: Config, logger) -> MainController:
    """
    Wires the infrastructure adapters into the use cases.

    Args:
        config: Process configuration
        logger: Logger instance

    Returns:
        MainController ready to dispatch a subcommand
    """
    logger.info("Initializing infrastructure adapters...")

    db_connection = DatabaseConnection(config.catalog, logger)
    db_connection.initialize()
    run_catalog = RunCatalogSQL(db_connection)
    artifact_store = LocalArtifactStore()

    hardware_info = LocalHardwareInfo()
    logger.info(f"  - CPU: {hardware_info.cpu}")

    run_use_case = RunSimulationUseCase(
        artifact_store=artifact_store,
        run_catalog=run_catalog,
        logger=logger,
        default_workers=hardware_info.default_workers,
        workers_override=config.workers.count,
    )
    analyze_use_case = AnalyzeRunUseCase(
        artifact_store=artifact_store,
        run_catalog=run_catalog,
        logger=logger,
        config_parser=RunConfigLoader.parse,
        digest=digest,
    )
    verify_use_case = VerifySuiteUseCase(logger=logger, budget_minutes=config.verify.budget_minutes)

    logger.info("Infrastructure adapters initialized successfully")
    return MainController(run_use_case, analyze_use_case, verify_use_case, logger=logger)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main application entry point.

    Args:
        argv: Command-line arguments (defaults to sys.argv[1:])

    Returns:
        Process exit code: 0 success, 1 stage failure, 2 configuration error
    """
    args = MainController.parse_args(argv)
    config = Config.load()
    logger = Logger.get_logger(config.logger.name, config.logger.level)
    logger.title("Relativistic Vlasov-Maxwell asymptotics")

    try:
        config.log_config(logger)
        controller = build_controller(config, logger)
        result = controller.run(args)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 1
    except Exception as e:
        logger.error(f"Application error: {e}")
        import traceback
        logger.error(traceback.format_exc())
        return 1
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
