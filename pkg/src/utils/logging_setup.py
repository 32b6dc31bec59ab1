import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional

from src.utils.config_manager import ConfigManager, LoggingConfig

# Root logger of the package; every module logger is a child of it
PACKAGE_LOGGER = "src"

_HANDLER_MARK = "_impartialkit_handler"


def configure_logging(config: Optional[LoggingConfig] = None) -> logging.Logger:
    """Attach console/file handlers to the package logger from the logging config"""
    if config is None:
        config = ConfigManager().get_config("logging")

    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(config.level)

    # Drop handlers installed by an earlier call so repeated calls do not duplicate output
    for handler in list(logger.handlers):
        if getattr(handler, _HANDLER_MARK, False):
            logger.removeHandler(handler)
            handler.close()

    formatter = logging.Formatter(config.format)

    if config.console_output:
        console = logging.StreamHandler()
        console.setFormatter(formatter)
        setattr(console, _HANDLER_MARK, True)
        logger.addHandler(console)

    if config.file:
        log_dir = os.path.dirname(config.file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        file_handler = RotatingFileHandler(
            config.file,
            maxBytes=config.max_file_size_mb * 1024 * 1024,
            backupCount=config.backup_count,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        setattr(file_handler, _HANDLER_MARK, True)
        logger.addHandler(file_handler)

    return logger
