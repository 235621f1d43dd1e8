import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional


def setup_logger(log_file: Optional[str] = None, level: int = logging.INFO) -> logging.Logger:
    """
    Configures the root logger used by every module of the project.

    Logs go to the console and to a rotating file. Module loggers created with
    ``logging.getLogger(__name__)`` propagate here.

    Args:
        log_file (str, optional): Target log file. Defaults to ``logs/maxfun.log``.
        level (int): Logging level for the root logger.

    Returns:
        logging.Logger: The configured root logger.
    """
    logger = logging.getLogger()
    logger.setLevel(level)

    formatter = logging.Formatter("%(asctime)s - %(levelname)s - %(message)s")

    # Avoid stacking handlers on repeated calls (tests, selftest inside classify, ...)
    if getattr(setup_logger, "_configured", False):
        return logger

    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)

    log_file = log_file or os.path.join("logs", "maxfun.log")
    log_dir = os.path.dirname(log_file)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    file_handler = RotatingFileHandler(
        log_file, maxBytes=1024 * 1024 * 5, backupCount=5, encoding="utf-8"
    )
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    setup_logger._configured = True
    return logger
