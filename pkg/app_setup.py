import os
import logging
from concurrent.futures import ProcessPoolExecutor

from config import get_log_level


def configure_logging(log_file=None, level=None):
    """Configure root logger and return it."""
    log_level = (level or get_log_level()).upper()
    logger = logging.getLogger()
    logger.setLevel(getattr(logging, log_level, logging.INFO))
    formatter = logging.Formatter("%(asctime)s - %(levelname)s - %(message)s")

    handlers = []
    if log_file:
        from logging.handlers import RotatingFileHandler

        log_dir = os.path.dirname(os.path.abspath(log_file))
        os.makedirs(log_dir, exist_ok=True)
        file_handler = RotatingFileHandler(log_file, maxBytes=5 * 1024 * 1024, backupCount=5)
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)

    # Reports go to stdout; log records stay on stderr.
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    handlers.append(console_handler)

    for handler in list(logger.handlers):
        try:
            handler.close()
        except Exception:
            pass
    logger.handlers = []
    for handler in handlers:
        logger.addHandler(handler)
    return logger


def run_batch(func, tasks, workers=1):
    """
    Apply ``func`` to every task, in a process pool when ``workers > 1``.

    Results come back in task order either way, so reductions over them are
    independent of completion order.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(func, tasks))
    logging.debug(f"Ran {len(tasks)} tasks on {workers} workers")
    return results
