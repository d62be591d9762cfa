"""Exit codes and the mapping from domain exceptions to them, used by the command line."""

import logging

from models import (
    CapacityExceeded,
    ConfigError,
    InvalidHistory,
    ModeMismatch,
    ParseError,
    TooLarge,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_IO = 4

# Checked in order; the first matching class wins.
EXIT_CODES = (
    (ParseError, EXIT_PARSE),
    (CapacityExceeded, EXIT_CONFIG),
    (ModeMismatch, EXIT_CONFIG),
    (ConfigError, EXIT_CONFIG),
    (TooLarge, EXIT_CONFIG),
    (InvalidHistory, EXIT_CONFIG),
    (OSError, EXIT_IO),
)

HANDLED_ERRORS = tuple(exc_type for exc_type, _ in EXIT_CODES)


def exit_code_for(error):
    """Return the exit code for a handled exception, or ``None``."""
    for exc_type, code in EXIT_CODES:
        if isinstance(error, exc_type):
            return code
    return None


def handle_error(error):
    """Log a handled exception and return its exit code; re-raise anything else."""
    code = exit_code_for(error)
    if code is None:
        raise error
    if code == EXIT_IO:
        logging.error("I/O error: %s", error)
    elif code == EXIT_PARSE:
        logging.error("Parse error: %s", error)
    else:
        logging.error("Configuration error: %s", error)
    return code
