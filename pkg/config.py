"""
Run defaults for the resknap command line.

Values live in a JSON file; flags given on the command line take precedence
over it, and ``RESKNAP_SEED`` / ``LOG_LEVEL`` take precedence over the file.
"""

import os
import json
import logging
import threading

# Tests patch CONFIG_FILE and then reload the module; globals().get keeps the
# patched path alive through the reload.
CONFIG_FILE = globals().get("CONFIG_FILE", "config.json")

_cached_config = None
_config_mtime = None
config_lock = threading.Lock()

NUMBER = (int, float)
OPTIONAL_NUMBER = (int, float, type(None))
OPTIONAL_STR = (str, type(None))

DEFAULT_CONFIG = {
    "mode": "value",
    "policy": "alg2",
    "alpha": 0.1,
    "c": None,
    "delta": 0.1,
    "beta": 10,
    "epsilon": 0.5,
    "seed": 12345,
    "instances": 200,
    "max_items": 50,
    "workers": 1,
    "density_low_factor": 0.25,
    "density_high_factor": 8,
    "adversary_n": 25,
    "adversary_eps2": 0.05,
    "adversary_eps3": 0.0,
    "size_adversary_C": 1000000,
    "size_adversary_epsilon": 0.01,
    "log_level": "INFO",
    "log_file": None,
}

REQUIRED_TYPES = {
    "mode": str,
    "policy": str,
    "alpha": NUMBER,
    "c": OPTIONAL_NUMBER,
    "delta": NUMBER,
    "beta": (int, float, str),
    "epsilon": NUMBER,
    "seed": int,
    "instances": int,
    "max_items": int,
    "workers": int,
    "density_low_factor": NUMBER,
    "density_high_factor": NUMBER,
    "adversary_n": int,
    "adversary_eps2": NUMBER,
    "adversary_eps3": NUMBER,
    "size_adversary_C": NUMBER,
    "size_adversary_epsilon": NUMBER,
    "log_level": str,
    "log_file": OPTIONAL_STR,
}

VALID_MODES = ("size", "value")
VALID_POLICIES = ("alg1", "alg2", "pack-first-fit", "reject-all", "reserve-all")
POSITIVE_COUNTS = ("instances", "max_items", "workers", "adversary_n")


def _problem(config):
    """First thing wrong with ``config``, or ``None``."""
    for key, expected in REQUIRED_TYPES.items():
        if key not in config:
            return f"missing key {key}"
        value = config[key]
        # bool is an int subclass; true/false is never a valid count or factor
        if isinstance(value, bool) or not isinstance(value, expected):
            return f"{key} has type {type(value).__name__}"

    if config["mode"] not in VALID_MODES:
        return f"unknown mode {config['mode']!r}"
    if config["policy"] not in VALID_POLICIES:
        return f"unknown policy {config['policy']!r}"
    if isinstance(config["beta"], str) and config["beta"] != "from-ledger":
        return f"beta must be a number or 'from-ledger', got {config['beta']!r}"
    for key in POSITIVE_COUNTS:
        if config[key] < 1:
            return f"{key} must be at least 1"
    if config["alpha"] < 0:
        return "alpha must be non-negative"
    return None


def validate_config(config):
    """Return True when every key is present, typed and in range; log the first problem otherwise."""
    problem = _problem(config)
    if problem:
        logging.error(f"Invalid configuration: {problem}")
        return False
    return True


def _file_mtime():
    try:
        return os.path.getmtime(CONFIG_FILE)
    except OSError as e:
        logging.error(f"Cannot stat {CONFIG_FILE}: {e}")
        return None


def _read_config_file():
    """Defaults overlaid with the file's values; raises on unreadable or invalid files."""
    with open(CONFIG_FILE, "r") as f:
        merged = {**DEFAULT_CONFIG, **json.load(f)}
    if not validate_config(merged):
        raise ValueError(f"{CONFIG_FILE} failed validation")
    return merged


def load_config():
    """
    Current configuration, re-read only when the file's mtime changes.

    An unreadable or invalid file leaves the last good configuration in place
    (the defaults if there never was one).
    """
    global _cached_config, _config_mtime
    with config_lock:
        if not os.path.exists(CONFIG_FILE):
            if _cached_config is None:
                logging.warning(f"No configuration at {CONFIG_FILE}; running on defaults")
                _cached_config, _config_mtime = DEFAULT_CONFIG, None
            return _cached_config

        mtime = _file_mtime()
        if _cached_config is not None and mtime == _config_mtime:
            return _cached_config

        try:
            _cached_config = _read_config_file()
            logging.info(f"Read configuration from {CONFIG_FILE}")
        except Exception as e:
            logging.error(f"Ignoring configuration in {CONFIG_FILE}: {e}")
            if _cached_config is None:
                _cached_config = DEFAULT_CONFIG
        _config_mtime = mtime
        return _cached_config


def get_seed(fallback=None):
    """
    Random seed: ``RESKNAP_SEED`` when it is an integer, else ``fallback``
    (typically a --seed flag), else the configured seed.
    """
    env_seed = os.environ.get("RESKNAP_SEED")
    if env_seed:
        try:
            return int(env_seed)
        except ValueError:
            logging.warning(f"Ignoring non-integer RESKNAP_SEED {env_seed!r}")
    if fallback is not None:
        return int(fallback)
    return int(load_config().get("seed", DEFAULT_CONFIG["seed"]))


def get_log_level():
    """Log level name from ``LOG_LEVEL``, the configuration, or INFO."""
    level = os.environ.get("LOG_LEVEL") or load_config().get("log_level") or "INFO"
    return str(level).upper()


def use_config_file(path):
    """Switch to another configuration file; the next load reads it fresh."""
    global CONFIG_FILE, _cached_config, _config_mtime
    with config_lock:
        CONFIG_FILE = path
        _cached_config = _config_mtime = None
