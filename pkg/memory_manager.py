import os
import logging
import gc
from contextlib import contextmanager

import psutil

# Thresholds for the collection run after each batch
MEMORY_CONFIG = {
    "MEMORY_HIGH_WATERMARK": 80.0,
    "ADAPTIVE_GC_ENABLED": True,
}


def get_memory_usage_mb():
    """Resident set size of this process in MB, or ``None`` if psutil fails."""
    try:
        process = psutil.Process(os.getpid())
        return process.memory_info().rss / 1024 / 1024
    except Exception as e:
        logging.error(f"Error reading memory usage: {e}")
        return None


def log_memory_usage(label="batch"):
    """Log current memory usage."""
    rss = get_memory_usage_mb()
    if rss is not None:
        logging.info(f"Memory usage ({label}): {rss:.2f} MB (RSS)")
    return rss


def adaptive_gc(force_level=None):
    """Collect garbage after a batch if the process holds more than the high watermark of system memory."""
    try:
        process = psutil.Process(os.getpid())
        mem_percent = process.memory_percent()

        if force_level is not None:
            gc.collect(generation=force_level)
            logging.info(f"Forced garbage collection at generation {force_level}")
            return True
        if mem_percent > MEMORY_CONFIG["MEMORY_HIGH_WATERMARK"]:
            logging.warning(
                f"Process holds {mem_percent:.1f}% of memory after the batch, running a full collection"
            )
            gc.collect(generation=2)
            return True
        return False
    except Exception as e:
        logging.error(f"Error in adaptive GC: {e}")
        return False


@contextmanager
def batch_memory(label):
    """Log RSS before and after a batch workload."""
    before = log_memory_usage(f"{label} start")
    try:
        yield
    finally:
        after = log_memory_usage(f"{label} end")
        if before is not None and after is not None:
            logging.info(f"Memory change ({label}): {after - before:+.2f} MB")
        if MEMORY_CONFIG["ADAPTIVE_GC_ENABLED"]:
            adaptive_gc()
