"""Formatting of key=value reports and CSV tables."""

import csv
import io
import math
from fractions import Fraction


def format_rat(value):
    """Rationals as ``p/q`` (or ``p``), infinity as ``inf``."""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        value = Fraction(value)
    return str(value)


def format_float(value):
    """Twelve significant digits, ``inf`` for unbounded values."""
    value = float(value)
    if math.isinf(value):
        return "inf"
    return f"{value:.12g}"


def format_items(items):
    """Sorted arrival indices, comma separated."""
    return ",".join(str(i) for i in sorted(item.arrival_index for item in items))


def report_text(pairs):
    """Render ``(key, value)`` pairs as one ``key=value`` line each."""
    return "".join(f"{key}={value}\n" for key, value in pairs)


def parse_report(text):
    """Parse ``key=value`` lines back into a dict of strings."""
    report = {}
    for line in text.splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            report[key] = value
    return report


def rows_to_csv(header, rows):
    """Convert a header and rows to a CSV string with ``\\n`` line endings."""
    with io.StringIO() as output:
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
        return output.getvalue()


def write_text(path, text):
    """Write ``text`` to ``path``; OSError propagates to the caller."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
