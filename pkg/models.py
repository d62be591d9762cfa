"""
Data models for the reservation knapsack simulator.

Every size, value, cost and gain in this module is an exact rational
(``fractions.Fraction``). Floats are confined to ``bounds.py``.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Tuple, Union
import logging
import math
import re

Rat = Fraction
INFINITE = math.inf
RatioValue = Union[Fraction, float]

ZERO = Fraction(0)
ONE = Fraction(1)

# Decimal literals, plus integer p/q for values without a terminating decimal; "nan" and "inf" are rejected.
_DECIMAL_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_RATIO_RE = re.compile(r"^[+-]?\d+/\d+$")


class ParseError(Exception):
    """Raised when a line of an instance file cannot be turned into an item."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class CapacityExceeded(Exception):
    """Raised when a packing holds more than the unit knapsack."""

    pass


class ModeMismatch(Exception):
    """Raised when a policy or adversary is used with the wrong cost mode."""

    pass


class ConfigError(Exception):
    """Raised for invalid policy, adversary or command configuration."""

    pass


class TooLarge(Exception):
    """Raised when exhaustive enumeration is asked for too many items."""

    pass


class InvalidHistory(Exception):
    """Raised when a decision history does not match what an adversary emitted."""

    pass


def to_rat(value) -> Fraction:
    """Convert ints, Fractions and decimal strings to an exact rational.

    Floats are converted through their shortest ``repr`` so that ``0.1``
    becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational quantity")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite quantity: {value}")
        return Fraction(repr(value))
    return Fraction(str(value).strip())


def optional_rat(value):
    return None if value is None else to_rat(value)


class CostKind(Enum):
    """How reservation costs are charged."""

    SIZE = "size"
    VALUE = "value"


@dataclass(frozen=True, slots=True)
class Mode:
    """Reservation-cost mode: a fraction ``alpha`` of size or of value."""

    kind: CostKind
    alpha: Fraction = ZERO

    def __post_init__(self):
        object.__setattr__(self, "alpha", to_rat(self.alpha))
        if not isinstance(self.kind, CostKind):
            object.__setattr__(self, "kind", CostKind(self.kind))
        if self.alpha < 0:
            raise ConfigError(f"alpha must be non-negative, got {self.alpha}")

    @classmethod
    def size(cls, alpha) -> "Mode":
        return cls(CostKind.SIZE, alpha)

    @classmethod
    def value(cls, alpha) -> "Mode":
        return cls(CostKind.VALUE, alpha)


@dataclass(frozen=True, slots=True)
class Item:
    """An item ``x = (s, v)`` with its position in the request sequence."""

    size: Fraction
    value: Fraction
    arrival_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "size", to_rat(self.size))
        object.__setattr__(self, "value", to_rat(self.value))
        if self.size <= 0 or self.size > 1:
            raise ValueError(f"item size must lie in (0, 1], got {self.size}")
        if self.value < 0:
            raise ValueError(f"item value must be non-negative, got {self.value}")
        if self.arrival_index < 0:
            raise ValueError("arrival_index must be a natural number")


@dataclass(frozen=True, slots=True)
class Instance:
    """A request sequence; items are stored in arrival order."""

    items: Tuple[Item, ...] = field(default_factory=tuple)

    def __post_init__(self):
        items = tuple(self.items)
        object.__setattr__(self, "items", items)
        for position, item in enumerate(items):
            if item.arrival_index != position:
                raise ValueError(
                    f"arrival_index {item.arrival_index} at position {position}; indices must be 0..n-1 in order"
                )

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "Instance":
        """Build an instance from ``(size, value)`` pairs in arrival order."""
        return cls(tuple(Item(size, value, index) for index, (size, value) in enumerate(pairs)))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def to_text(self) -> str:
        """Render the instance in the instance file format."""
        return "".join(f"{format_decimal(item.size)},{format_decimal(item.value)}\n" for item in self.items)


@dataclass(frozen=True, slots=True)
class GainReport:
    """Packed value, reservation cost and their difference."""

    packed_value: Fraction
    reservation_cost: Fraction
    net_gain: Fraction


def density(item: Item) -> Fraction:
    """Value per unit of size."""
    return item.value / item.size


def reservation_cost(item: Item, mode: Mode) -> Fraction:
    """Cost of reserving ``item``: alpha times its size or its value."""
    if mode.kind is CostKind.SIZE:
        return mode.alpha * item.size
    return mode.alpha * item.value


def gain(packed: Iterable[Item], reserved: Iterable[Item], mode: Mode) -> GainReport:
    """
    Account for a finished run.

    Every reserved item is charged once, whether or not it ends up packed.
    Items packed without a reservation cost nothing.

    Raises:
        CapacityExceeded: if the packed items do not fit in the knapsack.
    """
    packed = set(packed)
    total_size = sum((item.size for item in packed), ZERO)
    if total_size > 1:
        raise CapacityExceeded(f"packed size {total_size} exceeds capacity 1")
    packed_value = sum((item.value for item in packed), ZERO)
    cost = sum((reservation_cost(item, mode) for item in set(reserved)), ZERO)
    return GainReport(packed_value=packed_value, reservation_cost=cost, net_gain=packed_value - cost)


def ratio(opt_gain, alg_gain, beta=ZERO) -> RatioValue:
    """
    Least ``c`` with ``opt_gain <= c * alg_gain + beta``.

    Returns 0 when the optimum is already covered by ``beta`` and
    ``INFINITE`` when the algorithm earned nothing.
    """
    opt_gain, alg_gain, beta = to_rat(opt_gain), to_rat(alg_gain), to_rat(beta)
    if opt_gain <= beta:
        return ZERO
    if alg_gain <= 0:
        return INFINITE
    return max(ZERO, (opt_gain - beta) / alg_gain)


def format_decimal(value: Fraction) -> str:
    """
    Render a rational as a decimal string when it terminates, else as ``p/q``.

    Terminating decimals round-trip exactly through ``parse_instance``.
    """
    value = to_rat(value)
    denominator = value.denominator
    twos = fives = 0
    while denominator % 2 == 0:
        denominator //= 2
        twos += 1
    while denominator % 5 == 0:
        denominator //= 5
        fives += 1
    if denominator != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = value * 10**digits
    sign = "-" if scaled < 0 else ""
    whole = str(abs(scaled.numerator))
    if digits == 0:
        return f"{sign}{whole}"
    whole = whole.rjust(digits + 1, "0")
    return f"{sign}{whole[:-digits]}.{whole[-digits:]}"


def _parse_field(text: str, line: int, name: str) -> Fraction:
    text = text.strip()
    if _RATIO_RE.match(text):
        if int(text.split("/", 1)[1]) == 0:
            raise ParseError(line, f"{name} {text!r} has a zero denominator")
        return Fraction(text)
    if not _DECIMAL_RE.match(text):
        raise ParseError(line, f"{name} {text!r} is not a decimal number")
    return Fraction(text)


def parse_instance(text: Union[bytes, str]) -> Instance:
    """
    Parse the instance file format: one ``size,value`` pair per line.

    Blank lines and ``#`` comments are ignored. Numbers are decimal strings or
    ``p/q`` fractions, parsed exactly.

    Raises:
        ParseError: for malformed lines, sizes outside (0, 1] or negative values.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(0, f"instance is not valid UTF-8: {e}") from e

    items = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise ParseError(line_number, f"expected 'size,value', got {raw.strip()!r}")
        size = _parse_field(fields[0], line_number, "size")
        value = _parse_field(fields[1], line_number, "value")
        if size <= 0:
            raise ParseError(line_number, f"size must be positive, got {fields[0].strip()}")
        if size > 1:
            raise ParseError(line_number, f"size must not exceed 1, got {fields[0].strip()}")
        if value < 0:
            raise ParseError(line_number, f"value must be non-negative, got {fields[1].strip()}")
        items.append(Item(size, value, len(items)))

    logging.debug(f"Parsed instance with {len(items)} items")
    return Instance(tuple(items))
