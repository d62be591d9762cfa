"""
Seeded random instances for guarantee checks and sweeps.

Sizes are multiples of 1/2**16. Densities are drawn log-uniformly from a band
around the policy thresholds and snapped to multiples of 1/2**20, so values
stay exact and small-denominator.
"""

from fractions import Fraction
from typing import List
import logging
import math
import random

from models import Instance, Item, to_rat

SIZE_STEPS = 2**16
DENSITY_STEPS = 2**20


def _random_size(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, SIZE_STEPS), SIZE_STEPS)


def _snap_density(value: float) -> Fraction:
    return Fraction(max(1, round(value * DENSITY_STEPS)), DENSITY_STEPS)


def density_band(alpha, c, low_factor=Fraction(1, 4), high_factor=8):
    """Density range ``[alpha*low_factor, high_factor*c*alpha]``; alpha = 0 uses 1 as its base."""
    base = float(to_rat(alpha)) or 1.0
    return base * float(to_rat(low_factor)), float(to_rat(high_factor)) * float(to_rat(c)) * base


def random_instance(rng: random.Random, max_items: int, low_density: float, high_density: float) -> Instance:
    """One instance with 1..max_items items."""
    count = rng.randint(1, max_items)
    log_low, log_high = math.log(low_density), math.log(high_density)
    items = []
    for index in range(count):
        size = _random_size(rng)
        item_density = _snap_density(math.exp(rng.uniform(log_low, log_high)))
        items.append(Item(size, size * item_density, index))
    return Instance(tuple(items))


def random_batch(
    seed: int,
    count: int,
    max_items: int,
    alpha,
    c,
    low_factor=Fraction(1, 4),
    high_factor=8,
) -> List[Instance]:
    """``count`` instances drawn from a single seeded generator."""
    rng = random.Random(seed)
    low, high = density_band(alpha, c, low_factor, high_factor)
    batch = [random_instance(rng, max_items, low, high) for _ in range(count)]
    logging.debug(f"Generated {count} instances (seed={seed}, densities {low:.4g}..{high:.4g})")
    return batch


def unit_density_batch(seed: int, count: int, max_items: int) -> List[Instance]:
    """Instances whose items all have density 1, i.e. value equal to size."""
    rng = random.Random(seed)
    batch = []
    for _ in range(count):
        n = rng.randint(1, max_items)
        batch.append(Instance.from_pairs((size, size) for size in (_random_size(rng) for _ in range(n))))
    return batch


def worthless_reservation_batch(seed: int, count: int, max_items: int, alpha) -> List[Instance]:
    """Instances of items ``(s, alpha*s)``: under size costs a reservation eats the item's whole value."""
    alpha = to_rat(alpha)
    rng = random.Random(seed)
    batch = []
    for _ in range(count):
        n = rng.randint(1, max_items)
        batch.append(Instance.from_pairs((size, alpha * size) for size in (_random_size(rng) for _ in range(n))))
    return batch
