"""
Exact 0/1 knapsack solver over rational sizes and values.

``optimal_packing`` is a depth-first branch-and-bound with the fractional
relaxation as bound, followed by a pass that rebuilds the tie-broken subset;
``brute_force`` enumerates every feasible subset and is used as a test oracle.
Both pick, among optimal subsets, the one whose sorted arrival indices are
lexicographically smallest.
"""

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple
import logging

from models import Item, TooLarge, ZERO, density, to_rat

BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True, slots=True)
class Solution:
    """An optimal packing with its exact totals."""

    chosen: FrozenSet[Item]
    total_value: Fraction
    total_size: Fraction

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(sorted(item.arrival_index for item in self.chosen))


def _solution(items: List[Item]) -> Solution:
    return Solution(
        chosen=frozenset(items),
        total_value=sum((item.value for item in items), ZERO),
        total_size=sum((item.size for item in items), ZERO),
    )


def _key(items: Iterable[Item]) -> Tuple[int, ...]:
    return tuple(sorted(item.arrival_index for item in items))


def fractional_bound(items: Iterable[Item], capacity) -> Fraction:
    """Greedy fractional relaxation: densest first, one item may be split."""
    room = to_rat(capacity)
    items = sorted(items, key=lambda item: (-density(item), item.arrival_index))
    bound = ZERO
    for item in items:
        if room <= 0:
            break
        if item.size <= room:
            bound += item.value
            room -= item.size
        else:
            bound += item.value * room / item.size
            room = ZERO
    return bound


def _max_value(order: List[Item], capacity: Fraction, target: Optional[Fraction] = None) -> Fraction:
    """
    Branch-and-bound over ``order`` (densest first) for the best value that fits ``capacity``.

    With ``target`` the search only asks whether ``target`` is reachable: it
    returns as soon as a subset worth ``target`` is found and prunes every
    node whose bound falls short of it.
    """
    n = len(order)
    sizes = [item.size for item in order]
    values = [item.value for item in order]
    prefix_size = list(accumulate(sizes, initial=ZERO))
    prefix_value = list(accumulate(values, initial=ZERO))

    def bound(start: int, room: Fraction, value: Fraction) -> Fraction:
        # Densest-first prefix of order[start:] that fits whole, then a fraction of the next item.
        limit = prefix_size[start] + room
        stop = bisect_right(prefix_size, limit, lo=start) - 1
        result = value + prefix_value[stop] - prefix_value[start]
        if stop < n:
            result += values[stop] * (limit - prefix_size[stop]) / sizes[stop]
        return result

    best = ZERO
    # (start, room) -> highest value seen there; a node reaching the same spot with no more value is dominated.
    seen: Dict[Tuple[int, Fraction], Fraction] = {}
    stack: List[Tuple[int, Fraction, Fraction]] = [(0, capacity, ZERO)]
    while stack:
        start, room, value = stack.pop()
        if value > best:
            best = value
        if target is not None and best >= target:
            break
        while start < n and sizes[start] > room:
            start += 1
        if start == n:
            continue
        key = (start, room)
        if seen.get(key, -1) >= value:
            continue
        seen[key] = value
        limit = bound(start, room, value)
        if target is None and limit <= best:
            continue
        if target is not None and limit < target:
            continue
        # Exclusion goes on the stack first so inclusion is explored first.
        stack.append((start + 1, room, value))
        stack.append((start + 1, room - sizes[start], value + values[start]))

    logging.debug(f"Branch-and-bound over {n} items visited {len(seen)} states")
    return best


def optimal_packing(items: Iterable[Item], capacity) -> Solution:
    """
    Maximum-value subset of ``items`` with total size at most ``capacity``.

    Items larger than the capacity are skipped. The optimum value comes from
    one branch-and-bound pass. The subset is then rebuilt in arrival order:
    stop as soon as the chosen items are worth the optimum, otherwise take the
    earliest later item that still leaves the optimum reachable. That yields
    the lexicographically smallest sorted index tuple whatever the search order.
    """
    capacity = to_rat(capacity)
    if capacity < 0:
        raise ValueError("capacity must be non-negative")

    order = sorted(
        (item for item in items if item.size <= capacity),
        key=lambda item: (-density(item), item.arrival_index),
    )
    optimum = _max_value(order, capacity)
    by_arrival = sorted(order, key=lambda item: item.arrival_index)

    chosen: List[Item] = []
    room, value, position = capacity, ZERO, 0
    while value < optimum:
        for offset, item in enumerate(by_arrival[position:]):
            if item.size > room:
                continue
            needed = optimum - value - item.value
            rest_room = room - item.size
            if needed > 0:
                rest = [other for other in order if other.arrival_index > item.arrival_index and other.size <= rest_room]
                if _max_value(rest, rest_room, needed) < needed:
                    continue
            chosen.append(item)
            room, value = rest_room, value + item.value
            position += offset + 1
            break
        else:
            raise AssertionError(f"no item completes the optimum {optimum}")
    return _solution(chosen)


def brute_force(items: Iterable[Item], capacity) -> Solution:
    """
    Exhaustive search over every subset that fits.

    Raises:
        TooLarge: if more than ``BRUTE_FORCE_LIMIT`` items are given.
    """
    items = list(items)
    if len(items) > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"brute force is limited to {BRUTE_FORCE_LIMIT} items, got {len(items)}")
    capacity = to_rat(capacity)

    best: List[Item] = []
    best_value = ZERO
    best_key: Tuple[int, ...] = ()
    # Supersets of an infeasible subset are infeasible, so extending only
    # feasible subsets still visits every feasible one exactly once.
    stack: List[Tuple[int, Fraction, Fraction, Tuple[Item, ...]]] = [(0, ZERO, ZERO, ())]
    while stack:
        start, size, value, chosen = stack.pop()
        if value >= best_value:
            key = _key(chosen)
            if value > best_value or key < best_key:
                best, best_value, best_key = list(chosen), value, key
        for j in range(start, len(items)):
            item = items[j]
            if size + item.size <= capacity:
                stack.append((j + 1, size + item.size, value + item.value, chosen + (item,)))
    return _solution(best)
