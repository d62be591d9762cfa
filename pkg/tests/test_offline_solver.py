import random
import time
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from instance_generator import random_batch
from models import Item, TooLarge
from offline_solver import BRUTE_FORCE_LIMIT, brute_force, fractional_bound, optimal_packing


def _items(*pairs):
    return [Item(F(size), F(value), i) for i, (size, value) in enumerate(pairs)]


def _random_items(rng, n):
    items = []
    for i in range(n):
        size = F(rng.randint(1, 100), 100)
        value = F(rng.randint(0, 200), 50)
        items.append(Item(size, value, i))
    return items


def test_three_item_example():
    items = _items(("0.6", "1.2"), ("0.5", "0.5"), ("0.4", "1.2"))
    solution = optimal_packing(items, 1)
    assert solution.total_value == F(12, 5)
    assert solution.indices == (0, 2)
    assert brute_force(items, 1).total_value == F(12, 5)


def test_empty_and_single():
    assert optimal_packing([], 1).total_value == 0
    assert optimal_packing([], 1).chosen == frozenset()
    assert optimal_packing(_items((1, 3)), 1).total_value == 3


def test_equal_halves():
    items = _items(("0.5", 1), ("0.5", 1), ("0.5", 1))
    assert brute_force(items, 1).total_value == 2
    assert optimal_packing(items, 1).indices == (0, 1)
    assert brute_force(items, 1).indices == (0, 1)


def test_twenty_unit_items_pick_the_best_singleton():
    rng = random.Random(7)
    values = rng.sample(range(1, 1000), BRUTE_FORCE_LIMIT)
    items = [Item(1, v, i) for i, v in enumerate(values)]
    solution = brute_force(items, 1)
    assert solution.total_value == max(values)
    assert len(solution.chosen) == 1
    assert optimal_packing(items, 1) == solution


def test_brute_force_limit():
    items = [Item(F(1, 2), 1, i) for i in range(BRUTE_FORCE_LIMIT + 1)]
    with pytest.raises(TooLarge):
        brute_force(items, 1)


def test_items_larger_than_capacity_are_skipped():
    items = _items((1, 100), ("0.3", 1), ("0.2", 1))
    solution = optimal_packing(items, F(1, 2))
    assert solution.indices == (1, 2)
    assert optimal_packing(items, 0).total_value == 0


def test_negative_capacity_rejected():
    with pytest.raises(ValueError):
        optimal_packing(_items(("0.5", 1)), -1)


def test_fractional_bound_splits_one_item():
    items = _items(("0.5", 2), ("0.5", 1), ("0.5", "0.4"))
    assert fractional_bound(items, F(3, 4)) == 2 + F(1, 2)
    assert fractional_bound(items, 10) == F(17, 5)


def test_agrees_with_brute_force_on_random_batch():
    rng = random.Random(2024)
    for _ in range(200):
        items = _random_items(rng, rng.randint(0, 12))
        capacity = F(rng.randint(0, 120), 100)
        expected = brute_force(items, capacity)
        actual = optimal_packing(items, capacity)
        assert actual.total_value == expected.total_value
        assert actual.indices == expected.indices
        assert actual.total_size <= capacity


def test_agrees_with_brute_force_on_generated_instances():
    for instance in random_batch(16, 500, 16, F(1, 10), 2):
        assert optimal_packing(instance.items, 1) == brute_force(instance.items, 1)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.fractions(min_value=F(1, 20), max_value=1, max_denominator=20),
            st.fractions(min_value=0, max_value=5, max_denominator=10),
        ),
        max_size=10,
    )
)
def test_optimal_value_is_below_fractional_bound(pairs):
    items = [Item(size, value, i) for i, (size, value) in enumerate(pairs)]
    solution = optimal_packing(items, 1)
    assert solution.total_value <= fractional_bound(items, 1)
    assert solution.total_value == brute_force(items, 1).total_value


one_item = st.tuples(
    st.fractions(min_value=F(1, 20), max_value=1, max_denominator=20),
    st.fractions(min_value=0, max_value=5, max_denominator=10),
)
item_lists = st.lists(one_item, max_size=10)


@settings(max_examples=60, deadline=None)
@given(item_lists, one_item)
def test_adding_an_item_never_lowers_the_optimum(pairs, extra):
    items = [Item(size, value, i) for i, (size, value) in enumerate(pairs)]
    grown = items + [Item(extra[0], extra[1], len(items))]
    assert optimal_packing(grown, 1).total_value >= optimal_packing(items, 1).total_value


@settings(max_examples=60, deadline=None)
@given(item_lists, st.fractions(min_value=F(1, 10), max_value=10, max_denominator=10))
def test_scaling_values_scales_the_optimum(pairs, factor):
    items = [Item(size, value, i) for i, (size, value) in enumerate(pairs)]
    scaled = [Item(item.size, item.value * factor, item.arrival_index) for item in items]
    original = optimal_packing(items, 1)
    assert optimal_packing(scaled, 1).total_value == original.total_value * factor


def _timed(items):
    started = time.perf_counter()
    solution = optimal_packing(items, 1)
    return solution, time.perf_counter() - started


def test_many_worthless_items_solve_quickly():
    solution, elapsed = _timed([Item(F(1, 100), 0, i) for i in range(40)])
    assert solution.total_value == 0
    assert solution.chosen == frozenset()
    assert elapsed < 5


def test_many_unit_density_items_solve_quickly():
    rng = random.Random(28)
    items = [Item(size, size, i) for i, size in enumerate(F(rng.randint(1, 10), 100) for _ in range(40))]
    solution, elapsed = _timed(items)
    assert solution.total_value == 1
    assert solution.total_size == 1
    assert elapsed < 5


def test_equal_items_that_cannot_fill_the_knapsack():
    items = [Item(F(3, 10), F(3, 10), i) for i in range(40)]
    solution, elapsed = _timed(items)
    assert solution.indices == (0, 1, 2)
    assert solution.total_value == F(9, 10)
    assert elapsed < 5


def test_zero_value_item_joins_the_tie_break():
    items = _items(("0.5", 0), ("0.5", 1))
    assert optimal_packing(items, 1).indices == (0, 1)
    assert brute_force(items, 1).indices == (0, 1)
