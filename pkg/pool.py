"""
The densest reserved pool ``R_s``.

The pool keeps the densest reserved items whose total size is at least 1 and
trims the least dense ones while the rest still fills the knapsack. Items
trimmed from the pool stay reserved and are kept in ``evicted``.
"""

from fractions import Fraction
from typing import Iterable, Optional, Tuple

from sortedcontainers import SortedKeyList

from models import Item, ZERO, density


def order_key(item: Item):
    """Densest first; on equal density the later arrival counts as less dense."""
    return (-density(item), item.arrival_index)


class Pool:
    """Value-semantics container for ``R_s``; ``insert`` returns a new pool."""

    __slots__ = ("_entries", "_total_size", "_evicted")

    def __init__(self, entries: Iterable[Item] = (), evicted: Iterable[Item] = ()):
        self._entries = SortedKeyList(entries, key=order_key)
        self._total_size = sum((item.size for item in self._entries), ZERO)
        self._evicted = tuple(evicted)

    @property
    def entries(self) -> Tuple[Item, ...]:
        return tuple(self._entries)

    @property
    def evicted(self) -> Tuple[Item, ...]:
        return self._evicted

    @property
    def total_size(self) -> Fraction:
        return self._total_size

    @property
    def total_value(self) -> Fraction:
        return sum((item.value for item in self._entries), ZERO)

    @property
    def least_dense(self) -> Optional[Item]:
        return self._entries[-1] if self._entries else None

    @property
    def d_delta(self) -> Fraction:
        least = self.least_dense
        return density(least) if least is not None else ZERO

    @property
    def is_full(self) -> bool:
        return self._total_size >= 1

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pool):
            return NotImplemented
        return self.entries == other.entries and self._evicted == other._evicted

    def __repr__(self) -> str:
        return f"Pool(entries={list(self._entries)!r}, evicted={list(self._evicted)!r})"

    def insert(self, item: Item) -> "Pool":
        """Add ``item`` and evict least dense entries while the remainder stays at size 1 or more."""
        new = Pool.__new__(Pool)
        new._entries = self._entries.copy()
        new._entries.add(item)
        total = self._total_size + item.size
        evicted = list(self._evicted)
        while len(new._entries) > 1 and total - new._entries[-1].size >= 1:
            least = new._entries.pop()
            total -= least.size
            evicted.append(least)
        new._total_size = total
        new._evicted = tuple(evicted)
        return new


def insert(pool: Pool, item: Item) -> Pool:
    return pool.insert(item)


def d_delta(pool: Pool) -> Fraction:
    """Density of the least dense entry, 0 for an empty pool."""
    return pool.d_delta


def pool_size(pool: Pool) -> Fraction:
    return pool.total_size
