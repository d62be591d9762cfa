"""
Online decision procedures for the reservation knapsack.

``step_alg1`` is the size-cost threshold policy (reject items no denser than
alpha, reserve until the pool fills, then reserve only items at least ``c``
times denser than the pool's least dense entry). ``step_alg2`` is the
value-cost variant without the density floor. Three baselines exist for the
adversary games. All state is immutable; every step returns a new state.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Tuple
import logging

from models import (
    ConfigError,
    CostKind,
    GainReport,
    Instance,
    Item,
    Mode,
    ModeMismatch,
    ONE,
    ZERO,
    density,
    gain,
    reservation_cost,
    to_rat,
)
from offline_solver import optimal_packing
from pool import Pool


class PolicyKind(Enum):
    ALG1 = "alg1"
    ALG2 = "alg2"
    PACK_FIRST_FIT = "pack-first-fit"
    REJECT_ALL = "reject-all"
    RESERVE_ALL = "reserve-all"


class Decision(Enum):
    PACK = "pack"
    REJECT = "reject"
    RESERVE = "reserve"


@dataclass(frozen=True, slots=True)
class PolicyConfig:
    """Cost mode, threshold factor and which policy to run."""

    mode: Mode
    c: Fraction = Fraction(2)
    policy_kind: PolicyKind = PolicyKind.ALG2

    def __post_init__(self):
        object.__setattr__(self, "c", to_rat(self.c))
        if not isinstance(self.policy_kind, PolicyKind):
            object.__setattr__(self, "policy_kind", PolicyKind(self.policy_kind))
        if self.policy_kind is PolicyKind.ALG1 and self.c <= 1:
            raise ConfigError(f"alg1 needs c > 1, got {self.c}")
        if self.policy_kind is PolicyKind.ALG2 and self.c < 1:
            raise ConfigError(f"alg2 needs c >= 1, got {self.c}")


@dataclass(frozen=True, slots=True)
class EpochRecord:
    """One epoch of pool growth: its starting marker and what was evicted during it."""

    marker: Fraction
    evicted_size: Fraction = ZERO
    evicted_count: int = 0
    peak_evicted_density: Fraction = ZERO

    def absorb(self, evicted: Tuple[Item, ...]) -> "EpochRecord":
        positive = [item for item in evicted if item.value > 0]
        if not positive:
            return self
        return replace(
            self,
            evicted_size=self.evicted_size + sum((item.size for item in positive), ZERO),
            evicted_count=self.evicted_count + len(positive),
            peak_evicted_density=max([self.peak_evicted_density] + [density(item) for item in positive]),
        )


@dataclass(frozen=True, slots=True)
class InstrumentationLedger:
    """
    Quantities from the end of a run used by the guarantee checks.

    ``epoch_count`` counts the times the least dense density grew by a factor
    of at least ``c`` after the pool first filled. ``density_level`` is the
    smallest ``k`` with ``c**k * alpha >= d_delta_final``. ``v_c`` and ``s_c``
    are the value and size of pool entries denser than ``c * d_delta_final``.
    """

    epoch_count: int = 0
    v_c: Fraction = ZERO
    s_c: Fraction = ZERO
    d_delta_final: Fraction = ZERO
    pool_full: bool = False
    pool_value: Fraction = ZERO
    pool_size: Fraction = ZERO
    reserved_size: Fraction = ZERO
    evicted_cost: Fraction = ZERO
    density_level: int = 0
    epochs: Tuple[EpochRecord, ...] = ()

    def size_mode_floor(self, alpha) -> Fraction:
        """Lower bound on the size-mode net gain of the size-cost threshold policy."""
        alpha = to_rat(alpha)
        if not self.pool_full:
            return self.pool_value - alpha * self.reserved_size
        best = max(self.v_c, (self.v_c + (1 - self.s_c) * self.d_delta_final) / 2)
        return best - 2 * alpha * (self.density_level + 1)

    def evicted_cost_ceiling(self, alpha, c) -> Fraction:
        """Ceiling on the value-mode cost of evicted items: 3*alpha*c*d_final times a geometric sum."""
        alpha, c = to_rat(alpha), to_rat(c)
        geometric = sum((c ** (-i) for i in range(self.epoch_count + 1)), ZERO)
        return 3 * alpha * c * self.d_delta_final * geometric


@dataclass(frozen=True, slots=True)
class PolicyState:
    config: PolicyConfig
    pool: Pool = field(default_factory=Pool)
    reserved: Tuple[Item, ...] = ()
    packed_online: Tuple[Item, ...] = ()
    used_size: Fraction = ZERO
    decisions: Tuple[Tuple[Item, Decision], ...] = ()
    epochs: Tuple[EpochRecord, ...] = ()


@dataclass(frozen=True, slots=True)
class Trace:
    """Everything one online run did and earned."""

    config: PolicyConfig
    decisions: Tuple[Tuple[Item, Decision], ...]
    reserved: FrozenSet[Item]
    packed_online: FrozenSet[Item]
    final_packing: FrozenSet[Item]
    report: GainReport
    ledger: InstrumentationLedger = field(default_factory=InstrumentationLedger)

    @property
    def decision_list(self) -> Tuple[Decision, ...]:
        return tuple(decision for _, decision in self.decisions)


def initial_state(config: PolicyConfig) -> PolicyState:
    return PolicyState(config=config)


def _record(state: PolicyState, item: Item, decision: Decision, **changes) -> Tuple[PolicyState, Decision]:
    return replace(state, decisions=state.decisions + ((item, decision),), **changes), decision


def _reserve(state: PolicyState, item: Item) -> Tuple[PolicyState, Decision]:
    pool = state.pool.insert(item)
    newly_evicted = pool.evicted[len(state.pool.evicted):]
    epochs = state.epochs
    if pool.is_full:
        marker = pool.d_delta
        if not epochs:
            epochs = (EpochRecord(marker=marker),)
        elif marker > epochs[-1].marker and marker >= state.config.c * epochs[-1].marker:
            epochs = epochs + (EpochRecord(marker=marker),)
        if newly_evicted:
            epochs = epochs[:-1] + (epochs[-1].absorb(newly_evicted),)
    return _record(state, item, Decision.RESERVE, pool=pool, reserved=state.reserved + (item,), epochs=epochs)


def _reject(state: PolicyState, item: Item) -> Tuple[PolicyState, Decision]:
    return _record(state, item, Decision.REJECT)


REQUIRED_MODES = {PolicyKind.ALG1: CostKind.SIZE, PolicyKind.ALG2: CostKind.VALUE}


def check_mode(config: PolicyConfig):
    """Raise ModeMismatch when a threshold policy is paired with the other cost mode."""
    required = REQUIRED_MODES.get(config.policy_kind)
    if required is not None and config.mode.kind is not required:
        raise ModeMismatch(
            f"{config.policy_kind.value} runs in {required.value} mode, got {config.mode.kind.value}"
        )


def step_alg1(state: PolicyState, item: Item) -> Tuple[PolicyState, Decision]:
    """Size-cost threshold policy; the branches are tried in order."""
    if state.config.mode.kind is not CostKind.SIZE:
        raise ModeMismatch(f"alg1 runs in size mode, got {state.config.mode.kind.value}")
    item_density = density(item)
    if item_density <= state.config.mode.alpha:
        return _reject(state, item)
    if state.pool.total_size < 1:
        return _reserve(state, item)
    if item_density >= state.config.c * state.pool.d_delta:
        return _reserve(state, item)
    return _reject(state, item)


def step_alg2(state: PolicyState, item: Item) -> Tuple[PolicyState, Decision]:
    """Value-cost threshold policy: reserve while the pool is short or the item is dense enough."""
    if state.config.mode.kind is not CostKind.VALUE:
        raise ModeMismatch(f"alg2 runs in value mode, got {state.config.mode.kind.value}")
    if state.pool.total_size < 1:
        return _reserve(state, item)
    if density(item) >= state.config.c * state.pool.d_delta:
        return _reserve(state, item)
    return _reject(state, item)


def step_pack_first_fit(state: PolicyState, item: Item) -> Tuple[PolicyState, Decision]:
    if state.used_size + item.size <= 1:
        return _record(
            state,
            item,
            Decision.PACK,
            packed_online=state.packed_online + (item,),
            used_size=state.used_size + item.size,
        )
    return _reject(state, item)


def step_reject_all(state: PolicyState, item: Item) -> Tuple[PolicyState, Decision]:
    return _reject(state, item)


def step_reserve_all(state: PolicyState, item: Item) -> Tuple[PolicyState, Decision]:
    return _reserve(state, item)


STEP_FUNCTIONS: Dict[PolicyKind, Callable[[PolicyState, Item], Tuple[PolicyState, Decision]]] = {
    PolicyKind.ALG1: step_alg1,
    PolicyKind.ALG2: step_alg2,
    PolicyKind.PACK_FIRST_FIT: step_pack_first_fit,
    PolicyKind.REJECT_ALL: step_reject_all,
    PolicyKind.RESERVE_ALL: step_reserve_all,
}


def step(state: PolicyState, item: Item) -> Tuple[PolicyState, Decision]:
    return STEP_FUNCTIONS[state.config.policy_kind](state, item)


def finalize(state: PolicyState, reserved=None) -> FrozenSet[Item]:
    """Optimal packing of the reserved items into the room left by online packs."""
    if reserved is None:
        reserved = state.reserved
    capacity = ONE - state.used_size
    candidates = sorted(reserved, key=lambda item: item.arrival_index)
    return optimal_packing(candidates, capacity).chosen


def _density_level(alpha: Fraction, c: Fraction, d_final: Fraction) -> int:
    if alpha <= 0 or c <= 1 or d_final <= alpha:
        return 0
    level, threshold = 0, alpha
    while threshold < d_final:
        threshold *= c
        level += 1
    return level


def build_ledger(state: PolicyState) -> InstrumentationLedger:
    config = state.config
    pool = state.pool
    d_final = pool.d_delta
    dense = [item for item in pool.entries if density(item) > config.c * d_final]
    return InstrumentationLedger(
        epoch_count=max(len(state.epochs) - 1, 0),
        v_c=sum((item.value for item in dense), ZERO),
        s_c=sum((item.size for item in dense), ZERO),
        d_delta_final=d_final,
        pool_full=pool.is_full,
        pool_value=pool.total_value,
        pool_size=pool.total_size,
        reserved_size=sum((item.size for item in state.reserved), ZERO),
        evicted_cost=sum((reservation_cost(item, config.mode) for item in pool.evicted), ZERO),
        density_level=_density_level(config.mode.alpha, config.c, d_final),
        epochs=state.epochs,
    )


def finish(state: PolicyState) -> Trace:
    """Close the request sequence: pack reserved items optimally and account for the run."""
    final_packing = finalize(state)
    packed = set(final_packing) | set(state.packed_online)
    report = gain(packed, state.reserved, state.config.mode)
    return Trace(
        config=state.config,
        decisions=state.decisions,
        reserved=frozenset(state.reserved),
        packed_online=frozenset(state.packed_online),
        final_packing=final_packing,
        report=report,
        ledger=build_ledger(state),
    )


def run(config: PolicyConfig, instance: Instance) -> Trace:
    """Run a policy over a whole instance."""
    check_mode(config)
    state = initial_state(config)
    for item in instance.items:
        state, _ = step(state, item)
    trace = finish(state)
    logging.debug(
        f"{config.policy_kind.value} on {len(instance.items)} items: "
        f"{len(trace.reserved)} reserved, net gain {trace.report.net_gain}"
    )
    return trace
