"""
Adaptive lower-bound adversaries and the game loop that plays them.

The size adversary offers items just above half the knapsack with a large
value ``C`` and punishes packing, rejecting and endless reserving in turn. The
value adversary offers a chain ``x_k = (1 - k*eps1, v_k)`` with values growing
by the factors of ``factor_schedule``; once the policy lets a chain item go it
offers a small complementary item ``y`` worth ``v_{k-1}``.

Both adversaries are incremental objects (``next_item`` / ``observe``); the
functional ``next_item_*`` entry points replay a decision history through
them.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Optional, Tuple, Union
import logging
import math

import bounds
from models import (
    ConfigError,
    CostKind,
    INFINITE,
    InvalidHistory,
    Item,
    ModeMismatch,
    ONE,
    RatioValue,
    ZERO,
    optional_rat,
    ratio,
    to_rat,
)
from offline_solver import optimal_packing
from policies import Decision, PolicyConfig, Trace, check_mode, finish, initial_state, step

GRID = Fraction(1, bounds.RAT_PRECISION)


class Termination(Enum):
    REJECTED_EARLY = "RejectedEarly"
    TOOK_BAIT = "TookBait"
    RESERVATION_BUDGET_EXHAUSTED = "ReservationBudgetExhausted"
    SCHEDULE_CONVERGED = "ScheduleConverged"
    COPIES_EXHAUSTED = "CopiesExhausted"


@dataclass(frozen=True, slots=True)
class SizeAdversaryConfig:
    """Parameters of the size-cost game: probe offset ``epsilon``, item value ``C`` and the slack ``beta``."""

    epsilon: Fraction = Fraction(1, 100)
    C: Fraction = Fraction(10**6)
    beta: Fraction = Fraction(10)

    def __post_init__(self):
        for name in ("epsilon", "C", "beta"):
            object.__setattr__(self, name, to_rat(getattr(self, name)))
        if not 0 < self.epsilon < Fraction(1, 2):
            raise ConfigError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.beta < 0:
            raise ConfigError(f"beta must be non-negative, got {self.beta}")
        if self.C <= 2 * self.beta:
            raise ConfigError(f"C must exceed 2*beta, got C={self.C} beta={self.beta}")


@dataclass(frozen=True, slots=True)
class ValueAdversaryConfig:
    """
    Parameters of the value-cost game.

    ``limit`` is the value the growth factors decay toward; ``None`` means the
    optimal factor ``f_star(alpha)``. ``eps3`` only feeds the reported series
    bound.
    """

    eps1: Fraction
    eps2: Fraction
    N: int
    f1: Fraction
    rho: Fraction
    max_rounds: int
    limit: Optional[Fraction] = ONE
    eps3: Fraction = ZERO

    def __post_init__(self):
        for name in ("eps1", "eps2", "f1", "rho", "eps3"):
            object.__setattr__(self, name, to_rat(getattr(self, name)))
        object.__setattr__(self, "limit", optional_rat(self.limit))
        if self.N < 1:
            raise ConfigError(f"N must be at least 1, got {self.N}")
        if self.max_rounds < 1:
            raise ConfigError(f"max_rounds must be at least 1, got {self.max_rounds}")
        if not 0 < self.eps2 < 1:
            raise ConfigError(f"eps2 must lie in (0, 1), got {self.eps2}")
        if not 0 < self.rho < 1:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho}")
        if self.rho**self.N < 1 - self.eps2:
            raise ConfigError(f"rho**N must be at least 1 - eps2 (rho={self.rho}, N={self.N})")
        if self.eps1 <= 0 or self.eps1 * self.max_rounds >= Fraction(1, 2):
            raise ConfigError(f"eps1 must be positive with eps1 * max_rounds < 1/2, got {self.eps1}")
        if self.limit is not None and not 0 <= self.limit < self.f1:
            raise ConfigError(f"limit must lie in [0, f1), got {self.limit}")
        if self.eps3 < 0:
            raise ConfigError(f"eps3 must be non-negative, got {self.eps3}")

    def check_target(self, alpha) -> None:
        """Raise ConfigError unless ``f1`` beats the lower bound at ``alpha`` by the factor ``1 + eps2``."""
        lb = bounds.lb_value(float(alpha))
        if not math.isfinite(lb):
            raise ConfigError(f"value adversary needs alpha < 1/2, got {alpha}")
        if self.f1 < Fraction(lb) * (1 + self.eps2):
            raise ConfigError(f"f1={self.f1} is below lb(alpha)*(1+eps2)")

    @staticmethod
    def copies_cap(alpha) -> int:
        """Number of copies of ``y`` presented before the game gives up."""
        return math.ceil(bounds.lb_value(float(alpha))) + 1

    def limit_for(self, alpha) -> Fraction:
        if self.limit is not None:
            return self.limit
        return bounds.rat_floor(bounds.f_star(float(alpha)))

    @classmethod
    def for_alpha(
        cls,
        alpha,
        n: int = 25,
        eps2=Fraction(1, 20),
        eps3=ZERO,
        toward_optimal_factor: bool = False,
        max_rounds: Optional[int] = None,
    ) -> "ValueAdversaryConfig":
        """Derive a consistent parameter set for ``alpha`` and ``n`` rounds of patience."""
        alpha_float = float(to_rat(alpha))
        eps2 = to_rat(eps2)
        lb = bounds.lb_value(alpha_float) if alpha_float >= 0 else INFINITE
        if not math.isfinite(lb):
            raise ConfigError(f"value adversary needs 0 <= alpha < 1/2, got {alpha}")
        if n < 1:
            raise ConfigError(f"N must be at least 1, got {n}")
        if not 0 < eps2 < 1:
            raise ConfigError(f"eps2 must lie in (0, 1), got {eps2}")

        f1 = bounds.rat_ceil(Fraction(lb) * (1 + eps2)) + GRID
        rho = bounds.rat_ceil((1 - float(eps2)) ** (1 / n))
        while rho**n < 1 - eps2:
            rho += GRID
        if rho >= 1:
            raise ConfigError(f"eps2={eps2} is too small for N={n} at the rational grid")

        limit = bounds.rat_floor(bounds.f_star(alpha_float)) if toward_optimal_factor else ONE
        if max_rounds is None:
            if limit < 1 + eps2:
                # First k with (f1 - limit) * rho**k < 1 + eps2 - limit, plus headroom for rounding.
                span = float(1 + eps2 - limit) / float(f1 - limit)
                max_rounds = math.ceil(math.log(span) / math.log(float(rho))) + 2
            else:
                max_rounds = 40 * n
        eps1 = Fraction(1, (cls.copies_cap(alpha_float) + 2) * (max_rounds + 1))
        config = cls(
            eps1=eps1,
            eps2=eps2,
            N=n,
            f1=f1,
            rho=rho,
            max_rounds=max_rounds,
            limit=limit,
            eps3=to_rat(eps3),
        )
        logging.debug(f"Value adversary for alpha={alpha}: f1={float(f1):.6f} rho={float(rho):.9f} rounds={max_rounds}")
        return config


@lru_cache(maxsize=64)
def _schedule(config: ValueAdversaryConfig, alpha: Fraction) -> Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]:
    """Growth factors f_0..f_max and chain values v_0..v_max, on the 1e-12 grid."""
    limit = config.limit_for(alpha)
    factors: List[Fraction] = [ONE]
    values: List[Fraction] = [ONE]
    power = ONE
    for _ in range(config.max_rounds):
        power = bounds.rat_floor(power * config.rho)
        factor = bounds.rat_floor(limit + (config.f1 - limit) * power)
        factors.append(factor)
        values.append(bounds.rat_floor(values[-1] * factor))
    return tuple(factors), tuple(values)


def factor_schedule(k: int, config: ValueAdversaryConfig, alpha) -> Fraction:
    """Growth factor ``f_k`` of the value chain; ``f_0`` is 1."""
    if k < 0:
        raise ValueError("k must be a natural number")
    alpha = to_rat(alpha)
    factors, _ = _schedule(config, alpha)
    if k < len(factors):
        return factors[k]
    limit = config.limit_for(alpha)
    power = ONE
    for _ in range(k):
        power = bounds.rat_floor(power * config.rho)
    return bounds.rat_floor(limit + (config.f1 - limit) * power)


def chain_value(k: int, config: ValueAdversaryConfig, alpha) -> Fraction:
    """Value ``v_k`` of the k-th chain item, for ``k <= max_rounds``."""
    _, values = _schedule(config, to_rat(alpha))
    return values[k]


class _Adversary:
    """Shared bookkeeping: one pending item at a time, checked against the decision that answers it."""

    def __init__(self):
        self.termination: Optional[Termination] = None
        self.emitted = 0
        self._pending: Optional[Item] = None

    @property
    def finished(self) -> bool:
        return self.termination is not None

    def next_item(self) -> Optional[Item]:
        if self.termination is not None:
            return None
        if self._pending is None:
            self._pending = self._make_item(self.emitted)
        return self._pending

    def observe(self, item: Item, decision: Decision) -> None:
        if self.termination is not None:
            raise InvalidHistory(f"game already ended ({self.termination.value}) before item {item}")
        expected = self.next_item()
        if item != expected:
            raise InvalidHistory(f"expected {expected}, history has {item}")
        if not isinstance(decision, Decision):
            raise InvalidHistory(f"not a decision: {decision!r}")
        self._pending = None
        self.emitted += 1
        self._advance(item, decision)

    def _end(self, termination: Termination) -> None:
        self.termination = termination

    def _make_item(self, index: int) -> Item:
        raise NotImplementedError

    def _advance(self, item: Item, decision: Decision) -> None:
        raise NotImplementedError


class SizeAdversary(_Adversary):
    PROBE, BAIT, COMPLEMENT = "probe", "bait", "complement"

    def __init__(self, config: SizeAdversaryConfig, alpha):
        super().__init__()
        self.config = config
        self.alpha = to_rat(alpha)
        if self.alpha <= 0:
            raise ConfigError("the size game needs alpha > 0 to reach its reservation budget")
        self.probe = 1
        self.phase = self.PROBE
        self.spent = ZERO

    def _make_item(self, index: int) -> Item:
        half = Fraction(1, 2)
        offset = self.config.epsilon**self.probe
        if self.phase == self.PROBE:
            return Item(half + offset, self.config.C, index)
        if self.phase == self.BAIT:
            return Item(ONE, 3 * self.config.C, index)
        return Item(half - offset, self.config.C, index)

    def _advance(self, item: Item, decision: Decision) -> None:
        if self.phase == self.PROBE:
            if decision is Decision.RESERVE:
                self.spent += self.alpha * item.size
                if self.spent >= self.config.C:
                    self._end(Termination.RESERVATION_BUDGET_EXHAUSTED)
                else:
                    self.probe += 1
            elif decision is Decision.PACK:
                self.phase = self.BAIT
            elif self.probe == 1:
                self._end(Termination.REJECTED_EARLY)
            else:
                self.phase = self.COMPLEMENT
        elif self.phase == self.BAIT:
            self._end(Termination.TOOK_BAIT)
        else:
            self._end(Termination.REJECTED_EARLY)


class ValueAdversary(_Adversary):
    def __init__(self, config: ValueAdversaryConfig, alpha):
        super().__init__()
        self.config = config
        self.alpha = to_rat(alpha)
        config.check_target(self.alpha)
        self.copies_cap = config.copies_cap(self.alpha)
        self.factors, self.values = _schedule(config, self.alpha)
        self.round = 0
        self.rejected_round: Optional[int] = None
        self.copies_presented = 0

    def _make_item(self, index: int) -> Item:
        if self.rejected_round is None:
            k = self.round
            return Item(1 - k * self.config.eps1, self.values[k], index)
        k = self.rejected_round
        return Item(k * self.config.eps1, self.values[k - 1], index)

    def _advance(self, item: Item, decision: Decision) -> None:
        reserved = decision is Decision.RESERVE
        if self.rejected_round is not None:
            self.copies_presented += 1
            if reserved:
                self._end(Termination.TOOK_BAIT)
            elif self.copies_presented >= self.copies_cap:
                self._end(Termination.COPIES_EXHAUSTED)
            return

        k = self.round
        if reserved:
            converged = k >= 1 and self.factors[k] < 1 + self.config.eps2
            if converged or k >= self.config.max_rounds:
                self._end(Termination.SCHEDULE_CONVERGED)
            else:
                self.round += 1
        elif k < self.config.N:
            self._end(Termination.REJECTED_EARLY)
        else:
            self.rejected_round = k

    def realized_parameters(self) -> Optional[Tuple[Fraction, Fraction]]:
        """``(f_k, v_{k-N} / v_{k-1})`` at the rejected round, if the chain was broken after round N."""
        k = self.rejected_round
        if k is None:
            return None
        return self.factors[k], self.values[k - self.config.N] / self.values[k - 1]


def _replay(adversary: _Adversary, history: Iterable[Tuple[Item, Decision]]) -> Optional[Item]:
    for item, decision in history:
        adversary.observe(item, decision)
    return adversary.next_item()


def next_item_size_lb(config: SizeAdversaryConfig, history, alpha) -> Optional[Item]:
    """Next item of the size game after ``history``, or ``None`` when the game is over."""
    return _replay(SizeAdversary(config, alpha), history)


def next_item_value_lb(config: ValueAdversaryConfig, history, alpha) -> Optional[Item]:
    """Next item of the value game after ``history``, or ``None`` when the game is over."""
    return _replay(ValueAdversary(config, alpha), history)


@dataclass(frozen=True, slots=True)
class GameResult:
    """Outcome of one adversary-versus-policy game."""

    trace: Trace
    opt_value: Fraction
    forced_ratio: RatioValue
    termination: Termination
    beta: Fraction = ZERO
    items_emitted: int = 0
    rejected_round: Optional[int] = None
    factor_at_rejection: Optional[Fraction] = None
    tail_ratio: Optional[Fraction] = None

    @property
    def unbounded(self) -> bool:
        return self.forced_ratio == INFINITE


AdversaryConfig = Union[SizeAdversaryConfig, ValueAdversaryConfig]


def play(adversary_config: AdversaryConfig, policy_config: PolicyConfig) -> GameResult:
    """Alternate adversary items and policy decisions until the adversary stops."""
    check_mode(policy_config)
    mode = policy_config.mode
    if isinstance(adversary_config, SizeAdversaryConfig):
        if mode.kind is not CostKind.SIZE:
            raise ModeMismatch("the size adversary plays size-mode policies")
        adversary: _Adversary = SizeAdversary(adversary_config, mode.alpha)
        beta = adversary_config.beta
    elif isinstance(adversary_config, ValueAdversaryConfig):
        if mode.kind is not CostKind.VALUE:
            raise ModeMismatch("the value adversary plays value-mode policies")
        adversary = ValueAdversary(adversary_config, mode.alpha)
        beta = ZERO
    else:
        raise ConfigError(f"unknown adversary configuration {adversary_config!r}")

    state = initial_state(policy_config)
    emitted: List[Item] = []
    while (item := adversary.next_item()) is not None:
        state, decision = step(state, item)
        adversary.observe(item, decision)
        emitted.append(item)

    trace = finish(state)
    opt = optimal_packing(emitted, ONE)
    forced = ratio(opt.total_value, trace.report.net_gain, beta)

    realized = adversary.realized_parameters() if isinstance(adversary, ValueAdversary) else None
    logging.info(
        f"{policy_config.policy_kind.value} vs {mode.kind.value} adversary: "
        f"{adversary.termination.value} after {len(emitted)} items, forced ratio {float(forced):.6g}"
    )
    return GameResult(
        trace=trace,
        opt_value=opt.total_value,
        forced_ratio=forced,
        termination=adversary.termination,
        beta=beta,
        items_emitted=len(emitted),
        rejected_round=getattr(adversary, "rejected_round", None),
        factor_at_rejection=realized[0] if realized else None,
        tail_ratio=realized[1] if realized else None,
    )
