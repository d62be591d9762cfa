"""
Closed-form competitive-ratio bounds for the value-cost model.

These are float evaluations (square roots make exact rationals unusable).
The helpers at the bottom convert floats to rationals on a fixed grid for the
places where a bound feeds an exact comparison or the adversary schedule.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple
import math

INFINITE = math.inf

# Grid of alpha values used for the bound curves: 0.005, 0.010, ..., 0.495.
ALPHA_GRID: Tuple[float, ...] = tuple(i / 200 for i in range(1, 100))

RAT_PRECISION = 10**12
RELATIVE_SLACK = Fraction(1, 10**9)


@dataclass(frozen=True, slots=True)
class BoundPoint:
    """One sample of the bound curves."""

    alpha: float
    lb: float
    ub_opt: float
    c_star: float
    f_star: float


def ub_value(alpha: float, c: float) -> float:
    """Guaranteed strict ratio of the value-cost threshold policy with factor ``c``."""
    if c <= 1:
        return INFINITE
    denominator = 1 - alpha * (4 / (1 - 1 / c) - 2)
    if denominator <= 0:
        return INFINITE
    return 2 * c / denominator


def c_star(alpha: float) -> float:
    """Threshold factor minimizing ``ub_value`` for a given alpha."""
    if alpha >= 0.5:
        return INFINITE
    return (2 * math.sqrt(2 * alpha**2 + alpha) + 2 * alpha + 1) / (1 - 2 * alpha)


def ub_value_opt(alpha: float) -> float:
    """``ub_value`` evaluated at ``c_star``, in closed form."""
    if alpha >= 0.5:
        return INFINITE
    if alpha <= 0:
        return 2.0
    root = math.sqrt(alpha * (1 + 2 * alpha))
    return 2 * (2 * alpha + root) * (1 + 2 * alpha + 2 * root) / ((1 - 2 * alpha) ** 2 * root)


def lb_value(alpha: float) -> float:
    """Ratio no deterministic policy can beat under value-proportional costs."""
    if alpha >= 0.5:
        return INFINITE
    return 2 * (1 - alpha + math.sqrt((2 - 3 * alpha) * alpha)) / (1 - 2 * alpha) ** 2


def f_star(alpha: float) -> float:
    """Growth factor of the lower-bound item chain that minimizes the achievable ratio."""
    if alpha >= 0.5:
        return INFINITE
    return (1 - alpha + math.sqrt(2 * alpha - 3 * alpha**2)) / (1 - 2 * alpha)


def size_bounds(alpha: float = None) -> Tuple[float, float]:
    """Matching lower and upper bound for size-proportional costs.

    Without reservation costs (alpha = 0) the problem is the classic online
    knapsack, which has no bounded ratio.
    """
    if alpha is not None and alpha <= 0:
        return (INFINITE, INFINITE)
    return (2, 2)


def finite_n_bound(alpha: float, f_k: float, tail_ratio: float, n: int) -> float:
    """
    Ratio forced by the value adversary at finite scale.

    ``f_k`` is the growth factor at the rejected round, ``tail_ratio`` the
    realized ``v_{k-N} / v_{k-1}`` and ``n`` the number of rounds the chain
    had to run before a rejection counted.
    """
    if f_k <= 1:
        return INFINITE
    geometric = (1 - f_k**n) / (1 - f_k)
    denominator = 1 - alpha - alpha * tail_ratio * geometric
    if denominator <= 0:
        return INFINITE
    return (f_k + 1) / denominator


def series_bound(alpha: float, f_k: float, eps3: float = 0.0) -> float:
    """Forced ratio when the geometric cost sum is bounded by its series limit minus ``eps3``."""
    if f_k <= 1:
        return INFINITE
    denominator = 1 - alpha - alpha * (1 / (1 - 1 / f_k) - eps3)
    if denominator <= 0:
        return INFINITE
    return (f_k + 1) / denominator


def bound_point(alpha: float) -> BoundPoint:
    return BoundPoint(
        alpha=alpha,
        lb=lb_value(alpha),
        ub_opt=ub_value_opt(alpha),
        c_star=c_star(alpha),
        f_star=f_star(alpha),
    )


def bound_curve(grid: Sequence[float] = ALPHA_GRID) -> List[BoundPoint]:
    return [bound_point(alpha) for alpha in grid]


def rat_floor(value: float, precision: int = RAT_PRECISION) -> Fraction:
    """Largest multiple of ``1/precision`` not above ``value``."""
    return Fraction(math.floor(Fraction(value) * precision), precision)


def rat_ceil(value: float, precision: int = RAT_PRECISION) -> Fraction:
    """Smallest multiple of ``1/precision`` not below ``value``."""
    return Fraction(math.ceil(Fraction(value) * precision), precision)


def round_up_relative(value: float, slack: Fraction = RELATIVE_SLACK) -> Fraction:
    """Exact rational just above a positive float bound, for strict guarantee checks."""
    return Fraction(value) * (1 + slack)
