import math
from fractions import Fraction

import pytest

import bounds


def test_ub_value_examples():
    assert bounds.ub_value(1e-9, 3.0) == pytest.approx(6.0, rel=1e-6)
    assert bounds.ub_value(0.25, 5.449490) == pytest.approx(39.596, abs=0.01)
    assert bounds.ub_value(0.25, 2.0) == math.inf
    assert bounds.ub_value(0.1, 1.0) == math.inf


def test_c_star_examples():
    assert bounds.c_star(1e-9) == pytest.approx(1.0, abs=1e-3)
    assert bounds.c_star(0.25) == pytest.approx(5.449490, abs=1e-5)
    assert bounds.c_star(0.4) == pytest.approx(17.485, abs=0.01)
    assert bounds.c_star(0.5) == math.inf


def test_ub_value_opt_examples():
    assert bounds.ub_value_opt(1e-6) == pytest.approx(2.0, abs=0.01)
    assert bounds.ub_value_opt(0.25) == pytest.approx(39.596, abs=0.01)
    assert bounds.ub_value_opt(0.5) == math.inf
    assert bounds.ub_value_opt(0.495) > 1000


def test_lb_value_examples():
    assert bounds.lb_value(1e-6) == pytest.approx(2.0, abs=0.01)
    assert bounds.lb_value(0.25) == pytest.approx(10.472136, abs=1e-5)
    assert bounds.lb_value(0.1) == pytest.approx(4.101, abs=0.01)
    assert bounds.lb_value(0.495) > 1000


def test_f_star_examples():
    assert bounds.f_star(0.25) == pytest.approx(2.618034, abs=1e-6)
    assert bounds.f_star(0.1) == pytest.approx(1.640, abs=0.01)


def test_closed_form_matches_ub_at_c_star():
    for alpha in bounds.ALPHA_GRID:
        assert bounds.ub_value(alpha, bounds.c_star(alpha)) == pytest.approx(bounds.ub_value_opt(alpha), rel=1e-9)


def test_c_star_minimizes_ub():
    for alpha in (0.05, 0.1, 0.25, 0.4):
        best = bounds.ub_value_opt(alpha)
        c = bounds.c_star(alpha)
        for factor in (0.9, 0.99, 1.01, 1.1):
            assert bounds.ub_value(alpha, c * factor) >= best * (1 - 1e-12)


def test_curve_is_ordered_and_increasing():
    curve = bounds.bound_curve()
    assert len(curve) == 99
    assert curve[0].alpha == 0.005
    assert curve[-1].alpha == 0.495
    for point in curve:
        assert point.lb <= point.ub_opt
        assert point.c_star > 1
        assert point.f_star > 1
    for before, after in zip(curve, curve[1:]):
        assert after.lb > before.lb
        assert after.ub_opt > before.ub_opt


def test_first_curve_point():
    point = bounds.bound_point(0.005)
    assert point.lb == pytest.approx(2.234, abs=0.01)
    assert point.ub_opt == pytest.approx(2.682, abs=0.01)


def test_size_bounds():
    assert bounds.size_bounds() == (2, 2)
    assert bounds.size_bounds(0.3) == (2, 2)
    assert bounds.size_bounds(0) == (math.inf, math.inf)


def test_series_bound_matches_lower_bound_at_f_star():
    for alpha in (0.1, 0.25):
        assert bounds.series_bound(alpha, bounds.f_star(alpha)) == pytest.approx(bounds.lb_value(alpha), rel=1e-6)
    assert bounds.series_bound(0.1, 1.0) == math.inf


def test_finite_n_bound_approaches_series_bound():
    alpha, f = 0.1, bounds.f_star(0.1)
    tail = f ** -(200 - 1)
    assert bounds.finite_n_bound(alpha, f, tail, 200) == pytest.approx(bounds.series_bound(alpha, f), rel=1e-6)
    assert bounds.finite_n_bound(alpha, 1.0, 1.0, 5) == math.inf


def test_rational_rounding_helpers():
    assert bounds.rat_floor(0.1) <= Fraction(1, 10) <= bounds.rat_ceil(0.1)
    assert bounds.rat_ceil(0.1) - bounds.rat_floor(0.1) <= Fraction(1, bounds.RAT_PRECISION)
    assert bounds.rat_floor(2.5) == Fraction(5, 2)
    assert bounds.round_up_relative(4.0) > 4
