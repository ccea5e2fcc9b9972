import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delone import fixtures
from delone.analysis import (Box, denseness_scan, denseness_trend, digit_equidiscreteness,
                             discreteness_scan, discreteness_trend, growth_counter,
                             nested_windows, stabilizes)
from delone.cycles import generate, solution_window
from delone.errors import StateError, WindowTooSmall
from delone.multiset import Multiset, MultisetFamily

F = Fraction


def brute_sup_count(xs, ms, r):
    """Max weight in an open interval of length 2r, trying every left end just above a point."""
    best = 0
    for a in xs:
        for lo in (a - 2 * r + 1e-12, a - 1e-12):
            best = max(best, sum(m for x, m in zip(xs, ms) if lo < x < lo + 2 * r))
    return best


def test_integers_are_uniformly_discrete_and_dense():
    Z = Multiset.from_values(range(-20, 21))
    assert discreteness_scan(Z, 0.4).max_count_per_ball == 1
    assert discreteness_scan(Z, 0.6).max_count_per_ball == 2
    rep = denseness_scan(Z, Box.interval(-10, 10))
    assert rep.R_cov == 0.5 and rep.exact


def test_two_cosets():
    X = Multiset.from_values([F(k) - F(3, 8) for k in range(-12, 13)] + [F(k) - F(1, 8) for k in range(-12, 13)])
    assert discreteness_scan(X, 0.1).max_count_per_ball == 1
    assert discreteness_scan(X, 0.2).max_count_per_ball == 2
    assert denseness_scan(X, Box.interval(-10, 10)).R_cov == pytest.approx(0.375)


def test_window_edges_use_outside_points():
    X = Multiset.from_values([-1, 1])
    assert denseness_scan(X, Box.interval(-0.5, 0.5)).R_cov == pytest.approx(1.0)
    assert denseness_scan(X, Box.interval(0.9, 1.1)).R_cov == pytest.approx(0.1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=15),
       st.lists(st.integers(1, 3), min_size=15, max_size=15),
       st.sampled_from([0.5, 1.0, 2.5, 7.0]))
def test_one_dimensional_sup_matches_brute_force(xs, ms, r):
    xs = sorted(set(xs))
    ms = ms[:len(xs)]
    X = Multiset.from_values(xs, multiplicities=ms)
    rep = discreteness_scan(X, r)
    assert rep.exact_sup
    assert rep.max_count_per_ball == brute_sup_count(xs, ms, r)
    assert rep.data_centered_max <= rep.max_count_per_ball <= rep.data_centered_max_2r


def test_multiplicity_counts_in_balls():
    X = Multiset.from_values([0, 0, 0, 5])
    rep = discreteness_scan(X, 0.1)
    assert rep.max_count_per_ball == 3 and not rep.uniformly_discrete


def test_planar_lattice():
    pts = [(a, b) for a in range(-6, 7) for b in range(-6, 7)]
    X = Multiset.from_values(pts)
    rep = discreteness_scan(X, 0.45)
    assert rep.max_count_per_ball == 1 and not rep.exact_sup
    dens = denseness_scan(X, Box.parse("-3,3,-3,3"), resolution=0.05)
    assert abs(dens.R_cov - math.sqrt(0.5)) < 0.05


def test_empty_inputs():
    rep = denseness_scan(Multiset(), Box.interval(0, 1))
    assert rep.empty and rep.R_cov == math.inf
    assert discreteness_scan(Multiset(), 1.0).max_count_per_ball == 0


def test_box_parse():
    assert Box.parse("-3,3").dim == 1
    assert Box.parse("0,1,2,3").dim == 2
    with pytest.raises(Exception):
        Box.parse("1,2,3")


def test_trends_over_nested_windows():
    sys = fixtures.balanced_ternary()
    run = solution_window(sys, MultisetFamily.from_values([[0]]), 40)
    X = run.frontier[0]
    ws = nested_windows(30, 1)
    assert discreteness_trend(X, 0.4, ws) == [1, 1, 1, 1]
    assert stabilizes(denseness_trend(X, ws))
    assert not stabilizes([1, 2, 3])


def test_growth_counter_counts_integer_half_line():
    sys = fixtures.binary()
    run = solution_window(sys, MultisetFamily.from_values([[0]]), 2**7 + 1)
    g = growth_counter(sys, run, 6)
    assert list(g.M[0]) == [2 ** k + 1 for k in range(7)]
    assert g.lambda_S == pytest.approx(2) and g.det_A_abs == 2
    with pytest.raises(WindowTooSmall):
        growth_counter(sys, run, 12)
    with pytest.raises(StateError):
        growth_counter(sys, generate(sys, MultisetFamily.from_values([[0]]), 3), 2)


def test_digit_cells_of_overlapping_ternary():
    rep = digit_equidiscreteness(fixtures.ternary_overlap(), 3)
    by_m = {r.m: r for r in rep}
    assert by_m[1].is_ordinary and by_m[1].size == 4
    assert not by_m[2].is_ordinary and by_m[2].size == 16
    assert all(r.max_per_ball >= 1 for r in rep)


def test_digit_cells_of_balanced_ternary_stay_ordinary():
    rep = digit_equidiscreteness(fixtures.balanced_ternary(), 4, r=0.5)
    assert all(r.is_ordinary and r.min_separation == pytest.approx(1.0) and r.max_per_ball == 1
               for r in rep)


def test_scan_on_float_family():
    sys = fixtures.ternary_pi()
    run = generate(sys, MultisetFamily.from_values([[0.0]], sys.mode), 4)
    rep = discreteness_scan(run.frontier[0], 0.4)
    assert rep.max_count_per_ball >= 1
    assert np.isfinite(denseness_scan(run.frontier[0], Box.interval(0, 20)).R_cov)
