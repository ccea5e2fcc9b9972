"""Small reference inflation systems used by tests, demos and the CLI."""
from __future__ import annotations

import math

from .multiset import GridMode
from .system import InflationSystem

PI = math.pi


def ternary_overlap():
    """A=3, D={0,1,2,3}: overlapping digits, Perron root 4 exceeds |det A|."""
    return InflationSystem.create(3, {(0, 0): [0, 1, 2, 3]})


def ternary_pi(epsilon=1e-9):
    """A=3, D={0,1,pi}: irrational digit, multiplicity-one discrete solution."""
    return InflationSystem.create(3, {(0, 0): [0, 1, PI]}, GridMode(epsilon))


def binary():
    """A=2, D={0,1}: the unit interval tile with the integers as its translates."""
    return InflationSystem.create(2, {(0, 0): [0, 1]})


def binary_two_color():
    """A=2 with two colors whose every cell is {0,1}; Perron root 4 > 2."""
    return InflationSystem.create(2, {(i, j): [0, 1] for i in range(2) for j in range(2)})


def two_color_pi(epsilon=1e-9):
    """Two colors, A=3, cycle 0 (color 1) -> 1 (color 2) -> 0 (color 1).

    ``digits[i][j]`` carries color ``j`` into color ``i``.
    """
    return InflationSystem.create(
        3, {(0, 0): [PI + 3], (1, 0): [1], (0, 1): [-3, PI]}, GridMode(epsilon))


def balanced_ternary():
    """A=3, D={-1,0,1}: tiles the line with [-1/2, 1/2]."""
    return InflationSystem.create(3, {(0, 0): [-1, 0, 1]})


def negabinary():
    """A=-2, D={-2,-1}: base -2 with a period-2 fundamental cycle {0,-1}."""
    return InflationSystem.create(-2, {(0, 0): [-2, -1]})


def twin_dragon():
    """A=[[1,-1],[1,1]], D={(0,0),(1,0)}: a planar self-affine tile."""
    return InflationSystem.create([[1, -1], [1, 1]], {(0, 0): [(0, 0), (1, 0)]})


FIXTURES = {
    "ternary_overlap": ternary_overlap,
    "ternary_pi": ternary_pi,
    "binary": binary,
    "binary_two_color": binary_two_color,
    "two_color_pi": two_color_pi,
    "balanced_ternary": balanced_ternary,
    "negabinary": negabinary,
    "twin_dragon": twin_dragon,
}


def get(name: str) -> InflationSystem:
    return FIXTURES[name]()


__all__ = ["FIXTURES", "get"] + list(FIXTURES)
