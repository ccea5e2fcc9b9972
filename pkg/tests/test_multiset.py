from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delone.errors import ConfigurationError, MultiplicityOverflow
from delone.multiset import (RATIONAL, GridMode, Multiset, MultisetFamily, affine_image,
                             contains, difference, intersect, restrict_to_ball, union)

small = st.dictionaries(st.integers(-6, 6), st.integers(1, 4), max_size=8)


def ms(d):
    return Multiset({(k,): m for k, m in d.items()})


@settings(max_examples=200, deadline=None)
@given(small, small, small)
def test_union_and_intersection_laws(a, b, c):
    X, Y, Z = ms(a), ms(b), ms(c)
    assert union(X, Y) == union(Y, X)
    assert union(union(X, Y), Z) == union(X, union(Y, Z))
    assert intersect(X, Y) == intersect(Y, X)
    assert intersect(intersect(X, Y), Z) == intersect(X, intersect(Y, Z))
    assert union(X, Multiset()) == X
    assert intersect(X, X) == X
    assert contains(union(X, Y), X)
    assert contains(X, intersect(X, Y))
    assert union(X, Y).total() == X.total() + Y.total()


@settings(max_examples=200, deadline=None)
@given(small, small)
def test_containment_and_difference(a, b):
    X, Y = ms(a), ms(b)
    I = intersect(X, Y)
    assert contains(X, I) and contains(Y, I)
    assert union(difference(X, I), I) == X
    assert contains(X, Y) == all(X.multiplicity(p) >= m for p, m in Y.items())


@settings(max_examples=100, deadline=None)
@given(small, small, st.integers(-3, 3).filter(lambda a: a not in (0,)))
def test_affine_image_counts_pairs(a, dig, factor):
    X, D = ms(a), ms(dig)
    img = affine_image(X, ((factor,),), D)
    assert img.total() == X.total() * D.total()
    brute = {}
    for (x,), m in X.items():
        for (d,), k in D.items():
            brute[(factor * x + d,)] = brute.get((factor * x + d,), 0) + m * k
    assert dict(img.items()) == brute


def test_from_values_counts_repeats():
    X = Multiset.from_values([0, 1, 1, Fraction(1, 3)])
    assert X.multiplicity((1,)) == 2
    assert X.total() == 4 and len(X) == 3
    assert not X.is_ordinary()
    assert X.max_multiplicity() == 2


def test_grid_mode_identifies_nearby_points():
    mode = GridMode(1e-9)
    X = Multiset.from_values([np.pi, np.pi + 1e-12, 1.0], mode)
    assert len(X) == 2
    assert X.multiplicity((mode.coord(np.pi),)) == 2


def test_mixed_dimensions_rejected():
    with pytest.raises(ConfigurationError):
        Multiset([(0,), (0, 1)])


def test_negative_multiplicity_rejected():
    with pytest.raises(ValueError):
        Multiset({(0,): -1})


def test_overflow_raises():
    X = Multiset({(0,): 2**40})
    with pytest.raises(MultiplicityOverflow):
        affine_image(X, ((1,),), Multiset({(0,): 2**40}), cap=2**63 - 1)


def test_restrict_to_ball():
    X = Multiset.from_values(range(-5, 6))
    kept = restrict_to_ball(X, lambda c: np.abs(c[:, 0]), 2)
    assert kept.sorted_points() == [(-2,), (-1,), (0,), (1,), (2,)]


def test_family_operations():
    F = MultisetFamily.from_values([[0, 1], [2]])
    G = MultisetFamily.from_values([[1], [2, 2]])
    assert F.union(G).totals() == [3, 3]
    assert F.intersect(G).totals() == [1, 1]
    assert F.union(G).contains(F)
    assert not F.contains(G)
    assert F.difference(F).is_empty()
    assert MultisetFamily.empty(3).n == 3
    assert F.mode == RATIONAL
