from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delone import fixtures
from delone.errors import ValidationError
from delone.multiset import RATIONAL, Multiset, MultisetFamily
from delone.system import (AdaptedNorm, InflationSystem, PerronCondition, char_poly,
                           exact_perron_root, generation_radius, inflate, is_primitive,
                           iterate_system, iterated_digit_sets, perron_eigenvalue, validate)

from oracles import affine_words_1d, digit_set_paths

PERRON = {
    "ternary_overlap": (4, PerronCondition.OVERCROWDED),
    "ternary_pi": (3, PerronCondition.EQUAL),
    "binary": (2, PerronCondition.EQUAL),
    "binary_two_color": (4, PerronCondition.OVERCROWDED),
    "two_color_pi": (2, PerronCondition.TILES_DEFICIENT),
    "balanced_ternary": (3, PerronCondition.EQUAL),
    "negabinary": (2, PerronCondition.EQUAL),
    "twin_dragon": (2, PerronCondition.EQUAL),
}


def test_perron_closed_forms(any_system):
    name, sys = any_system
    lam, cond = PERRON[name]
    rep = validate(sys)
    assert rep.primitive
    assert abs(rep.lambda_S - lam) < 1e-9
    assert rep.lambda_exact == lam
    assert rep.condition == cond


def test_power_iteration_matches_exact_root():
    rng = np.random.default_rng(7)
    for _ in range(50):
        S = rng.integers(0, 4, size=(3, 3)) + np.eye(3, dtype=int)
        S[0, 1] = S[1, 2] = S[2, 0] = max(1, S[0, 1])
        assert is_primitive(S)
        lam = perron_eigenvalue(S)
        assert abs(lam - max(abs(np.linalg.eigvals(S)))) < 1e-8
        root, _ = exact_perron_root(S)
        if root is not None:
            assert abs(float(root) - lam) < 1e-9


def test_two_by_two_perron_root_is_two():
    S = [[1, 1], [2, 0]]
    assert char_poly(S) == (1, -1, -2)
    assert exact_perron_root(S)[0] == 2


def test_primitivity():
    assert is_primitive([[1, 1], [1, 0]])
    assert not is_primitive([[0, 1], [1, 0]])
    assert not is_primitive([[1, 0], [0, 1]])


def test_non_expanding_matrix_rejected():
    with pytest.raises(ValidationError):
        InflationSystem.create(1, {(0, 0): [0]})
    with pytest.raises(ValidationError):
        InflationSystem.create([[2, 0], [0, 1]], {(0, 0): [(0, 0)]})


def _cells(sys):
    return [[[sys.mode.to_float(p[0]) if not sys.exact else p[0] for p in sys.digits[i][j].sorted_points()
              for _ in range(sys.digits[i][j].multiplicity(p))]
             for j in range(sys.n)] for i in range(sys.n)]


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_iterated_digit_sets_have_power_cardinalities(any_system, m):
    name, sys = any_system
    S = sys.subdivision_matrix()
    Dm = iterated_digit_sets(sys, m)
    Sm = np.linalg.matrix_power(S, m)
    assert [[D.total() for D in row] for row in Dm] == Sm.tolist()


@pytest.mark.parametrize("name", ["binary", "ternary_overlap", "balanced_ternary",
                                  "negabinary", "binary_two_color"])
def test_iterated_digit_sets_match_path_enumeration(name):
    sys = fixtures.get(name)
    a = sys.A[0][0]
    cells = _cells(sys)
    for m in range(1, 5):
        ref = digit_set_paths(a, cells, m)
        got = iterated_digit_sets(sys, m)
        for (i, j), cnt in ref.items():
            assert {(x,): k for x, k in cnt.items()} == dict(got[i][j].items())


def test_iterate_system_composes_operator():
    sys = fixtures.balanced_ternary()
    sys3 = iterate_system(sys, 3)
    X = MultisetFamily.from_values([[0, Fraction(1, 2)]])
    Y = X
    for _ in range(3):
        Y = inflate(sys, Y)
    assert inflate(sys3, X) == Y


@pytest.mark.parametrize("name", ["binary", "ternary_overlap", "negabinary", "binary_two_color"])
def test_inflation_matches_word_enumeration(name):
    sys = fixtures.get(name)
    seed = [(0, 0), (Fraction(-1, 3), sys.n - 1)]
    X = MultisetFamily.from_values([[x for x, c in seed if c == i] for i in range(sys.n)])
    for _ in range(4):
        X = inflate(sys, X)
    ref = affine_words_1d(sys.A[0][0], _cells(sys), seed, 4)
    got = {((p[0],), i): m for i in range(sys.n) for p, m in X[i].items()}
    assert got == {((x,), c): m for (x, c), m in ref.items()}


def _random_family(draw, sys):
    fam = []
    for _ in range(sys.n):
        k = draw(st.integers(0, 5))
        vals = []
        for _ in range(k):
            if sys.d == 1:
                vals.append(Fraction(draw(st.integers(-20, 20)), draw(st.sampled_from([1, 2, 3]))))
            else:
                vals.append((draw(st.integers(-9, 9)), draw(st.integers(-9, 9))))
        if not sys.exact:
            vals = [float(v) for v in vals]
        fam.append(Multiset.from_values(vals, sys.mode))
    return MultisetFamily(fam)


@st.composite
def system_and_families(draw):
    name = draw(st.sampled_from(sorted(fixtures.FIXTURES)))
    sys = fixtures.get(name)
    return sys, _random_family(draw, sys), _random_family(draw, sys)


@settings(max_examples=200, deadline=None)
@given(system_and_families())
def test_inflation_is_additive_and_monotone(data):
    sys, X, Y = data
    XY = X.union(Y)
    assert inflate(sys, XY) == inflate(sys, X).union(inflate(sys, Y))
    assert inflate(sys, XY).contains(inflate(sys, X))
    assert inflate(sys, MultisetFamily.empty(sys.n, sys.mode)).is_empty()
    assert inflate(sys, X).total() == int(np.sum(sys.subdivision_matrix() @ np.array(X.totals())))


def test_inflation_is_thread_independent(any_system):
    name, sys = any_system
    X = MultisetFamily([Multiset.from_values(
        [(v, -v) if sys.d == 2 else (float(v) if not sys.exact else v) for v in range(-8, 9)], sys.mode)
        for _ in range(sys.n)])
    base = inflate(sys, X)
    for t in (4, 8):
        assert inflate(sys, X, threads=t) == base


def test_adapted_norm_contracts(any_system):
    name, sys = any_system
    norm = AdaptedNorm.for_system(sys)
    rng = np.random.default_rng(11)
    xs = rng.normal(size=(1000, sys.d)) * rng.uniform(0.01, 100, size=(1000, 1))
    Ainv = np.linalg.inv(sys.A_float)
    lhs = norm(xs @ Ainv.T)
    rhs = norm(xs) / norm.rho
    assert np.all(lhs <= rhs * (1 + 1e-9))
    # equivalence with the Euclidean norm
    e = np.linalg.norm(xs, axis=1)
    assert np.all(norm(xs) <= norm.upper * e * (1 + 1e-9))
    assert np.all(norm(xs) >= norm.lower * e * (1 - 1e-9))


def test_generation_radius_for_overlapping_ternary():
    sys = fixtures.ternary_overlap()
    norm = AdaptedNorm.for_system(sys)
    assert norm.rho == 2.0
    assert abs(norm(np.array([1.0])) - 2.0) < 1e-9
    assert abs(generation_radius(sys, norm, safety=1.0) - 18.0) < 1e-9
    assert abs(generation_radius(sys, norm) - 19.8) < 1e-9


def test_rho_override_validated():
    sys = fixtures.binary()
    with pytest.raises(ValidationError):
        AdaptedNorm.for_system(sys, rho=2.5)
    assert AdaptedNorm.for_system(sys, rho=1.2).rho == 1.2


def test_rational_mode_is_default():
    assert fixtures.binary().mode == RATIONAL
