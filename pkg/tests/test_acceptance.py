"""Acceptance criteria, one test per criterion, at the stated tolerances.

A summary line PASS/FAIL per criterion is printed at the end of the run
(see ``conftest.py``).
"""
import json
import math
import subprocess
import sys as _sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from delone import fixtures
from delone.analysis import Box, denseness_trend, discreteness_trend, stabilizes
from delone.cli import main
from delone.cycles import (Discrete, certify, dichotomy_probe, enumerate_cycles, generate,
                           multiplicity_by_paths, seed_from_cycle, solution_window)
from delone.errors import InconsistencyError
from delone.multiset import MultisetFamily
from delone.system import AdaptedNorm, exact_perron_root, validate
from delone.tiles import check_tiling, self_replicating_check, tile_iterate

from oracles import affine_words_1d

F = Fraction
TESTS = Path(__file__).parent


def acceptance(cid, title):
    return pytest.mark.acceptance(cid, title)


def known(run):
    """Interval on which a certified run equals the limit solution."""
    r = run.known_euclidean_radius()
    return (-r,), (r,)


# 1 ---------------------------------------------------------------------------------

@acceptance(1, "overlapping ternary digits: m(3^k) = k+1 for k = 0..8")
def test_overlapping_ternary_multiplicities():
    sys = fixtures.ternary_overlap()
    seed = MultisetFamily.from_values([[0]])
    t0 = time.perf_counter()
    norm = AdaptedNorm.for_system(sys)
    # ||x||_A = 2|x| here, so this ball is the window [-3^9, 3^9]
    run = generate(sys, seed, 9, prune_radius=2 * 3 ** 9, norm=norm)
    X = run.frontier[0]
    got = [X.multiplicity((3 ** k,)) for k in range(9)]
    elapsed = time.perf_counter() - t0
    assert got == [k + 1 for k in range(9)]
    assert all(p[0] >= 0 for p in X)
    assert elapsed < 10
    # independent word enumeration without pruning
    words = affine_words_1d(3, [[[0, 1, 2, 3]]], [(0, 0)], 9)
    assert [words[(3 ** k, 0)] for k in range(9)] == got


# 2 ---------------------------------------------------------------------------------

def _pi_shells():
    sys = fixtures.ternary_pi()
    mode = sys.mode
    seed = MultisetFamily.from_values([[0.0]], mode)
    run = generate(sys, seed, 8, keep_history=True)
    shells = []
    for n in range(1, 9):
        prev, cur = run.history[n - 1][0], run.history[n][0]
        shells.append(sorted(mode.to_float(p[0]) for p in cur if p not in prev))
    return sys, seed, run, shells


@acceptance(2, "pi digit: Discrete, multiplicity one, shell counts and shell bounds")
@pytest.mark.xfail(strict=True, reason="the stated lower shell bound 3^n fails already for n=1 "
                                       "(the point 1 is new at step 1); see the corrected bound test")
def test_pi_digit_certification_and_shells():
    t0 = time.perf_counter()
    sys, seed, run, shells = _pi_shells()
    out = certify(sys, seed)
    assert isinstance(out, Discrete)
    assert out.family_window.max_multiplicity() == 1
    assert run.frontier.max_multiplicity() == 1
    assert [len(s) for s in shells] == [2 * 3 ** (n - 1) for n in range(1, 9)]
    assert time.perf_counter() - t0 < 30
    for n, s in enumerate(shells, start=1):
        assert 3 ** n <= s[0] and s[-1] <= 2 * math.pi * 3 ** n


def test_pi_digit_shells_satisfy_corrected_bounds():
    sys, seed, run, shells = _pi_shells()
    assert isinstance(certify(sys, seed), Discrete)
    assert [len(s) for s in shells] == [2 * 3 ** (n - 1) for n in range(1, 9)]
    for n, s in enumerate(shells, start=1):
        # new points have n digits with a nonzero leading one; grid snapping
        # error grows by a factor 3 per step
        tol = 1e-8 * 3 ** n
        assert 3 ** (n - 1) - tol <= s[0] and s[-1] <= math.pi * (3 ** n - 1) / 2 + tol
        assert s[-1] <= 2 * math.pi * 3 ** n
    assert shells[0][0] == 1.0 < 3


# 3 ---------------------------------------------------------------------------------

@acceptance(3, "binary digits: period-2 cycles and thickness 2")
def test_binary_cycles_and_thickness():
    t0 = time.perf_counter()
    sys = fixtures.binary()
    cycles = enumerate_cycles(sys, 2)
    starts = {p[0] for c in cycles for p, _ in c.vertices}
    assert starts == {F(0), F(-1, 3), F(-2, 3), F(-1)}
    minimal = {p[0] for c in cycles if c.minimal_period == 2 for p, _ in c.vertices}
    assert minimal == {F(-1, 3), F(-2, 3)}
    cyc = next(c for c in cycles if c.minimal_period == 2)
    run = solution_window(sys, seed_from_cycle(sys, cyc), 22)
    tiles = tile_iterate(sys, 12)
    assert tiles[0].intervals == [(0, 1)]
    rep = check_tiling(sys, run.frontier, tiles, ((-20,), (20,)), data_window=known(run))
    assert rep.thickness == 2 and rep.defect_fraction < 0.02
    assert time.perf_counter() - t0 < 10


# 4 ---------------------------------------------------------------------------------

@acceptance(4, "two colors with Perron root 4: every seed is certified not irreducible")
def test_overcrowded_two_color_system_via_cli(capsys, spec_dir, tmp_path):
    t0 = time.perf_counter()
    spec = str(spec_dir / "binary_two_color.json")
    sys = fixtures.binary_two_color()
    seeds = [["--cycle", f"{p}:{k + 1}"] for p in (1, 2) for k in range(len(enumerate_cycles(sys, p)))]
    pts = tmp_path / "seed.csv"
    pts.write_text("x1,multiplicity,color\n0,1,1\n")
    seeds.append(["--seed", str(pts)])
    for extra in seeds:
        code = main(["--json", "certify", spec, *extra])
        data = json.loads(capsys.readouterr().out)
        assert code == 2, extra
        w = data["witness"]
        assert w["kind"] == "cycle_multiplicity" and w["multiplicity"] >= 2 and w["step"] <= 5
    assert time.perf_counter() - t0 < 5


# 5 ---------------------------------------------------------------------------------

@acceptance(5, "two-color pi system: Perron root 2, multiplicity 2 at pi+3, bounded by the period")
def test_two_color_pi_system():
    t0 = time.perf_counter()
    assert exact_perron_root([[1, 1], [2, 0]])[0] == 2
    sys = fixtures.two_color_pi()
    rep = validate(sys)
    assert rep.lambda_exact == 2 and rep.lambda_S == pytest.approx(2, abs=1e-12)
    cyc = next(c for c in enumerate_cycles(sys, 2, minimal_only=True)
               if [sys.mode.to_float(p[0]) for p, _ in c.vertices] == [0.0, 1.0])
    target = ((sys.mode.coord(math.pi + 3),), 0)
    assert multiplicity_by_paths(sys, cyc, target) == 2
    seed = seed_from_cycle(sys, cyc)
    assert isinstance(certify(sys, seed), Discrete)
    run = generate(sys, seed, 8)
    assert run.frontier[0].multiplicity(target[0]) == 2
    probe = dichotomy_probe(sys, run)
    assert probe.period == 2 and probe.depth == 8
    assert probe.bounded_up_to_depth and max(probe.max_multiplicity_per_shell) == 2
    assert time.perf_counter() - t0 < 30


# 6 ---------------------------------------------------------------------------------

@acceptance(6, "balanced ternary digits: two cosets of Z, tile [-1/2,1/2], thickness 2")
def test_balanced_ternary_end_to_end():
    t0 = time.perf_counter()
    sys = fixtures.balanced_ternary()
    seed = MultisetFamily.from_values([[F(-1, 8), F(-3, 8)]])
    out = certify(sys, seed)
    assert isinstance(out, Discrete)
    run = solution_window(sys, seed, 11, outcome=out)
    X = run.frontier[0]
    inside = {p[0]: m for p, m in X.items() if -10 <= p[0] <= 10}
    expected = {F(k) + s: 1 for k in range(-11, 12) for s in (F(-3, 8), F(-1, 8))
                if -10 <= F(k) + s <= 10}
    assert inside == expected
    for m in (12, 16):
        t = tile_iterate(sys, m)[0]
        assert t.exact and t.intervals == [(F(-1, 2), F(1, 2))]
    rep = check_tiling(sys, run.frontier, tile_iterate(sys, 12), ((-10,), (10,)),
                       data_window=known(run))
    assert rep.thickness == 2 and rep.defect_fraction < 0.02
    assert time.perf_counter() - t0 < 10


# 7 ---------------------------------------------------------------------------------

@acceptance(7, "negabinary digits: cycle {0,-1}, tile [0,1], self-replicating tiling")
def test_negabinary_self_replication():
    t0 = time.perf_counter()
    sys = fixtures.negabinary()
    cycles = enumerate_cycles(sys, 2, minimal_only=True)
    assert [sorted(p[0] for p, _ in c.vertices) for c in cycles] == [[-1, 0]]
    seed = seed_from_cycle(sys, cycles[0])
    out = certify(sys, seed)
    assert isinstance(out, Discrete)
    tiles = tile_iterate(sys, 12)
    assert tiles[0].exact and tiles[0].intervals == [(0, 1)]
    run = solution_window(sys, seed, 22, outcome=out)
    rep = check_tiling(sys, run.frontier, tiles, ((-20,), (20,)), data_window=known(run))
    assert rep.thickness == 1 and rep.defect_fraction < 0.02
    verdict = self_replicating_check(sys, out, tiles, ((-20,), (20,)))
    assert verdict.label == "SelfReplicating"
    assert time.perf_counter() - t0 < 5


# 8 ---------------------------------------------------------------------------------

def _scan_component(sys, seed, out):
    """Weak uniform discreteness and relative denseness trends over growing windows."""
    W, ratio = (729.0, 3) if sys.d == 1 else (16.0, 2)
    run = solution_window(sys, seed, W * math.sqrt(sys.d) * 1.05, outcome=out)
    windows = [Box((-W / ratio ** j,) * sys.d, (W / ratio ** j,) * sys.d) for j in (3, 2, 1, 0)]
    weak = all(stabilizes(discreteness_trend(X, 0.5, windows)) for X in run.frontier)
    dense = all(stabilizes(denseness_trend(X, windows), rel_tol=0.05) for X in run.frontier)
    return weak, dense


@acceptance(8, "Perron cross-check over all certified fixtures")
def test_perron_cross_check():
    t0 = time.perf_counter()
    weak_set, dense_set = [], []
    for name in sorted(fixtures.FIXTURES):
        sys = fixtures.get(name)
        rep = validate(sys)
        for p in (1, 2):
            for cyc in enumerate_cycles(sys, p, minimal_only=True):
                try:
                    seed = seed_from_cycle(sys, cyc)
                except InconsistencyError:
                    continue          # orbit not representable on the float grid
                out = certify(sys, seed, k_max=30)
                if not isinstance(out, Discrete):
                    continue
                weak, dense = _scan_component(sys, seed, out)
                key = (name, tuple(sorted(float(sys.mode.to_float(p_[0][0])) for p_ in cyc.vertices)))
                if weak:
                    weak_set.append(key)
                    assert rep.lambda_S <= rep.det_A_abs + 1e-9, key
                    if dense:
                        dense_set.append(key)
                        assert abs(rep.lambda_S - rep.det_A_abs) <= 1e-9, key
    dense_names = {k[0] for k in dense_set}
    assert {"binary", "balanced_ternary", "negabinary"} <= dense_names
    assert ("binary", (-2 / 3, -1 / 3)) in dense_set
    assert ("balanced_ternary", (-3 / 8, -1 / 8)) in dense_set
    assert ("negabinary", (-1.0, 0.0)) in dense_set
    assert not any(k[0] == "ternary_overlap" for k in weak_set)
    assert time.perf_counter() - t0 < 60


# 9 ---------------------------------------------------------------------------------

STRUCTURAL = [
    "test_multiset.py",
    "test_system.py::test_inflation_is_additive_and_monotone",
    "test_system.py::test_iterated_digit_sets_have_power_cardinalities",
    "test_system.py::test_iterated_digit_sets_match_path_enumeration",
    "test_system.py::test_adapted_norm_contracts",
    "test_system.py::test_inflation_is_thread_independent",
    "test_cycles.py::test_cycle_residuals_are_exactly_zero",
    "test_cycles.py::test_cycles_match_brute_force",
    "test_cycles.py::test_total_multiplicities_follow_subdivision_matrix",
    "test_cycles.py::test_generation_is_thread_independent_and_budget_reproducible",
    "test_io_cli.py::test_cli_pipeline_and_manifest_determinism",
]


@acceptance(9, "structural property suite")
def test_structural_suite():
    t0 = time.perf_counter()
    res = subprocess.run([_sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                          *[str(TESTS / s) for s in STRUCTURAL]],
                         cwd=TESTS.parent, capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    assert res.returncode == 0, res.stdout[-3000:]
    assert " passed" in res.stdout and "failed" not in res.stdout
    assert elapsed < 120
