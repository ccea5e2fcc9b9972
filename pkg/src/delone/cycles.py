"""Periodic cycles, seeds, iterative generation and discreteness certification.

An irreducible discrete solution of the inflation equation is grown from a
single multiplicity-one periodic orbit.  This module enumerates candidate
orbits, iterates the inflation operator from them, and runs the anytime
certifier that compares consecutive iterates inside a ball of the adapted
norm.
"""
from __future__ import annotations

import itertools
import math
import os
import warnings
from dataclasses import dataclass
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from typing import ClassVar

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _linalg
from .errors import (InconsistencyError, MultiplicityOverflow,
                     PartialEnumerationError, StateError)
from .multiset import (MULTIPLICITY_CAP, Multiset, MultisetFamily,
                       RationalMode)
from .system import AdaptedNorm, InflationSystem, generation_radius, inflate

DEFAULT_K_MAX = 50
DEFAULT_POINT_BUDGET = 10**7
FLOAT_RESIDUAL = 1e-6


def default_point_budget() -> int:
    env = os.environ.get("DELONE_BUDGET_POINTS")
    return int(env) if env else DEFAULT_POINT_BUDGET


# Cycles ---------------------------------------------------------------------

@dataclass(frozen=True)
class Cycle:
    """Periodic orbit ``x_{k+1} = A x_k + digits[k]`` (indices mod period).

    ``vertices[k] = (point, color)``; ``digits[k]`` lies in
    ``D[color_{k+1}][color_k]``.
    """

    vertices: tuple
    digits: tuple
    minimal_period: int

    @property
    def period(self) -> int:
        return len(self.vertices)

    @property
    def is_minimal(self) -> bool:
        return self.minimal_period == self.period

    @property
    def is_simple(self) -> bool:
        """No vertex repeats within one minimal period."""
        q = self.minimal_period
        return len(set(self.vertices[:q])) == q

    @property
    def base(self):
        return self.vertices[0]

    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices)

    def points(self, mode=None) -> list:
        if mode is None:
            return [p for p, _ in self.vertices[:self.minimal_period]]
        return [tuple(mode.to_float(c) for c in p) for p, _ in self.vertices[:self.minimal_period]]

    def check(self, sys: InflationSystem) -> bool:
        """Verify the orbit equation around the loop (exact in key arithmetic)."""
        p = self.period
        for k in range(p):
            (x, c), (y, c2) = self.vertices[k], self.vertices[(k + 1) % p]
            d = self.digits[k]
            if d not in sys.digits[c2][c]:
                return False
            ax = sys.linear(x)
            if tuple(a + b for a, b in zip(ax, d)) != y:
                return False
        return True


def _canonical(vertices, digits):
    p = len(vertices)
    k = min(range(p), key=lambda r: vertices[r:] + vertices[:r])
    verts = tuple(vertices[k:] + vertices[:k])
    digs = tuple(digits[k:] + digits[:k])
    q = next(q for q in range(1, p + 1)
             if p % q == 0 and all(verts[t] == verts[(t + q) % p] for t in range(p)))
    return verts, digs, q


def _color_loops(sys, p):
    n = sys.n
    for colors in itertools.product(range(n), repeat=p):
        if all(sys.digits[colors[(k + 1) % p]][colors[k]] for k in range(p)):
            yield colors


def enumerate_cycles(sys: InflationSystem, p: int, budget: int = 10**6,
                     minimal_only: bool = False) -> list:
    """All periodic cycles of period ``p`` (rotation classes, canonical order).

    For every color loop and digit word the start point solves
    ``(A^p - I) x_0 = -sum_k A^{p-1-k} d_k``.  Cycles whose minimal period is
    a proper divisor of ``p`` are included unless ``minimal_only``; the
    ``minimal_period`` field flags them.  ``minimal_only`` also drops closed
    walks that revisit a vertex (concatenations of shorter cycles).
    """
    if p < 1:
        raise ValueError("period must be >= 1")
    mode = sys.mode
    d = sys.d
    exact = isinstance(mode, RationalMode)
    if exact:
        powers = [_linalg.power(sys.A, k) for k in range(p + 1)]
        Ap_minus_I = tuple(tuple(a - (1 if r == c else 0) for c, a in enumerate(row))
                           for r, row in enumerate(powers[p]))
        inv = _linalg.inverse(Ap_minus_I)
    else:
        Af = sys.A_float
        fpow = [np.linalg.matrix_power(Af, k) for k in range(p + 1)]
        Minv = np.linalg.inv(fpow[p] - np.eye(d))
    found = {}
    words = 0
    for colors in _color_loops(sys, p):
        cells = [sorted(sys.digits[colors[(k + 1) % p]][colors[k]]) for k in range(p)]
        for word in itertools.product(*cells):
            words += 1
            if words > budget:
                raise PartialEnumerationError(
                    f"more than {budget} digit words for period {p}",
                    partial=_finish(found, minimal_only))
            if exact:
                acc = [0] * d
                for k, dk in enumerate(word):
                    v = _linalg.matvec(powers[p - 1 - k], dk)
                    acc = [a + b for a, b in zip(acc, v)]
                x0 = tuple(-c for c in _linalg.matvec(inv, acc))
                pts = [x0]
                for k in range(p - 1):
                    ax = sys.linear(pts[-1])
                    pts.append(tuple(a + b for a, b in zip(ax, word[k])))
            else:
                dw = [np.array([mode.to_float(c) for c in dk]) for dk in word]
                acc = sum(fpow[p - 1 - k] @ dk for k, dk in enumerate(dw))
                x0f = -Minv @ acc
                fpts = [x0f]
                for k in range(p - 1):
                    fpts.append(Af @ fpts[-1] + dw[k])
                closure = Af @ fpts[-1] + dw[p - 1]
                if np.linalg.norm(closure - x0f) >= FLOAT_RESIDUAL * (1 + np.linalg.norm(x0f)):
                    continue
                pts = [tuple(mode.coord(c) for c in x) for x in fpts]
            verts, digs, q = _canonical([(pt, c) for pt, c in zip(pts, colors)], list(word))
            found.setdefault(verts, Cycle(verts, digs, q))
    return _finish(found, minimal_only)


def _finish(found, minimal_only):
    cycles = sorted(found.values(), key=lambda c: c.vertices)
    if minimal_only:
        cycles = [c for c in cycles if c.is_minimal and c.is_simple]
    return cycles


# Seeds ----------------------------------------------------------------------

@dataclass(frozen=True)
class Seed:
    family: MultisetFamily
    cycle: Cycle | None = None


def seed_from_cycle(sys: InflationSystem, cycle: Cycle) -> Seed:
    """Seed whose color-``i`` member holds the cycle points of color ``i``."""
    members = [dict() for _ in range(sys.n)]
    for p, c in cycle.vertices:
        members[c][p] = 1
    fam = MultisetFamily(Multiset._wrap(m, sys.mode, sys.d) for m in members)
    if not inflate(sys, fam).contains(fam):
        raise InconsistencyError(
            "cycle seed fails the inclusion property; in float mode the orbit "
            "may not be representable on the epsilon grid")
    return Seed(fam, cycle)


def as_seed(seed) -> Seed:
    if isinstance(seed, Seed):
        return seed
    return Seed(MultisetFamily(seed))


# Graph structure --------------------------------------------------------------

def _edges(sys, family):
    verts = family.vertices()
    index = {v: k for k, v in enumerate(verts)}
    rows, cols, labels = [], [], []
    for (x, j) in verts:
        ax = sys.linear(x)
        for i in range(sys.n):
            for dg in sys.digits[i][j]:
                y = tuple(a + b for a, b in zip(ax, dg))
                t = index.get((y, i))
                if t is not None:
                    rows.append(index[(x, j)])
                    cols.append(t)
                    labels.append(dg)
    return verts, rows, cols, labels


def find_cycles(sys: InflationSystem, family: MultisetFamily):
    """Directed cycles of the offspring graph restricted to ``family``'s support.

    Returns ``(cycles, tangles)``: simple cycles as :class:`Cycle` objects and
    strongly connected components that contain more than one cycle (lists of
    vertices).
    """
    verts, rows, cols, labels = _edges(sys, family)
    N = len(verts)
    if N == 0:
        return [], []
    G = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(N, N))
    ncomp, lab = connected_components(G, directed=True, connection="strong")
    succ = {}
    for r, c, dg in zip(rows, cols, labels):
        succ.setdefault(r, []).append((c, dg))
    members = {}
    for v, l in enumerate(lab):
        members.setdefault(l, []).append(v)
    cycles, tangles = [], []
    for comp in members.values():
        cs = set(comp)
        inner = {v: [(c, dg) for c, dg in succ.get(v, []) if c in cs] for v in comp}
        if len(comp) == 1 and not inner[comp[0]]:
            continue
        if any(len({c for c, _ in inner[v]}) != 1 or len(inner[v]) != 1 for v in comp):
            tangles.append([verts[v] for v in sorted(comp)])
            continue
        v = comp[0]
        order, digs = [], []
        for _ in comp:
            order.append(verts[v])
            nxt, dg = inner[v][0]
            digs.append(dg)
            v = nxt
        vv, dd, q = _canonical(order, digs)
        cycles.append(Cycle(vv, dd, q))
    cycles.sort(key=lambda c: c.vertices)
    return cycles, tangles


def preimages(sys: InflationSystem, family: MultisetFamily, vertex) -> list:
    """Preimages ``(x, j, digit)`` of ``vertex`` inside ``family``."""
    y, i = vertex
    out = []
    for j in range(sys.n):
        for x in family[j]:
            ax = sys.linear(x)
            for dg in sys.digits[i][j]:
                if tuple(a + b for a, b in zip(ax, dg)) == y:
                    out.append((x, j, dg))
    return sorted(out)


# Generation -------------------------------------------------------------------

@dataclass(frozen=True)
class ShellStats:
    k: int
    points: tuple          # distinct points per color
    totals: tuple          # total multiplicity per color
    max_multiplicity: int
    new_points: tuple      # |supp S^(k)_i \ supp S^(k-1)_i|


@dataclass
class GenerationRun:
    """Result of iterating the inflation operator from a seed."""

    seed: Seed
    frontier: MultisetFamily
    shells: list
    steps: int
    prune_radius: float | None = None
    exhausted: bool = False
    history: list | None = None
    norm: AdaptedNorm | None = None
    valid_radius: float | None = None     # adapted-norm radius where frontier equals the limit
    stabilized_at: int | None = None

    @property
    def period(self):
        return None if self.seed.cycle is None else self.seed.cycle.minimal_period

    @property
    def totals(self) -> list:
        """Total multiplicities per step, ``H^(k)``."""
        return [list(s.totals) for s in self.shells]

    def known_euclidean_radius(self) -> float:
        """Euclidean radius inside which the frontier equals the limit."""
        if self.valid_radius is None or self.norm is None:
            raise StateError("run has no certified window")
        return self.valid_radius / self.norm.upper


def _stats(k, cur, prev):
    return ShellStats(
        k=k,
        points=tuple(len(m) for m in cur),
        totals=tuple(m.total() for m in cur),
        max_multiplicity=cur.max_multiplicity(),
        new_points=tuple(len(m) if prev is None else sum(1 for p in m if p not in pm)
                         for m, pm in zip(cur, prev if prev is not None else cur)),
    )


def generate(sys: InflationSystem, seed, k_max: int, point_budget: int | None = None,
             prune_radius: float | None = None, norm: AdaptedNorm | None = None,
             threads: int = 1, keep_history: bool = False,
             cap: int = MULTIPLICITY_CAP) -> GenerationRun:
    """Iterate ``S^(k+1) = psi(S^(k))`` from ``seed`` for up to ``k_max`` steps.

    ``prune_radius`` drops points whose adapted norm exceeds it.  Points
    outside any radius at least the generation radius only have offspring
    further out, so the content inside the pruning ball is exact.  Pruned
    runs do not preserve the total multiplicities ``H^(k)``.
    """
    seed = as_seed(seed)
    budget = default_point_budget() if point_budget is None else point_budget
    if prune_radius is not None:
        norm = norm or AdaptedNorm.for_system(sys)
        R0 = generation_radius(sys, norm, safety=1.0)
        if prune_radius < R0:
            raise ValueError(f"prune radius {prune_radius} is below the generation radius {R0}")
    cur = seed.family
    if prune_radius is not None:
        cur = cur.restrict_to_ball(norm, prune_radius)
    shells = [_stats(0, cur, None)]
    history = [cur] if keep_history else None
    exhausted = False
    steps = 0
    for k in range(1, k_max + 1):
        nxt = inflate(sys, cur, cap=cap, threads=threads)
        if prune_radius is not None:
            nxt = nxt.restrict_to_ball(norm, prune_radius)
        if nxt.point_count() > budget:
            exhausted = True
            break
        shells.append(_stats(k, nxt, cur))
        if keep_history:
            history.append(nxt)
        cur = nxt
        steps = k
    return GenerationRun(seed, cur, shells, steps, prune_radius, exhausted, history, norm)


# Certification ----------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    """Concrete evidence that a seed does not generate an irreducible discrete solution."""

    kind: str                      # "cycle_multiplicity" | "second_cycle" | "tangle"
    step: int
    vertex: tuple | None = None
    multiplicity: int | None = None
    preimages: tuple = ()
    cycle: Cycle | None = None
    component: tuple = ()

    def describe(self, mode) -> dict:
        fmt = lambda p: [mode.format(c) for c in p]  # noqa: E731
        out = {"kind": self.kind, "step": self.step}
        if self.vertex is not None:
            out["vertex"] = {"point": fmt(self.vertex[0]), "color": self.vertex[1] + 1}
            out["multiplicity"] = self.multiplicity
            out["preimages"] = [{"point": fmt(x), "color": j + 1, "digit": fmt(dg)}
                                for x, j, dg in self.preimages]
        if self.cycle is not None:
            out["cycle"] = [{"point": fmt(p), "color": c + 1} for p, c in self.cycle.vertices]
        if self.component:
            out["component"] = [{"point": fmt(p), "color": c + 1} for p, c in self.component]
        return out


@dataclass(frozen=True)
class Discrete:
    family_window: MultisetFamily
    stabilized_at: int
    window_radius: float
    seed: Seed
    norm: AdaptedNorm
    verdict: ClassVar[str] = "Discrete"


@dataclass(frozen=True)
class NotIrreducible:
    witness: Witness
    seed: Seed
    verdict: ClassVar[str] = "NotIrreducible"


@dataclass(frozen=True)
class BudgetExhausted:
    max_k: int
    max_points: int
    reason: str
    seed: Seed
    verdict: ClassVar[str] = "BudgetExhausted"


def _base_cycle(sys, seed):
    if seed.cycle is not None:
        return seed.cycle.vertex_set(), None
    cycles, tangles = find_cycles(sys, seed.family)
    if tangles:
        return None, Witness("tangle", 0, component=tuple(tangles[0]))
    if len(cycles) > 1:
        return None, Witness("second_cycle", 0, cycle=cycles[1])
    if not cycles:
        raise InconsistencyError("seed contains no cycle; it cannot have the inclusion property")
    return cycles[0].vertex_set(), None


def certify(sys: InflationSystem, seed, k_max: int = DEFAULT_K_MAX,
            point_budget: int | None = None, norm: AdaptedNorm | None = None,
            safety: float = 1.1, radius: float | None = None,
            cap: int = MULTIPLICITY_CAP, threads: int = 1, lookahead: int = 4):
    """Semi-decide whether ``seed`` generates an irreducible discrete solution.

    Iterates inside the adapted-norm ball of the generation radius and stops
    when two consecutive iterates agree there, counting multiplicities
    (:class:`Discrete`).  A cycle vertex of multiplicity two or a second
    cycle inside the ball gives :class:`NotIrreducible`; otherwise the run
    ends with :class:`BudgetExhausted`.  After a structural witness (second
    cycle or tangle) the run continues for ``lookahead`` steps in case a cycle
    vertex reaches multiplicity two, which is the more direct evidence.
    """
    seed = as_seed(seed)
    budget = default_point_budget() if point_budget is None else point_budget
    norm = norm or AdaptedNorm.for_system(sys)
    R = generation_radius(sys, norm, safety) if radius is None else radius
    if radius is not None and radius < generation_radius(sys, norm, safety=1.0):
        raise ValueError("certification radius below the generation radius")
    if not inflate(sys, seed.family).contains(seed.family):
        raise InconsistencyError("seed does not have the inclusion property")
    base, witness = _base_cycle(sys, seed)
    if witness is not None:
        return NotIrreducible(witness, seed)
    cur = seed.family.restrict_to_ball(norm, R)
    pending = None              # structural witness awaiting a stronger one
    for k in range(1, k_max + 1):
        try:
            nxt = inflate(sys, cur, cap=cap, threads=threads).restrict_to_ball(norm, R)
        except MultiplicityOverflow:
            if pending is not None:
                return NotIrreducible(pending, seed)
            return BudgetExhausted(k, budget, "multiplicity_overflow", seed)
        for v in sorted(base):
            m = nxt[v[1]].multiplicity(v[0])
            if m >= 2:
                w = Witness("cycle_multiplicity", k, vertex=v, multiplicity=m,
                            preimages=tuple(preimages(sys, cur, v)))
                return NotIrreducible(w, seed)
        if pending is not None:
            if k >= pending.step + lookahead or nxt.point_count() > budget:
                return NotIrreducible(pending, seed)
            cur = nxt
            continue
        cycles, tangles = find_cycles(sys, nxt)
        if tangles:
            pending = Witness("tangle", k, component=tuple(tangles[0]))
        else:
            extra = [c for c in cycles if c.vertex_set() != base]
            if extra:
                pending = Witness("second_cycle", k, cycle=extra[0])
        if pending is not None:
            cur = nxt
            continue
        if nxt.point_count() > budget:
            return BudgetExhausted(k, budget, "point_budget", seed)
        if k >= 2 and nxt == cur:
            return Discrete(cur, k - 1, R, seed, norm)
        cur = nxt
    if pending is not None:
        return NotIrreducible(pending, seed)
    return BudgetExhausted(k_max, budget, "k_max", seed)


def expansion_factor(rho: float) -> float:
    """Per-step growth ``(rho^2 + 1) / (rho + 1)`` of the stabilised region."""
    return (rho * rho + 1.0) / (rho + 1.0)


def valid_window(norm: AdaptedNorm | None, outcome, k: int) -> float:
    """Adapted-norm radius inside which ``S^(k)`` equals the limit."""
    if not isinstance(outcome, Discrete):
        raise StateError("valid_window needs a Discrete certification outcome")
    if k < outcome.stabilized_at:
        raise StateError(f"step {k} precedes stabilisation at {outcome.stabilized_at}")
    norm = norm or outcome.norm
    return outcome.window_radius * expansion_factor(norm.rho) ** (k - outcome.stabilized_at)


def solution_window(sys: InflationSystem, seed, radius: float, outcome=None,
                    point_budget: int | None = None, threads: int = 1,
                    keep_history: bool = False) -> GenerationRun:
    """Generate the limit solution exactly on the Euclidean ball of ``radius``.

    Certifies first (unless ``outcome`` is given), then iterates with
    adapted-norm pruning until the valid window covers the ball.
    """
    seed = as_seed(seed)
    if outcome is None:
        outcome = certify(sys, seed, point_budget=point_budget)
    if not isinstance(outcome, Discrete):
        raise StateError(f"seed is not certified discrete ({outcome.verdict})")
    norm = outcome.norm
    R = outcome.window_radius
    W = max(R, radius * norm.upper * (1 + 1e-9))
    f = expansion_factor(norm.rho)
    extra = 0 if W <= R else math.ceil(math.log(W / R) / math.log(f))
    k = outcome.stabilized_at + extra
    run = generate(sys, seed, k, point_budget=point_budget, prune_radius=W, norm=norm,
                   threads=threads, keep_history=keep_history)
    if run.exhausted:
        raise StateError("point budget exhausted before the window was filled")
    run.valid_radius = valid_window(norm, outcome, k) if extra else R
    run.valid_radius = min(run.valid_radius, W)
    run.stabilized_at = outcome.stabilized_at
    return run


# Multiplicities by path counting -------------------------------------------------

def _lattice_denominator(sys, cycle):
    if not (isinstance(sys.mode, RationalMode) and sys.integral_A):
        return None
    L = 1
    vals = [c for p, _ in cycle.vertices for c in p] + [c for p in sys.all_digits() for c in p]
    for v in vals:
        L = math.lcm(L, Fraction(v).denominator)
    return L


def multiplicity_by_paths(sys: InflationSystem, cycle: Cycle, target, depth: int = 12) -> int:
    """Number of cycle-free directed paths from the cycle base to ``target``.

    ``target`` is ``(point_key, color)``.  The search runs backwards through
    all preimages ``A^{-1}(y - d)`` up to ``depth`` edges; it never consults
    a generated multiset.  Cycle vertices count as multiplicity one.
    """
    target = (tuple(target[0]), target[1])
    if target in cycle.vertex_set():
        return 1
    base = cycle.base
    mode = sys.mode
    exact = isinstance(mode, RationalMode)
    L = _lattice_denominator(sys, cycle)
    if exact:
        Ainv = _linalg.inverse(sys.A)
    elif sys.integral_A:
        Ai = [[int(a) for a in row] for row in sys.A]
        det = int(_linalg.det(Ai))
        adj = tuple(tuple(int(a * det) for a in row) for row in _linalg.inverse(Ai))
    else:
        Ainv_f = np.linalg.inv(sys.A_float)

    def pre(v):
        y, i = v
        out = []
        for j in range(sys.n):
            for dg, c in sys.digits[i][j].items():
                diff = tuple(a - b for a, b in zip(y, dg))
                if exact:
                    x = _linalg.matvec(Ainv, diff)
                    if L is not None and any(Fraction(t).denominator > 1 and L % Fraction(t).denominator
                                             for t in x):
                        continue
                elif sys.integral_A:
                    num = [sum(a * t for a, t in zip(row, diff)) for row in adj]
                    if any(t % det for t in num):
                        continue
                    x = tuple(t // det for t in num)
                else:
                    x = tuple(int(round(t)) for t in Ainv_f @ np.array(diff, dtype=float))
                out.append(((x, j), c))
        return out

    def count(v, visited, left):
        if v == base:
            return 1
        if left == 0:
            return 0
        total = 0
        for u, c in pre(v):
            if u not in visited:
                visited.add(u)
                total += c * count(u, visited, left - 1)
                visited.discard(u)
        return total

    result = count(target, {target}, depth)
    if result == 0:
        warnings.warn(f"target {target} not reachable from the cycle within depth {depth}")
    return result


# Decomposition ------------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    cycle: Cycle
    family: MultisetFamily     # the component restricted to the window
    copies: int = 1


def decompose(sys: InflationSystem, family_window: MultisetFamily, norm: AdaptedNorm,
              R: float, k_max: int = DEFAULT_K_MAX) -> list:
    """Split a certified window of a discrete solution into irreducible parts.

    Every cycle inside the window generates one component; components are
    regenerated on the same window and their copy counts solved in
    reachability order.  The union must reproduce the input exactly.
    """
    window = family_window.restrict_to_ball(norm, R)
    if window.is_empty():
        return []
    cycles, tangles = find_cycles(sys, window)
    if tangles:
        raise InconsistencyError("window contains a strongly connected tangle of several cycles")
    comps = {}
    for c in cycles:
        seed = Seed(MultisetFamily(
            Multiset._wrap({p: 1 for p, col in c.vertices if col == i}, sys.mode, sys.d)
            for i in range(sys.n)), c)
        out = certify(sys, seed, k_max=k_max, norm=norm, radius=R)
        if not isinstance(out, Discrete):
            raise InconsistencyError(f"cycle {c.vertices} does not generate a discrete component")
        comps[c.vertices] = (c, out.family_window)
    ts = TopologicalSorter({key: [] for key in comps})
    for key, (c, fam) in comps.items():
        for other, (c2, _) in comps.items():
            if other != key and any(fam[col].multiplicity(p) for p, col in c2.vertices):
                ts.add(other, key)        # key's component reaches the other cycle
    try:
        order = list(ts.static_order())
    except CycleError:
        raise InconsistencyError("components reach each other's cycles") from None
    residual = window
    result = []
    for key in order:
        c, fam = comps[key]
        p0, col0 = c.base
        copies = residual[col0].multiplicity(p0)
        if copies <= 0:
            raise InconsistencyError(f"no mass left for the cycle at {c.base}")
        scaled = MultisetFamily(Multiset._wrap({p: m * copies for p, m in f.items()}, sys.mode, sys.d)
                                for f in fam)
        if not residual.contains(scaled):
            raise InconsistencyError("component exceeds the remaining mass")
        residual = residual.difference(scaled)
        result.append(Component(c, fam, copies))
    if not residual.is_empty():
        raise InconsistencyError(f"residual mass {residual.total()} after subtracting components")
    return result


# Multiplicity dichotomy probe -------------------------------------------------------

@dataclass(frozen=True)
class DichotomyReport:
    max_multiplicity_per_shell: tuple
    period: int
    depth: int
    bounded_up_to_depth: bool
    first_exceeded_at: int | None

    def as_dict(self) -> dict:
        return {
            "max_multiplicity_per_shell": list(self.max_multiplicity_per_shell),
            "period": self.period,
            "depth": self.depth,
            "bounded_up_to_depth": self.bounded_up_to_depth,
            "first_exceeded_at": self.first_exceeded_at,
            "heuristic": True,
        }


def dichotomy_probe(sys: InflationSystem, run: GenerationRun, period: int | None = None) -> DichotomyReport:
    """Compare observed multiplicities with the cycle period.

    Heuristic only: a finite run can show that multiplicities exceed the
    period, never that they stay bounded forever.
    """
    p = period if period is not None else run.period
    if p is None:
        raise StateError("period unknown: pass it or generate from a cycle seed")
    maxima = tuple(s.max_multiplicity for s in run.shells)
    first = next((s.k for s in run.shells if s.max_multiplicity > p), None)
    return DichotomyReport(maxima, p, run.steps, first is None, first)
