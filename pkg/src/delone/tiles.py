"""Approximation of the companion multi-tiles and tiling-thickness checks.

The tiles solve ``A(T_i) = U_j (T_j + D_ji)`` and are approximated by the
set iteration ``T_i^(m) = U_j A^{-1}(T_j^(m-1) + D_ji)``.  In one dimension
tiles are finite unions of closed intervals (exact in rational mode); in two
dimensions they are bitmaps with cell size ``h = 2^-g``.
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _linalg
from .cycles import Discrete, solution_window
from .errors import (BudgetError, ConfigurationError, StateError,
                     UnsupportedDimension, ValidationError, WindowTooSmall)
from .multiset import MultisetFamily, RationalMode
from .system import InflationSystem

DEFAULT_DEPTH = {1: 16, 2: 10}
DEFAULT_RESOLUTION = 9
INTERVAL_BUDGET = 200_000
DEFECT_TOLERANCE = 0.02


@dataclass
class TileApprox:
    """Depth-``m`` approximation of one tile.

    ``intervals`` (d=1) is a sorted list of disjoint closed intervals;
    ``bitmap`` (d=2) marks cells of size ``h`` whose lower-left corner is
    ``origin``.
    """

    color: int
    d: int
    depth: int
    h: float
    intervals: list | None = None
    bitmap: np.ndarray | None = None
    origin: tuple | None = None
    exact: bool = False

    def is_empty(self) -> bool:
        if self.d == 1:
            return not self.intervals
        return not self.bitmap.any()

    def bounds(self):
        """Bounding box ``(lo, hi)`` as float tuples."""
        if self.is_empty():
            return None
        if self.d == 1:
            return (float(self.intervals[0][0]),), (float(self.intervals[-1][1]),)
        rows, cols = np.nonzero(self.bitmap)
        o = np.array(self.origin)
        lo = o + self.h * np.array([rows.min(), cols.min()])
        hi = o + self.h * np.array([rows.max() + 1, cols.max() + 1])
        return tuple(lo), tuple(hi)

    def diameter(self) -> float:
        b = self.bounds()
        if b is None:
            return 0.0
        return float(np.linalg.norm(np.array(b[1]) - np.array(b[0])))

    def contains(self, x, slack: float = 0.0) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.d == 1:
            v = float(x[0])
            return any(float(a) - slack <= v <= float(b) + slack for a, b in self.intervals)
        idx = np.floor((x - np.array(self.origin)) / self.h).astype(int)
        k = int(math.ceil(slack / self.h))
        r0, c0 = idx
        sub = self.bitmap[max(r0 - k, 0):r0 + k + 1, max(c0 - k, 0):c0 + k + 1]
        return bool(sub.any())

    def as_dict(self) -> dict:
        out = {"color": self.color + 1, "dimension": self.d, "depth": self.depth,
               "h": self.h, "exact": self.exact}
        if self.d == 1:
            out["intervals"] = [[_fmt(a), _fmt(b)] for a, b in self.intervals]
        else:
            out["origin"] = list(self.origin)
            out["shape"] = list(self.bitmap.shape)
            out["cells"] = int(self.bitmap.sum())
        return out


def _fmt(v):
    return str(v) if isinstance(v, (int, Fraction)) else repr(float(v))


# Helpers --------------------------------------------------------------------------

def inverse_power_sum(Af: np.ndarray, start: int = 1) -> float:
    """Upper bound for ``sum_{k >= start} ||A^{-k}||`` (spectral norms)."""
    Ainv = np.linalg.inv(Af)
    norms = []
    P = np.eye(Af.shape[0])
    q = None
    k = 0
    while q is None or k < start + q:
        k += 1
        P = P @ Ainv
        norms.append(np.linalg.norm(P, 2))
        if q is None and norms[-1] < 1:
            q = k
        if k > 100_000:
            raise ValidationError("A^{-1} is not contracting")
    block = sum(norms[start - 1:start - 1 + q])
    return float(block / (1.0 - norms[q - 1]))


def _digit_floats(sys):
    m = sys.mode
    return [[[np.array([m.to_float(c) for c in p]) for p in sys.digits[i][j]]
             for j in range(sys.n)] for i in range(sys.n)]


def _live_colors(sys):
    """Colors whose tile is nonempty (an infinite backward digit path exists)."""
    live = set(range(sys.n))
    changed = True
    while changed:
        changed = False
        for i in list(live):
            if not any(sys.digits[j][i] and j in live for j in range(sys.n)):
                live.discard(i)
                changed = True
    return live


def interval_hull(sys: InflationSystem) -> dict:
    """Exact convex hulls ``[lo_i, hi_i]`` of the one-dimensional tiles.

    Each hull endpoint solves a discounted shortest-path problem; policy
    iteration over the digit choices terminates with the exact optimum
    (in rational arithmetic when the system is rational).
    """
    if sys.d != 1:
        raise UnsupportedDimension("interval hulls are one-dimensional")
    exact = isinstance(sys.mode, RationalMode)
    to_num = (lambda c: Fraction(c)) if exact else sys.mode.to_float
    a = Fraction(sys.A[0][0]) if exact else float(sys.A[0][0])
    sgn = 1 if a > 0 else -1
    absa = abs(a)
    live = sorted(_live_colors(sys))
    states = [(i, s) for i in live for s in (1, -1)]
    sidx = {st: k for k, st in enumerate(states)}
    choices = {}
    for (i, s) in states:
        opts = []
        for j in live:
            for p in sys.digits[j][i]:
                opts.append((s * to_num(p[0]) / a, sidx[(j, s * sgn)]))
        choices[(i, s)] = sorted(opts)
    policy = {st: choices[st][0] for st in states}
    N = len(states)
    for _ in range(10_000):
        M = [[(1 if r == c else 0) for c in range(N)] for r in range(N)]
        b = [0] * N
        for st, (cost, nxt) in policy.items():
            r = sidx[st]
            M[r][nxt] -= 1 / absa
            b[r] = cost
        if exact:
            f = _linalg.solve(M, b)
        else:
            f = np.linalg.solve(np.array(M, dtype=float), np.array(b, dtype=float))
        improved = False
        for st in states:
            r = sidx[st]
            cur = f[r]
            best = min(choices[st], key=lambda o: o[0] + f[o[1]] / absa)
            val = best[0] + f[best[1]] / absa
            tol = 0 if exact else 1e-12 * (1 + abs(cur))
            if val < cur - tol:
                policy[st] = best
                improved = True
        if not improved:
            break
    out = {}
    for i in live:
        lo, hi = f[sidx[(i, 1)]], -f[sidx[(i, -1)]]
        out[i] = (lo, hi) if exact else (float(lo), float(hi))
    return out


def _merge(intervals, tol):
    intervals.sort()
    out = []
    for a, b in intervals:
        if out and a - out[-1][1] <= tol:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


# Iteration -------------------------------------------------------------------------

def tile_iterate(sys: InflationSystem, m: int | None = None, resolution: int = DEFAULT_RESOLUTION,
                 start: str = "hull", interval_budget: int = INTERVAL_BUDGET) -> list:
    """Depth-``m`` approximations ``(T_1^(m), ..., T_n^(m))``.

    ``start="hull"`` (d=1) begins from the exact convex hull of each tile,
    so every iterate contains the tile and decreases onto it;
    ``start="unit_ball"`` begins from ``[-1, 1]``.  In two dimensions the
    start is a disc that contains every tile.
    """
    d = sys.d
    if d > 2:
        raise UnsupportedDimension("tiles are implemented for d <= 2")
    if m is None:
        m = DEFAULT_DEPTH[d]
    h = 2.0 ** -resolution
    if d == 1:
        return _iterate_1d(sys, m, h, start, interval_budget)
    return _iterate_2d(sys, m, h, resolution)


def _iterate_1d(sys, m, h, start, budget):
    exact = isinstance(sys.mode, RationalMode)
    num = (lambda c: Fraction(c)) if exact else sys.mode.to_float
    a = Fraction(sys.A[0][0]) if exact else float(sys.A[0][0])
    n = sys.n
    if start == "hull":
        hull = interval_hull(sys)
        cur = [[hull[i]] if i in hull else [] for i in range(n)]
    elif start == "unit_ball":
        one = Fraction(1) if exact else 1.0
        cur = [[(-one, one)] for _ in range(n)]
    else:
        raise ConfigurationError(f"unknown tile start {start!r}")
    digits = [[[num(p[0]) for p in sys.digits[j][i]] for j in range(n)] for i in range(n)]
    is_exact = exact
    for _ in range(m):
        nxt = []
        for i in range(n):
            pieces = []
            for j in range(n):
                for dg in digits[i][j]:        # D_ji carries color i into j
                    for lo, hi in cur[j]:
                        u, v = (lo + dg) / a, (hi + dg) / a
                        pieces.append((u, v) if u <= v else (v, u))
            tol = 0 if exact and is_exact else h
            merged = _merge(pieces, tol)
            if len(merged) > budget:
                merged = _merge(pieces, h)
                is_exact = False
                if len(merged) > budget:
                    raise BudgetError(f"tile {i + 1} needs more than {budget} intervals")
            nxt.append(merged)
        cur = nxt
    return [TileApprox(i, 1, m, h, intervals=cur[i], exact=is_exact) for i in range(n)]


def _iterate_2d(sys, m, h, g):
    Af = sys.A_float
    D = _digit_floats(sys)
    maxd = max((np.linalg.norm(p) for row in D for cell in row for p in cell), default=0.0)
    r0 = maxd * inverse_power_sum(Af) + h
    cells = int(math.ceil(2 * r0 / h))
    origin = np.array([-r0, -r0])
    centers = -r0 + h * (np.arange(cells) + 0.5)
    Y = np.stack(np.meshgrid(centers, centers, indexing="ij"), axis=-1)
    AY = Y @ Af.T
    disc = np.linalg.norm(Y, axis=-1) <= r0
    cur = [disc.copy() for _ in range(sys.n)]
    live = _live_colors(sys)
    for i in range(sys.n):
        if i not in live:
            cur[i][:] = False
    for _ in range(m):
        nxt = []
        for i in range(sys.n):
            out = np.zeros((cells, cells), dtype=bool)
            for j in range(sys.n):
                for dg in D[j][i]:
                    Z = AY - dg
                    idx = np.floor((Z - origin) / h).astype(np.int64)
                    ok = np.all((idx >= 0) & (idx < cells), axis=-1)
                    hit = np.zeros_like(out)
                    hit[ok] = cur[j][idx[ok][:, 0], idx[ok][:, 1]]
                    out |= hit
            nxt.append(out)
        cur = nxt
    return [TileApprox(i, 2, m, h, bitmap=cur[i], origin=tuple(origin)) for i in range(sys.n)]


# Measures and addresses --------------------------------------------------------------

@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    error: float
    exact: bool


def measure_estimate(tile: TileApprox | None) -> MeasureEstimate:
    """Lebesgue measure of the approximation, with an error bar for bitmaps."""
    if tile is None or tile.is_empty():
        return MeasureEstimate(0.0, 0.0, True)
    if tile.d == 1:
        total = sum(b - a for a, b in tile.intervals)
        return MeasureEstimate(float(total), 0.0, tile.exact)
    B = tile.bitmap
    pad = np.pad(B, 1)
    interior = pad[1:-1, 1:-1] & pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
    boundary = int(B.sum() - interior.sum())
    cell = tile.h ** 2
    return MeasureEstimate(float(B.sum() * cell), float(boundary * cell), False)


@dataclass(frozen=True)
class AddressPoint:
    word: tuple
    colors: tuple
    value: np.ndarray
    tail_bound: float

    @property
    def color(self) -> int:
        """Tile that contains the point: the first color of the path."""
        return self.colors[0]


def address_point(sys: InflationSystem, word, colors) -> AddressPoint:
    """Truncated address ``sum_k A^{-k} d_k`` along a color path.

    ``colors = (j_0, ..., j_m)`` with ``d_k`` in ``D[j_k][j_{k-1}]``; the
    full series lies in ``T_{j_0}``.  ``tail_bound`` bounds the distance to
    any infinite continuation.
    """
    word = [tuple(w) if isinstance(w, (tuple, list)) else (w,) for w in word]
    colors = tuple(colors)
    if len(colors) != len(word) + 1:
        raise ValidationError("colors must have one more entry than the word")
    mode = sys.mode
    for k, dk in enumerate(word, start=1):
        key = tuple(mode.coord(c) for c in dk)
        if key not in sys.digits[colors[k]][colors[k - 1]]:
            raise ValidationError(
                f"digit {dk} not in D[{colors[k] + 1}][{colors[k - 1] + 1}] at step {k}")
    Af = sys.A_float
    Ainv = np.linalg.inv(Af)
    x = np.zeros(sys.d)
    P = np.eye(sys.d)
    for dk in word:
        P = P @ Ainv
        x = x + P @ np.array([mode.to_float(mode.coord(c)) for c in dk])
    digs = [np.linalg.norm([mode.to_float(c) for c in p]) for p in sys.all_digits()]
    maxd = max(digs, default=0.0)
    tail = maxd * inverse_power_sum(Af, start=len(word) + 1)
    return AddressPoint(tuple(word), colors, x, float(tail))


# Tiling checks ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TilingReport:
    window: tuple
    histogram: dict        # covering multiplicity -> fraction of the window
    thickness: int
    defect_fraction: float
    exact: bool
    resolution: float | None = None

    def as_dict(self) -> dict:
        return {
            "window": [list(self.window[0]), list(self.window[1])],
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "thickness": self.thickness,
            "defect_fraction": self.defect_fraction,
            "exact": self.exact,
            "resolution": self.resolution,
        }


def _window_bounds(window):
    lo, hi = getattr(window, "lo", None), getattr(window, "hi", None)
    if lo is None:
        lo, hi = window
    return tuple(float(v) for v in lo), tuple(float(v) for v in hi)


def _check_extent(X, tiles, lo, hi, data_window):
    diam = max(t.diameter() for t in tiles)
    if data_window is None:
        pts = [X[i].coords() for i in range(X.n) if X[i]]
        if not pts:
            raise WindowTooSmall("no points to tile with")
        allp = np.vstack(pts)
        dlo, dhi = allp.min(axis=0), allp.max(axis=0)
    else:
        dlo, dhi = (np.array(v, dtype=float) for v in _window_bounds(data_window))
    if np.any(dlo > np.array(lo) - diam) or np.any(dhi < np.array(hi) + diam):
        raise WindowTooSmall(
            f"points must extend one tile diameter ({diam:.4g}) beyond the report window")


def check_tiling(sys: InflationSystem, X: MultisetFamily, tiles, window,
                 resolution: int | None = None, data_window=None) -> TilingReport:
    """Covering-multiplicity histogram of ``U_i (T_i + X_i)`` on ``window``.

    One dimension uses an exact sweep over interval endpoints; two
    dimensions rasterise the window at the tile resolution.
    """
    lo, hi = _window_bounds(window)
    if len(lo) != sys.d:
        raise ConfigurationError("window dimension does not match the system")
    _check_extent(X, tiles, lo, hi, data_window)
    if sys.d == 1:
        return _check_1d(sys, X, tiles, lo[0], hi[0])
    return _check_2d(sys, X, tiles, lo, hi, resolution)


def _check_1d(sys, X, tiles, a, b):
    exact = isinstance(sys.mode, RationalMode) and all(t.exact for t in tiles)
    conv = Fraction if exact else float
    A_, B_ = conv(a), conv(b)
    events = Counter()
    for i, Xi in enumerate(X):
        ivs = [(conv(u), conv(v)) for u, v in tiles[i].intervals]
        for p, mult in Xi.items():
            x = conv(p[0]) if exact else sys.mode.to_float(p[0])
            for u, v in ivs:
                s, e = max(x + u, A_), min(x + v, B_)
                if s < e:
                    events[s] += mult
                    events[e] -= mult
    hist = Counter()
    pos, level = A_, 0
    for t in sorted(events):
        if t > pos:
            hist[level] += t - pos
        level += events[t]
        pos = max(pos, t)
    if B_ > pos:
        hist[level] += B_ - pos
    L = B_ - A_
    frac = {k: float(Fraction(v) / Fraction(L)) if exact else float(v / L)
            for k, v in hist.items() if v > 0}
    thick = max(frac, key=lambda k: (frac[k], -k))
    return TilingReport(((a,), (b,)), frac, thick, 1.0 - frac[thick], exact)


def _check_2d(sys, X, tiles, lo, hi, resolution):
    h = tiles[0].h if resolution is None else 2.0 ** -resolution
    nx = max(1, int(round((hi[0] - lo[0]) / h)))
    ny = max(1, int(round((hi[1] - lo[1]) / h)))
    count = np.zeros((nx, ny), dtype=np.int64)
    for i, Xi in enumerate(X):
        t = tiles[i]
        if t.is_empty() or not Xi:
            continue
        B = t.bitmap
        if not math.isclose(t.h, h):
            raise ConfigurationError("check resolution must match the tile resolution")
        for p, mult in Xi.items():
            x = np.array([sys.mode.to_float(c) for c in p])
            off = np.round((x + np.array(t.origin) - np.array(lo)) / h).astype(int)
            r0, c0 = off
            rs, cs = max(r0, 0), max(c0, 0)
            re, ce = min(r0 + B.shape[0], nx), min(c0 + B.shape[1], ny)
            if rs >= re or cs >= ce:
                continue
            count[rs:re, cs:ce] += mult * B[rs - r0:re - r0, cs - c0:ce - c0]
    vals, cnts = np.unique(count, return_counts=True)
    total = count.size
    frac = {int(v): float(c / total) for v, c in zip(vals, cnts)}
    thick = max(frac, key=lambda k: (frac[k], -k))
    return TilingReport((lo, hi), frac, thick, 1.0 - frac[thick], False, h)


# Self-replication --------------------------------------------------------------------------

class Verdict(str, enum.Enum):
    SelfReplicating = "SelfReplicating"
    MultipleTiling = "MultipleTiling"
    PackingOnly = "PackingOnly"
    Inconclusive = "Inconclusive"


@dataclass(frozen=True)
class SelfReplicationReport:
    verdict: Verdict
    thickness: int | None
    period: int | None
    tiling: TilingReport
    measures: tuple
    notes: tuple = field(default_factory=tuple)

    @property
    def label(self) -> str:
        if self.verdict is Verdict.MultipleTiling:
            return f"MultipleTiling({self.thickness})"
        return self.verdict.value

    def as_dict(self) -> dict:
        return {"verdict": self.label, "thickness": self.thickness, "period": self.period,
                "measures": list(self.measures), "notes": list(self.notes),
                "tiling": self.tiling.as_dict()}


def self_replicating_check(sys: InflationSystem, certification, tiles, window,
                           tolerance: float = DEFECT_TOLERANCE) -> SelfReplicationReport:
    """Classify ``U_i (T_i + X_i)`` on a window for a certified discrete solution."""
    if not isinstance(certification, Discrete):
        raise StateError("self_replicating_check needs a Discrete certification")
    lo, hi = _window_bounds(window)
    diam = max(t.diameter() for t in tiles)
    reach = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))) + 2 * diam + 1
    run = solution_window(sys, certification.seed, reach, outcome=certification)
    X = run.frontier
    report = check_tiling(sys, X, tiles, (lo, hi), data_window=(
        tuple(v - diam - 0.5 for v in lo), tuple(v + diam + 0.5 for v in hi)))
    cycle = certification.seed.cycle
    period = cycle.minimal_period if cycle is not None else None
    measures = tuple(measure_estimate(t).value for t in tiles)
    positive = any(v > 0 for v in measures)
    notes = []
    p = report.thickness
    if report.defect_fraction <= tolerance and p >= 1:
        verdict = Verdict.SelfReplicating if p == 1 else Verdict.MultipleTiling
    elif p == 0 or report.defect_fraction <= tolerance:
        verdict = Verdict.PackingOnly
    elif max(report.histogram) <= (period or 1):
        verdict = Verdict.PackingOnly
    else:
        verdict = Verdict.Inconclusive
    if not positive:
        notes.append("tile approximations have measure zero at this depth")
    if period == 1 and positive and not (verdict is Verdict.SelfReplicating):
        notes.append("period-1 cycle with positive-measure tiles but thickness is not 1")
    if period is not None and p > period:
        notes.append(f"thickness {p} exceeds the cycle period {period}")
    if period is not None and period > 1 and verdict is Verdict.SelfReplicating:
        notes.append(f"thickness 1 although the cycle period is {period}")
    return SelfReplicationReport(verdict, p, period, report, measures, tuple(notes))
