"""Window-scoped metric diagnostics for multiset point families.

Every report describes a finite window only.  Nothing here certifies a
global property of an infinite set.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from . import _linalg
from .cycles import GenerationRun
from .errors import ConfigurationError, StateError, WindowTooSmall
from .multiset import Multiset, RationalMode
from .system import InflationSystem, iterated_digit_sets, perron_eigenvalue


@dataclass(frozen=True)
class Box:
    """Axis-aligned window ``[lo_1, hi_1] x ... x [lo_d, hi_d]``."""

    lo: tuple
    hi: tuple

    @classmethod
    def parse(cls, text: str) -> "Box":
        """``"a,b"`` for an interval, ``"a,b,c,d"`` for ``[a,b] x [c,d]``."""
        try:
            vals = [float(t) for t in text.split(",")]
        except ValueError:
            raise ConfigurationError(f"bad window {text!r}") from None
        if len(vals) not in (2, 4) or any(not math.isfinite(v) for v in vals):
            raise ConfigurationError(f"window needs 2 or 4 finite numbers, got {text!r}")
        lo, hi = tuple(vals[0::2]), tuple(vals[1::2])
        if any(a > b for a, b in zip(lo, hi)):
            raise ConfigurationError(f"empty window {text!r}")
        return cls(lo, hi)

    @classmethod
    def interval(cls, a, b) -> "Box":
        return cls((float(a),), (float(b),))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all((pts >= np.array(self.lo)) & (pts <= np.array(self.hi)), axis=1)

    def diameter(self) -> float:
        return float(np.linalg.norm(np.array(self.hi) - np.array(self.lo)))

    def __str__(self):
        return ",".join(f"{a!r},{b!r}" for a, b in zip(self.lo, self.hi))


def _window_points(X: Multiset, window: Box | None):
    if not X:
        return np.zeros((0, window.dim if window else 1)), np.zeros(0, dtype=np.int64)
    pts = X.sorted_points()
    coords = X.coords(pts)
    mult = np.array([X[p] for p in pts], dtype=np.int64)
    if window is not None:
        if window.dim != coords.shape[1]:
            raise ConfigurationError(f"window is {window.dim}-D, points are {coords.shape[1]}-D")
        keep = window.contains(coords)
        coords, mult = coords[keep], mult[keep]
    return coords, mult


# Discreteness -----------------------------------------------------------------

@dataclass(frozen=True)
class DiscretenessReport:
    r: float
    max_count_per_ball: int         # sup over open r-balls, counting multiplicity
    exact_sup: bool                 # True when the sup is exact over all centers
    data_centered_max: int          # max over balls centered at data points
    data_centered_max_2r: int       # same at radius 2r (upper bound for any center)
    points: int
    window: str

    @property
    def uniformly_discrete(self) -> bool:
        return self.max_count_per_ball <= 1

    @property
    def weakly_uniform_bound(self) -> int:
        return self.max_count_per_ball

    def as_dict(self) -> dict:
        out = asdict(self)
        out["uniformly_discrete"] = self.uniformly_discrete
        out["weakly_uniform_bound"] = self.weakly_uniform_bound
        return out


def _sliding_max(x, w, width, strict=True):
    """Max total weight of sorted ``x`` inside a window ``[x_a, x_a + width)``."""
    if len(x) == 0:
        return 0
    cum = np.concatenate([[0], np.cumsum(w)])
    side = "left" if strict else "right"
    ends = np.searchsorted(x, x + width, side=side)
    return int((cum[ends] - cum[:-1]).max())


def _centered_counts(coords, mult, r):
    if len(coords) == 0:
        return 0
    tree = cKDTree(coords)
    # open ball: shrink by a relative hair so boundary points are excluded
    nbrs = tree.query_ball_point(coords, r * (1 - 1e-12))
    return int(max(mult[idx].sum() for idx in nbrs))


def discreteness_scan(X: Multiset, r: float, window: Box | None = None) -> DiscretenessReport:
    """Largest multiplicity-weighted count in an open ball of radius ``r``.

    In one dimension the supremum over all centers is exact: an open
    interval of length ``2r`` holds a set of points iff their spread is
    below ``2r``.  In higher dimensions the report gives the data-centered
    maximum at ``r`` (reported as the count) and at ``2r``, which bounds
    the supremum over all centers.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    coords, mult = _window_points(X, window)
    wtxt = str(window) if window is not None else "all"
    if len(coords) == 0:
        return DiscretenessReport(r, 0, True, 0, 0, 0, wtxt)
    c_r = _centered_counts(coords, mult, r)
    c_2r = _centered_counts(coords, mult, 2 * r)
    if coords.shape[1] == 1:
        order = np.argsort(coords[:, 0], kind="stable")
        sup = _sliding_max(coords[order, 0], mult[order], 2 * r)
        return DiscretenessReport(r, sup, True, c_r, c_2r, len(coords), wtxt)
    return DiscretenessReport(r, c_r, False, c_r, c_2r, len(coords), wtxt)


# Relative denseness ---------------------------------------------------------------

@dataclass(frozen=True)
class DensenessReport:
    R_cov: float                 # largest empty-ball radius found in the window
    exact: bool
    resolution: float | None
    window: str
    empty: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def denseness_scan(X: Multiset, window: Box, resolution: float | None = None) -> DensenessReport:
    """Covering radius ``sup_{y in window} dist(y, X)``.

    Distances use every point of ``X``, including points just outside the
    window.  Exact in one dimension; in two dimensions the sup is taken over
    a grid of spacing ``resolution`` (error at most ``resolution/sqrt 2``);
    higher dimensions use the same grid and label the value a lower bound.
    """
    if not X:
        return DensenessReport(math.inf, True, None, str(window), empty=True)
    coords = X.coords(X.sorted_points())
    if coords.shape[1] != window.dim:
        raise ConfigurationError(f"window is {window.dim}-D, points are {coords.shape[1]}-D")
    if window.dim == 1:
        a, b = window.lo[0], window.hi[0]
        xs = np.unique(coords[:, 0])
        # dist(y, X) peaks at the window ends or at midpoints of consecutive points
        cands = [float(np.abs(xs - e).min()) for e in (a, b)]
        mids = (xs[:-1] + xs[1:]) / 2
        sel = (mids >= a) & (mids <= b)
        if sel.any():
            cands.append(float(((xs[1:] - xs[:-1]) / 2)[sel].max()))
        return DensenessReport(float(max(cands)), True, None, str(window))
    diam = window.diameter()
    h = resolution if resolution is not None else diam / 400
    axes = [np.arange(lo, hi + h / 2, h) for lo, hi in zip(window.lo, window.hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, window.dim)
    dist, _ = cKDTree(coords).query(mesh)
    return DensenessReport(float(dist.max()), False, float(h), str(window))


# Trends over nested windows ---------------------------------------------------------

def stabilizes(values, rel_tol: float = 1e-9, tail: int = 3) -> bool:
    """True when the last ``tail`` values of a nondecreasing series agree."""
    vals = list(values)
    if len(vals) < tail:
        return False
    last = vals[-tail:]
    return max(last) - min(last) <= rel_tol * max(1.0, abs(max(last)))


def nested_windows(radius: float, dim: int, count: int = 4) -> list:
    """Centered boxes of half-widths ``radius * (i+1)/count``."""
    out = []
    for i in range(count):
        h = radius * (i + 1) / count
        out.append(Box((-h,) * dim, (h,) * dim))
    return out


def discreteness_trend(X: Multiset, r: float, windows) -> list:
    return [discreteness_scan(X, r, w).max_count_per_ball for w in windows]


def denseness_trend(X: Multiset, windows) -> list:
    return [denseness_scan(X, w).R_cov for w in windows]


# Growth counters ---------------------------------------------------------------

@dataclass(frozen=True)
class GrowthCounter:
    M: tuple                  # M[i][k]
    fitted_rate: float | None
    lambda_S: float
    det_A_abs: float
    k_max: int

    def as_dict(self) -> dict:
        return asdict(self)


def _inverse_power_test(sys, k):
    """Membership test ``||A^{-k} x|| <= 1`` on point keys (exact in rational mode)."""
    mode = sys.mode
    if isinstance(mode, RationalMode):
        Minv = _linalg.inverse(_linalg.power(sys.A, k))

        def inside(p):
            y = _linalg.matvec(Minv, p)
            return sum(Fraction(c) ** 2 for c in y) <= 1
        return inside
    Minv = np.linalg.inv(np.linalg.matrix_power(sys.A_float, k))

    def inside_f(p):
        y = Minv @ np.array([mode.to_float(c) for c in p])
        return float(y @ y) <= 1.0 + 1e-12
    return inside_f


def growth_counter(sys: InflationSystem, run: GenerationRun, k_max: int) -> GrowthCounter:
    """Multiplicity-weighted counts of ``X_i`` inside the ellipsoids ``A^k(B_1)``.

    Needs a run with a certified window (see :func:`delone.cycles.solution_window`);
    every ellipsoid must fit inside it.
    """
    lam = perron_eigenvalue(sys.subdivision_matrix())
    detabs = abs(float(sys.det_A()))
    fam = run.frontier
    if fam.is_empty():
        return GrowthCounter(tuple((0,) * (k_max + 1) for _ in range(sys.n)), None, lam, detabs, k_max)
    if run.valid_radius is None:
        raise StateError("growth_counter needs a run with a certified window")
    known = run.known_euclidean_radius()
    need = np.linalg.norm(np.linalg.matrix_power(sys.A_float, k_max), 2)
    if need > known:
        raise WindowTooSmall(f"A^{k_max}(B_1) has radius {need:.6g}, window only {known:.6g}")
    M = [[0] * (k_max + 1) for _ in range(sys.n)]
    for k in range(k_max + 1):
        inside = _inverse_power_test(sys, k)
        for i, X in enumerate(fam):
            M[i][k] = sum(m for p, m in X.items() if inside(p))
    tot = [sum(M[i][k] for i in range(sys.n)) for k in range(k_max + 1)]
    ks = [k for k in range(k_max + 1) if tot[k] > 0]
    rate = None
    if len(ks) >= 2 and ks[-1] > ks[0]:
        rate = (tot[ks[-1]] / tot[ks[0]]) ** (1.0 / (ks[-1] - ks[0]))
    return GrowthCounter(tuple(tuple(r) for r in M), rate, lam, detabs, k_max)


# Digit sets ------------------------------------------------------------------------

@dataclass(frozen=True)
class DigitCellReport:
    m: int
    i: int
    j: int
    size: int
    is_ordinary: bool
    min_separation: float | None
    max_per_ball: int


def digit_equidiscreteness(sys: InflationSystem, m_max: int, r: float = 1.0,
                           budget: int = 10**6) -> list:
    """Ordinariness and spacing of the iterated digit multisets ``D^m_ij``."""
    out = []
    for m in range(1, m_max + 1):
        cells = iterated_digit_sets(sys, m, budget=budget)
        for i in range(sys.n):
            for j in range(sys.n):
                D = cells[i][j]
                sep = None
                if len(D) >= 2:
                    c = D.coords(D.sorted_points())
                    dist, _ = cKDTree(c).query(c, k=2)
                    sep = float(dist[:, 1].min())
                ball = discreteness_scan(D, r).max_count_per_ball if D else 0
                out.append(DigitCellReport(m, i, j, D.total(), D.is_ordinary(), sep, ball))
    return out
