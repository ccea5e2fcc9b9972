"""Multisets of points in R^d with exact or epsilon-grid coordinates.

Points are stored as tuples of *coordinate keys* whose meaning depends on the
scalar mode:

* :class:`RationalMode` keys are ``int`` or :class:`fractions.Fraction`
  values, so equality is exact and canonical.
* :class:`GridMode` keys are integers ``k`` standing for the real number
  ``k * epsilon``.  Two reals are identified iff they snap to the same grid
  cell, which keeps identification transitive and hashing O(1).

A :class:`Multiset` maps point keys to positive multiplicities.  Union adds
multiplicities and intersection takes the pointwise minimum, matching
``collections.Counter``'s ``+`` and ``&``.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, MultiplicityOverflow

#: Largest multiplicity accepted before a blow-up is reported.
MULTIPLICITY_CAP = 2**63 - 1


def _normalize(v):
    if type(v) is Fraction and v.denominator == 1:
        return v.numerator
    return v


@dataclass(frozen=True)
class RationalMode:
    """Exact rational coordinates."""

    name = "rational"

    def coord(self, value):
        if isinstance(value, bool):
            raise ConfigurationError(f"not a scalar: {value!r}")
        if isinstance(value, int):
            return value
        if isinstance(value, Fraction):
            return _normalize(value)
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ConfigurationError(f"non-finite scalar {value!r}")
            return _normalize(Fraction(repr(value)))
        if isinstance(value, str):
            try:
                return _normalize(Fraction(value.strip()))
            except ValueError:
                raise ConfigurationError(
                    f"{value!r} is not a rational scalar") from None
        try:
            return _normalize(Fraction(str(value)))
        except ValueError:
            raise ConfigurationError(f"{value!r} is not a rational scalar") from None

    def to_float(self, c) -> float:
        return float(c)

    def format(self, c) -> str:
        return str(c)

    def parse(self, text: str):
        return self.coord(text)

    def is_integral(self, c) -> bool:
        return _normalize(c).__class__ is int

    def linear(self, matrix):
        """Return a function applying ``matrix`` to point keys."""
        rows = tuple(tuple(self.coord(a) for a in row) for row in matrix)
        if len(rows) == 1:
            a = rows[0][0]
            return lambda p: (_normalize(a * p[0]),)
        return lambda p: tuple(
            _normalize(sum(a * c for a, c in zip(row, p))) for row in rows)

    def __str__(self):
        return "rational"


@dataclass(frozen=True)
class GridMode:
    """Float coordinates identified on an epsilon grid."""

    epsilon: float = 1e-9
    name = "float"

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ConfigurationError("epsilon must be a positive real")

    def coord(self, value):
        if isinstance(value, bool):
            raise ConfigurationError(f"not a scalar: {value!r}")
        try:
            x = float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{value!r} is not a real scalar") from None
        if not math.isfinite(x):
            raise ConfigurationError(f"non-finite scalar {value!r}")
        return round(x / self.epsilon)

    def to_float(self, c) -> float:
        return c * self.epsilon

    def format(self, c) -> str:
        return repr(c * self.epsilon)

    def parse(self, text: str):
        return self.coord(text)

    def linear(self, matrix):
        """Apply ``matrix`` (given in real units) to grid keys.

        Linear maps commute with the grid scaling, so the map acts on keys
        directly; integer matrices keep the arithmetic exact.
        """
        rows = [[float(a) for a in row] for row in matrix]
        if all(a.is_integer() for row in rows for a in row):
            irows = tuple(tuple(int(a) for a in row) for row in rows)
            if len(irows) == 1:
                a = irows[0][0]
                return lambda p: (a * p[0],)
            return lambda p: tuple(sum(a * c for a, c in zip(row, p)) for row in irows)
        frows = tuple(tuple(row) for row in rows)
        if len(frows) == 1:
            a = frows[0][0]
            return lambda p: (round(a * p[0]),)
        return lambda p: tuple(round(sum(a * c for a, c in zip(row, p))) for row in frows)

    def __str__(self):
        return f"float(eps={self.epsilon!r})"


RATIONAL = RationalMode()


def mode_from_name(name: str, epsilon: float | None = None):
    if name == "rational":
        return RATIONAL
    if name == "float":
        return GridMode(1e-9 if epsilon is None else float(epsilon))
    raise ConfigurationError(f"unknown arithmetic {name!r}")


def make_point(value, mode):
    """Convert a scalar (d=1) or a coordinate sequence to a point key."""
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(mode.coord(v) for v in value)
    return (mode.coord(value),)


def snap_points(values, mode):
    """Snap raw coordinates to point keys.

    Returns ``(points, collisions)`` where ``collisions`` counts distinct raw
    inputs that landed on an already occupied key.  Always zero in rational
    mode.
    """
    points = []
    seen = {}
    collisions = 0
    for v in values:
        p = make_point(v, mode)
        raw = tuple(np.atleast_1d(np.asarray(v, dtype=object)).tolist())
        if p in seen and seen[p] != raw:
            collisions += 1
        seen.setdefault(p, raw)
        points.append(p)
    return points, collisions


class Multiset(Mapping):
    """Immutable finite multiset of points.

    ``counts`` is either a mapping ``point -> multiplicity`` or an iterable
    of points (each occurrence adds one).  Points must already be keys in
    ``mode``; use :meth:`from_values` for raw numbers.
    """

    __slots__ = ("_counts", "mode", "collisions", "_dim")

    def __init__(self, counts=(), mode=RATIONAL, *, collisions: int = 0):
        data: dict = {}
        if isinstance(counts, Mapping):
            for p, m in counts.items():
                if not isinstance(m, (int, np.integer)) or m < 0:
                    raise ValueError(f"multiplicity must be a non-negative int, got {m!r}")
                if m:
                    data[tuple(p)] = data.get(tuple(p), 0) + int(m)
        else:
            for p in counts:
                p = tuple(p)
                data[p] = data.get(p, 0) + 1
        self._counts = data
        self.mode = mode
        self.collisions = collisions
        dims = {len(p) for p in data}
        if len(dims) > 1:
            raise ConfigurationError(f"mixed point dimensions {sorted(dims)}")
        self._dim = dims.pop() if dims else None

    @classmethod
    def _wrap(cls, data: dict, mode, dim=None):
        # trusted constructor: data already canonical, no zero entries
        obj = cls.__new__(cls)
        obj._counts = data
        obj.mode = mode
        obj.collisions = 0
        obj._dim = dim if dim is not None else (len(next(iter(data))) if data else None)
        return obj

    @classmethod
    def from_values(cls, values: Iterable, mode=RATIONAL, multiplicities=None):
        """Build from raw scalars (d=1) or coordinate sequences."""
        points, collisions = snap_points(list(values), mode)
        if multiplicities is None:
            ms = Multiset(points, mode, collisions=collisions)
            return ms
        data: dict = {}
        for p, m in zip(points, multiplicities, strict=True):
            data[p] = data.get(p, 0) + int(m)
        return Multiset(data, mode, collisions=collisions)

    # Mapping protocol -------------------------------------------------
    def __getitem__(self, point):
        return self._counts[tuple(point)]

    def __iter__(self):
        return iter(self._counts)

    def __len__(self):
        return len(self._counts)

    def __contains__(self, point):
        return tuple(point) in self._counts

    def __eq__(self, other):
        if not isinstance(other, Multiset):
            return NotImplemented
        return self.mode == other.mode and self._counts == other._counts

    def __hash__(self):
        return hash((self.mode, frozenset(self._counts.items())))

    def __repr__(self):
        body = ", ".join(
            f"{self._fmt(p)}:{m}" for p, m in self.sorted_items()[:12])
        more = ", ..." if len(self) > 12 else ""
        return f"Multiset({{{body}{more}}}, mode={self.mode})"

    def _fmt(self, p):
        cs = [self.mode.format(c) for c in p]
        return cs[0] if len(cs) == 1 else "(" + ", ".join(cs) + ")"

    # Queries ------------------------------------------------------------
    @property
    def dim(self):
        return self._dim

    def multiplicity(self, point) -> int:
        return self._counts.get(tuple(point), 0)

    def total(self) -> int:
        """Total multiplicity (cardinality counting multiplicity)."""
        return sum(self._counts.values())

    def max_multiplicity(self) -> int:
        return max(self._counts.values(), default=0)

    def is_ordinary(self) -> bool:
        return all(m == 1 for m in self._counts.values())

    def support(self) -> frozenset:
        return frozenset(self._counts)

    def sorted_items(self) -> list:
        """Entries in canonical (lexicographic) order."""
        return sorted(self._counts.items())

    def sorted_points(self) -> list:
        return sorted(self._counts)

    def coords(self, points=None) -> np.ndarray:
        """Float coordinates as an ``(N, d)`` array (canonical order)."""
        pts = self.sorted_points() if points is None else points
        if not pts:
            return np.zeros((0, self._dim or 1))
        tf = self.mode.to_float
        return np.array([[tf(c) for c in p] for p in pts], dtype=float)

    def values(self):
        return self._counts.values()

    def items(self):
        return self._counts.items()

    def as_dict(self) -> dict:
        return dict(self._counts)

    # Operators ----------------------------------------------------------
    def __add__(self, other):
        return union(self, other)

    def __and__(self, other):
        return intersect(self, other)

    def __le__(self, other):
        return contains(other, self)

    def __ge__(self, other):
        return contains(self, other)


def _check_modes(*sets):
    modes = {s.mode for s in sets}
    if len(modes) > 1:
        raise ConfigurationError(f"scalar mode mismatch: {sorted(map(str, modes))}")
    dims = {s.dim for s in sets if s.dim is not None}
    if len(dims) > 1:
        raise ConfigurationError(f"dimension mismatch: {sorted(dims)}")


def union(X: Multiset, Y: Multiset) -> Multiset:
    """Multiset union: multiplicities add."""
    _check_modes(X, Y)
    if len(X) < len(Y):
        X, Y = Y, X
    data = dict(X._counts)
    for p, m in Y._counts.items():
        data[p] = data.get(p, 0) + m
    return Multiset._wrap(data, X.mode, X.dim or Y.dim)


def union_all(sets, mode=None) -> Multiset:
    sets = list(sets)
    if not sets:
        return Multiset((), RATIONAL if mode is None else mode)
    _check_modes(*sets)
    data: dict = {}
    for s in sets:
        for p, m in s._counts.items():
            data[p] = data.get(p, 0) + m
    return Multiset._wrap(data, sets[0].mode)


def intersect(X: Multiset, Y: Multiset) -> Multiset:
    """Multiset intersection: pointwise minimum of multiplicities."""
    _check_modes(X, Y)
    if len(X) > len(Y):
        X, Y = Y, X
    data = {}
    for p, m in X._counts.items():
        k = Y._counts.get(p)
        if k:
            data[p] = min(m, k)
    return Multiset._wrap(data, X.mode)


def difference(X: Multiset, Y: Multiset) -> Multiset:
    """Truncated difference ``max(m_X - m_Y, 0)``."""
    _check_modes(X, Y)
    data = {}
    for p, m in X._counts.items():
        r = m - Y._counts.get(p, 0)
        if r > 0:
            data[p] = r
    return Multiset._wrap(data, X.mode)


def contains(X: Multiset, Y: Multiset) -> bool:
    """True iff ``Y`` is a sub-multiset of ``X``."""
    _check_modes(X, Y)
    get = X._counts.get
    return all(get(p, 0) >= m for p, m in Y._counts.items())


def _as_matrix(A, mode):
    if np.isscalar(A) or isinstance(A, Fraction):
        return ((A,),)
    return tuple(tuple(row) for row in A)


def affine_image(X: Multiset, A, D: Multiset, cap: int = MULTIPLICITY_CAP) -> Multiset:
    """The multiset ``A X + D``: every ``A x + d`` with multiplicity ``m(x) m(d)``."""
    _check_modes(X, D)
    matrix = _as_matrix(A, X.mode)
    dim = len(matrix)
    if any(len(row) != dim for row in matrix):
        raise ConfigurationError("A must be square")
    for s in (X, D):
        if s.dim is not None and s.dim != dim:
            raise ConfigurationError(f"dimension mismatch: A is {dim}x{dim}, points have d={s.dim}")
    out: dict = {}
    if not X or not D:
        return Multiset._wrap(out, X.mode)
    lin = X.mode.linear(matrix)
    _accumulate(out, [(lin(p), m) for p, m in X._counts.items()], D._counts.items(), dim)
    _check_cap(out, cap)
    return Multiset._wrap(out, X.mode, dim)


def _accumulate(out: dict, images, ditems, dim):
    # images: [(A x, m(x))]; adds A x + d with multiplicity m(x) m(d)
    get = out.get
    if dim == 1:
        for (d,), c in ditems:
            for (q,), m in images:
                key = (q + d,)
                out[key] = get(key, 0) + m * c
    else:
        for d, c in ditems:
            for q, m in images:
                key = tuple(a + b for a, b in zip(q, d))
                out[key] = get(key, 0) + m * c


def _check_cap(out: dict, cap: int):
    if out:
        worst = max(out.values())
        if worst > cap:
            p = max(out, key=out.__getitem__)
            raise MultiplicityOverflow(p, worst, cap)


def translate(X: Multiset, v) -> Multiset:
    shift = tuple(v)
    data = {tuple(a + b for a, b in zip(p, shift)): m for p, m in X._counts.items()}
    return Multiset._wrap(data, X.mode, X.dim)


def restrict_to_ball(X: Multiset, norm, radius: float) -> Multiset:
    """Entries with ``norm(x) <= radius``, multiplicities kept.

    ``norm`` maps an ``(N, d)`` float array to ``N`` norms (see
    :func:`euclidean` and :class:`delone.system.AdaptedNorm`).
    """
    if radius == math.inf or not X:
        return X
    pts = list(X._counts)
    vals = np.asarray(norm(X.coords(pts)), dtype=float)
    data = {p: X._counts[p] for p, v in zip(pts, vals) if v <= radius}
    return Multiset._wrap(data, X.mode, X.dim)


def restrict(X: Multiset, predicate) -> Multiset:
    """Entries whose float coordinates satisfy ``predicate`` (vectorised)."""
    if not X:
        return X
    pts = list(X._counts)
    keep = np.asarray(predicate(X.coords(pts)), dtype=bool)
    return Multiset._wrap({p: X._counts[p] for p, k in zip(pts, keep) if k}, X.mode, X.dim)


def euclidean(points: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.atleast_2d(points), axis=-1)


class MultisetFamily(tuple):
    """Fixed-length vector ``(X_1, ..., X_n)`` of multisets sharing a mode."""

    def __new__(cls, members: Iterable[Multiset]):
        members = tuple(members)
        if not members:
            raise ConfigurationError("a family needs at least one member")
        _check_modes(*members)
        return super().__new__(cls, members)

    @classmethod
    def empty(cls, n: int, mode=RATIONAL):
        return cls(Multiset((), mode) for _ in range(n))

    @classmethod
    def from_values(cls, values_per_color, mode=RATIONAL):
        return cls(Multiset.from_values(v, mode) for v in values_per_color)

    @property
    def mode(self):
        return self[0].mode

    @property
    def n(self) -> int:
        return len(self)

    @property
    def dim(self):
        for m in self:
            if m.dim is not None:
                return m.dim
        return None

    def __add__(self, other):
        return self.union(other)

    def union(self, other: "MultisetFamily") -> "MultisetFamily":
        _check_family(self, other)
        return MultisetFamily(union(a, b) for a, b in zip(self, other))

    def intersect(self, other: "MultisetFamily") -> "MultisetFamily":
        _check_family(self, other)
        return MultisetFamily(intersect(a, b) for a, b in zip(self, other))

    def difference(self, other: "MultisetFamily") -> "MultisetFamily":
        _check_family(self, other)
        return MultisetFamily(difference(a, b) for a, b in zip(self, other))

    def contains(self, other: "MultisetFamily") -> bool:
        _check_family(self, other)
        return all(contains(a, b) for a, b in zip(self, other))

    def restrict_to_ball(self, norm, radius) -> "MultisetFamily":
        return MultisetFamily(restrict_to_ball(m, norm, radius) for m in self)

    def total(self) -> int:
        return sum(m.total() for m in self)

    def totals(self) -> list:
        return [m.total() for m in self]

    def max_multiplicity(self) -> int:
        return max(m.max_multiplicity() for m in self)

    def point_count(self) -> int:
        return sum(len(m) for m in self)

    def vertices(self):
        """All ``(point, color)`` pairs, colors 0-based, canonical order."""
        return [(p, i) for i, m in enumerate(self) for p in m.sorted_points()]

    def is_empty(self) -> bool:
        return all(len(m) == 0 for m in self)

    def __repr__(self):
        return "MultisetFamily(" + ", ".join(map(repr, self)) + ")"


def _check_family(a, b):
    if len(a) != len(b):
        raise ConfigurationError(f"family length mismatch: {len(a)} vs {len(b)}")
