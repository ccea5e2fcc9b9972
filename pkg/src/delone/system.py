"""Inflation systems ``X_i = OR_j (A X_j + D_ij)`` and their invariants.

``digits[i][j]`` is the digit multiset carrying color-``j`` points into
color ``i`` (colors are 0-based in code, 1-based in files).  The subdivision
matrix is ``S[i][j] = |D_ij|`` counted with multiplicity.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from . import _linalg
from .errors import BudgetError, ConfigurationError, ValidationError
from .multiset import (MULTIPLICITY_CAP, RATIONAL, Multiset,
                       MultisetFamily, RationalMode, _accumulate, _check_cap,
                       affine_image, union_all)

EXPANDING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class InflationSystem:
    """Expanding matrix ``A`` and an ``n x n`` array of digit multisets."""

    A: tuple
    digits: tuple
    mode: object = RATIONAL
    digit_collisions: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        d = len(self.A)
        if d == 0 or any(len(row) != d for row in self.A):
            raise ValidationError("matrix A must be square and non-empty")
        n = len(self.digits)
        if n == 0 or any(len(row) != n for row in self.digits):
            raise ValidationError("digits must form an n x n array")
        for i, row in enumerate(self.digits):
            for j, D in enumerate(row):
                if not isinstance(D, Multiset):
                    raise ValidationError(f"digits[{i}][{j}] is not a Multiset")
                if D.mode != self.mode:
                    raise ConfigurationError(f"digits[{i}][{j}] has mode {D.mode}, system uses {self.mode}")
                if D.dim is not None and D.dim != d:
                    raise ValidationError(f"digits[{i}][{j}] has dimension {D.dim}, A is {d}x{d}")
        mods = np.abs(np.linalg.eigvals(self.A_float))
        if mods.min() <= 1 + EXPANDING_TOL:
            raise ValidationError(
                f"A is not expanding: eigenvalue moduli {np.round(mods, 12).tolist()}")

    @classmethod
    def create(cls, A, digits, mode=RATIONAL):
        """Build a system from raw numbers.

        ``A`` is a scalar (d=1) or a nested list.  ``digits`` is either a
        mapping ``(i, j) -> iterable of points`` with 0-based colors, or an
        ``n x n`` nested list of point iterables.  Missing cells are empty.
        """
        if np.isscalar(A) or isinstance(A, (Fraction, str)):
            A = [[A]]
        if isinstance(mode, RationalMode):
            Ak = tuple(tuple(mode.coord(a) for a in row) for row in A)
        else:
            Ak = tuple(tuple(float(a) for a in row) for row in A)
        if isinstance(digits, dict):
            n = 1 + max(max(i, j) for i, j in digits) if digits else 1
            cells = {(i, j): list(v) for (i, j), v in digits.items()}
        else:
            n = len(digits)
            cells = {(i, j): list(digits[i][j]) for i in range(n) for j in range(n)}
        collisions = 0
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                D = Multiset.from_values(cells.get((i, j), []), mode)
                collisions += D.collisions
                row.append(D)
            rows.append(tuple(row))
        return cls(Ak, tuple(rows), mode, collisions)

    # Derived data -----------------------------------------------------
    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def d(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return len(self.digits)

    @property
    def A_float(self) -> np.ndarray:
        return self._cached("A_float", lambda: np.array(self.A, dtype=float))

    @property
    def exact(self) -> bool:
        """True when A has exact rational entries (rational mode)."""
        return isinstance(self.mode, RationalMode)

    @property
    def integral_A(self) -> bool:
        return bool(np.all(self.A_float == np.round(self.A_float)))

    @property
    def linear(self):
        return self._cached("linear", lambda: self.mode.linear(self.A))

    def D(self, i: int, j: int) -> Multiset:
        return self.digits[i][j]

    def subdivision_matrix(self) -> np.ndarray:
        return np.array([[D.total() for D in row] for row in self.digits], dtype=np.int64)

    def det_A(self):
        """Exact determinant when A is rational or integral, else float."""
        if self.exact:
            return _linalg.det(self.A)
        if self.integral_A:
            return _linalg.det([[int(a) for a in row] for row in self.A])
        return float(np.linalg.det(self.A_float))

    def all_digits(self) -> list:
        """Underlying digit points over all cells (sorted, deduplicated)."""
        pts = set()
        for row in self.digits:
            for D in row:
                pts.update(D)
        return sorted(pts)

    def __repr__(self):
        return f"InflationSystem(d={self.d}, n={self.n}, A={self.A}, mode={self.mode})"


# Perron analysis -----------------------------------------------------------

class PerronCondition(str, enum.Enum):
    EQUAL = "Equal"
    TILES_DEFICIENT = "TilesDeficient"   # lambda(S) < |det A|
    OVERCROWDED = "Overcrowded"          # lambda(S) > |det A|


@dataclass(frozen=True)
class PerronReport:
    lambda_S: float
    det_A_abs: float
    primitive: bool
    condition: PerronCondition
    lambda_exact: object = None      # Fraction when the Perron root is rational
    char_poly: tuple = ()            # integer coefficients, leading first
    exact_decision: bool = False

    def as_dict(self) -> dict:
        return {
            "lambda_S": self.lambda_S,
            "lambda_exact": None if self.lambda_exact is None else str(self.lambda_exact),
            "det_A_abs": self.det_A_abs,
            "primitive": self.primitive,
            "condition": self.condition.value,
            "char_poly": list(self.char_poly),
            "exact_decision": self.exact_decision,
        }


def is_primitive(S) -> bool:
    """Some power of ``S`` is entrywise positive (checked up to Wielandt's bound)."""
    B = (np.asarray(S) > 0).astype(np.int64)
    n = B.shape[0]
    P = B.copy()
    for _ in range(n * n - 2 * n + 2):
        if P.all():
            return True
        P = ((P @ B) > 0).astype(np.int64)
    return bool(P.all())


def perron_eigenvalue(S, tol: float = 1e-12, max_iter: int = 200_000) -> float:
    """Spectral radius of a nonnegative matrix by power iteration.

    Iterates ``S + I`` so the dominant eigenvalue is strictly dominant in
    modulus even for periodic (imprimitive) matrices.
    """
    M = np.asarray(S, dtype=float) + np.eye(len(S))
    x = np.ones(len(S)) / len(S)
    lam = 0.0
    for _ in range(max_iter):
        y = M @ x
        s = y.sum()
        if s == 0:
            return 0.0
        y /= s
        lam_new = float((M @ y).sum())
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)) and np.abs(y - x).max() <= tol:
            lam = lam_new
            break
        x, lam = y, lam_new
    else:
        # slow convergence (defective dominant eigenvalue): defer to LAPACK
        return float(np.abs(np.linalg.eigvals(np.asarray(S, dtype=float))).max())
    return lam - 1.0


def char_poly(S) -> tuple:
    M = sympy.Matrix(np.asarray(S, dtype=object).tolist())
    return tuple(int(c) for c in M.charpoly().all_coeffs())


def exact_perron_root(S):
    """Largest real root of the characteristic polynomial of ``S``.

    Returns ``(Fraction or None, sympy root)``; the Fraction is present when
    the Perron root is rational.
    """
    x = sympy.Symbol("x")
    poly = sympy.Poly(char_poly(S), x)
    roots = poly.real_roots()
    if not roots:
        return None, None
    top = max(roots, key=lambda r: float(r.evalf(30)))
    if top.is_Rational:
        return Fraction(int(top.p), int(top.q)), top
    return None, top


def validate(sys: InflationSystem, require_primitive: bool = False,
             tol: float = 1e-9) -> PerronReport:
    """Primitivity, Perron eigenvalue and its comparison with ``|det A|``."""
    mods = np.abs(np.linalg.eigvals(sys.A_float))
    if mods.min() <= 1 + EXPANDING_TOL:
        raise ValidationError("A is not expanding")
    S = sys.subdivision_matrix()
    primitive = is_primitive(S)
    if require_primitive and not primitive:
        raise ValidationError("subdivision matrix is not primitive")
    lam = perron_eigenvalue(S)
    coeffs = char_poly(S)
    lam_exact, _ = exact_perron_root(S)
    det = sys.det_A()
    exact_det = isinstance(det, (int, Fraction))
    det_abs = abs(det)
    if exact_det:
        # |det A| is an algebraic comparison point: decide exactly.
        at_det = sum(c * Fraction(det_abs) ** k for k, c in enumerate(reversed(coeffs)))
        if at_det == 0 and det_abs >= lam - tol * max(1.0, lam):
            cond = PerronCondition.EQUAL
        elif lam_exact is not None:
            cond = (PerronCondition.OVERCROWDED if lam_exact > det_abs
                    else PerronCondition.TILES_DEFICIENT)
        else:
            cond = (PerronCondition.OVERCROWDED if lam > float(det_abs)
                    else PerronCondition.TILES_DEFICIENT)
    else:
        if abs(lam - det_abs) <= tol * max(1.0, det_abs):
            cond = PerronCondition.EQUAL
        elif lam > det_abs:
            cond = PerronCondition.OVERCROWDED
        else:
            cond = PerronCondition.TILES_DEFICIENT
    return PerronReport(
        lambda_S=lam, det_A_abs=float(det_abs), primitive=primitive, condition=cond,
        lambda_exact=lam_exact, char_poly=coeffs, exact_decision=exact_det)


# Inflation operator -------------------------------------------------------

def _check_family(sys, X):
    if not isinstance(X, MultisetFamily):
        X = MultisetFamily(X)
    if len(X) != sys.n:
        raise ConfigurationError(f"family has {len(X)} members, system has n={sys.n}")
    if X.mode != sys.mode:
        raise ConfigurationError(f"family mode {X.mode} differs from system mode {sys.mode}")
    if X.dim is not None and X.dim != sys.d:
        raise ConfigurationError(f"family has dimension {X.dim}, system has d={sys.d}")
    return X


def _inflate_dicts(sys, items_per_color) -> list:
    lin = sys.linear
    outs = [dict() for _ in range(sys.n)]
    for j, items in enumerate(items_per_color):
        if not items:
            continue
        images = [(lin(p), m) for p, m in items]
        for i in range(sys.n):
            D = sys.digits[i][j]
            if D:
                _accumulate(outs[i], images, D.items(), sys.d)
    return outs


def inflate(sys: InflationSystem, X, cap: int = MULTIPLICITY_CAP,
            threads: int = 1) -> MultisetFamily:
    """Apply the inflation operator ``X_i' = OR_j (A X_j + D_ij)`` once.

    With ``threads > 1`` the points are split into contiguous chunks of the
    canonical order and the partial results merged by multiset union, so the
    output does not depend on the schedule.
    """
    X = _check_family(sys, X)
    items = [m.sorted_items() if threads > 1 else list(m.items()) for m in X]
    if threads <= 1:
        outs = _inflate_dicts(sys, items)
    else:
        chunks = []
        for t in range(threads):
            chunks.append([it[t * len(it) // threads:(t + 1) * len(it) // threads] for it in items])
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _inflate_dicts(sys, c), chunks))
        outs = [dict() for _ in range(sys.n)]
        for part in parts:
            for i, dct in enumerate(part):
                out = outs[i]
                for p, m in dct.items():
                    out[p] = out.get(p, 0) + m
    for out in outs:
        _check_cap(out, cap)
    return MultisetFamily(Multiset._wrap(o, sys.mode, sys.d) for o in outs)


def matrix_power(sys: InflationSystem, k: int) -> tuple:
    if sys.exact:
        return _linalg.power(sys.A, k)
    if sys.integral_A:
        M = _linalg.power([[int(a) for a in row] for row in sys.A], k)
        return tuple(tuple(float(a) for a in row) for row in M)
    return tuple(tuple(row) for row in np.linalg.matrix_power(sys.A_float, k).tolist())


def iterated_digit_sets(sys: InflationSystem, m: int, budget: int = 10**6,
                        cap: int = MULTIPLICITY_CAP) -> tuple:
    """Digit multisets of the ``m``-fold iterated system.

    ``D^1 = D`` and ``D^k_ij = OR_l (D_il + A D^{k-1}_lj)``, with
    multiplicities summing over all intermediate color paths.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    cur = sys.digits
    n = sys.n
    for _ in range(m - 1):
        nxt = []
        for i in range(n):
            row = []
            for j in range(n):
                parts = [affine_image(cur[l][j], sys.A, sys.digits[i][l], cap)
                         for l in range(n)]
                row.append(union_all(parts, sys.mode))
            nxt.append(tuple(row))
        cur = tuple(nxt)
        size = sum(len(D) for row in cur for D in row)
        if size > budget:
            raise BudgetError(f"iterated digit sets exceed budget ({size} > {budget} points)")
    return cur


def iterate_system(sys: InflationSystem, N: int) -> InflationSystem:
    """The system ``(A^N, D^N)`` whose inflation operator is the N-th power."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N == 1:
        return sys
    return InflationSystem(matrix_power(sys, N), iterated_digit_sets(sys, N), sys.mode)


# Adapted norm ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AdaptedNorm:
    """``||x||_A = sum_{k>=1} rho^k ||A^{-k} x||`` truncated after ``K`` terms.

    ``scaled[k-1] = rho^k A^{-k}``.  ``tail_bound`` bounds the operator norm of
    the discarded tail; ``upper``/``lower`` bound ``||u||_A`` over Euclidean
    unit vectors.
    """

    rho: float
    scaled: np.ndarray
    tail_bound: float
    upper: float
    lower: float

    @property
    def K(self) -> int:
        return len(self.scaled)

    @classmethod
    def for_system(cls, sys: InflationSystem, rho: float | None = None,
                   rel_tol: float = 1e-12, max_terms: int = 100_000):
        A = sys.A_float
        mods = np.abs(np.linalg.eigvals(A))
        if rho is None:
            rho = (1.0 + mods.min()) / 2.0
        if not (1.0 < rho < mods.min()):
            raise ValidationError(f"rho={rho} must lie in (1, min|eig A|={mods.min()})")
        Ainv = np.linalg.inv(A)
        d = A.shape[0]
        leading = rho * np.linalg.svd(Ainv, compute_uv=False).min()
        mats = []
        opn = []
        P = np.eye(d)
        q_idx = None
        K = None
        tail = math.inf
        for k in range(1, max_terms + 1):
            P = rho * (P @ Ainv)
            mats.append(P)
            opn.append(np.linalg.norm(P, 2))
            if q_idx is None and opn[-1] < 1.0:
                q_idx = k
            if q_idx is not None and k >= 2 * q_idx:
                # tail beyond K = k - q_idx, using ||P_{K+r+jq}|| <= ||P_{K+r}|| q^j
                Kc = k - q_idx
                q = opn[q_idx - 1]
                tail = sum(opn[Kc:k]) / (1.0 - q)
                if tail <= rel_tol * leading:
                    K = Kc
                    break
        if K is None:
            raise ValidationError("adapted norm series did not converge within max_terms")
        scaled = np.array(mats[:K])
        if d == 1:
            c = float(np.abs(scaled[:, 0, 0]).sum())
            upper = lower = c
        else:
            upper = float(sum(opn[:K]) + tail)
            lower = float(leading)
        return cls(float(rho), scaled, float(tail), upper, lower)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[1] == 1:
            out = np.abs(X[:, 0]) * self.upper
        else:
            out = np.linalg.norm(np.einsum("kij,nj->kni", self.scaled, X), axis=2).sum(axis=0)
        return out[0] if single else out

    def of_point(self, p, mode) -> float:
        return float(self(np.array([mode.to_float(c) for c in p])))


def adapted_norm(norm: AdaptedNorm, x) -> float:
    """Evaluate the adapted norm at one float coordinate vector."""
    return float(norm(np.atleast_1d(np.asarray(x, dtype=float))))


def generation_radius(sys: InflationSystem, norm: AdaptedNorm, safety: float = 1.1) -> float:
    """Radius ``(rho+1)/(rho-1) * max ||d||_A``, inflated by ``safety``.

    Any radius at least the unscaled value keeps the contraction property
    used by the certifier, so overshooting is sound.
    """
    pts = sys.all_digits()
    if not pts:
        return 0.0
    coords = np.array([[sys.mode.to_float(c) for c in p] for p in pts])
    C = float(np.max(norm(coords)))
    return (norm.rho + 1.0) / (norm.rho - 1.0) * C * safety
