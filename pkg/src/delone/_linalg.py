"""Exact rational linear algebra on tuples of Fractions, via sympy."""
from __future__ import annotations

from fractions import Fraction

import sympy


def _norm(v):
    return v.numerator if v.denominator == 1 else v


def to_sympy(matrix) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(Fraction(a).numerator, Fraction(a).denominator)
                          for a in row] for row in matrix])


def from_sympy(M: sympy.Matrix) -> tuple:
    return tuple(tuple(_norm(Fraction(int(M[i, j].p), int(M[i, j].q)))
                       for j in range(M.cols)) for i in range(M.rows))


def det(matrix) -> Fraction:
    d = to_sympy(matrix).det()
    return Fraction(int(d.p), int(d.q))


def inverse(matrix) -> tuple:
    return from_sympy(to_sympy(matrix).inv())


def matmul(A, B) -> tuple:
    return tuple(tuple(_norm(Fraction(sum(a * b for a, b in zip(row, col))))
                       for col in zip(*B)) for row in A)


def matvec(A, v) -> tuple:
    return tuple(_norm(Fraction(sum(a * c for a, c in zip(row, v)))) for row in A)


def identity(d: int) -> tuple:
    return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))


def power(A, k: int) -> tuple:
    result = identity(len(A))
    base = A
    while k:
        if k & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        k >>= 1
    return result


def solve(A, b) -> tuple:
    x = to_sympy(A).LUsolve(to_sympy([[v] for v in b]))
    return tuple(_norm(Fraction(int(x[i].p), int(x[i].q))) for i in range(x.rows))
