"""Independent reference computations used as test oracles.

These work on plain Python numbers and explicit digit words and share no
code with the library.  They are slow and only meant for small depths.
"""
from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction


def affine_words_1d(a, cells, seed, depth):
    """Multiplicities of ``psi^depth`` applied to a 1-D seed, by explicit words.

    ``cells[i][j]`` lists the digits carrying color ``j`` into color ``i``;
    ``seed`` is a list of ``(x, color)``.  Every point of the result is the
    end of a word ``x -> a x + d_1 -> a(a x + d_1) + d_2 -> ...`` and its
    multiplicity is the number of such words.
    """
    n = len(cells)
    out = Counter()

    def walk(x, c, left):
        if left == 0:
            out[(x, c)] += 1
            return
        for i in range(n):
            for d in cells[i][c]:
                walk(a * x + d, i, left - 1)

    for x, c in seed:
        walk(x, c, depth)
    return out


def digit_set_paths(a, cells, m):
    """``D^m_ij`` by enumerating color paths ``i = l_0, ..., l_m = j``.

    Each path and digit choice contributes ``sum_t a^{t-1} d_t`` with
    ``d_t`` in ``D[l_{t-1}][l_t]``.  Works for scalar or matrix ``a`` given
    as a callable ``apply(power, d)``.
    """
    n = len(cells)
    result = {}
    for i in range(n):
        for j in range(n):
            cnt = Counter()
            for mid in itertools.product(range(n), repeat=m - 1):
                path = (i,) + mid + (j,)
                choices = [cells[path[t - 1]][path[t]] for t in range(1, m + 1)]
                for word in itertools.product(*choices):
                    cnt[sum(a ** (t - 1) * d for t, d in enumerate(word, start=1))] += 1
            result[(i, j)] = cnt
    return result


def composed_fixed_point(a, word):
    """Fixed point of ``x -> a x + d_p`` after ``... a x + d_1`` (1-D, exact)."""
    # compose affine maps x -> alpha x + beta
    alpha, beta = Fraction(1), Fraction(0)
    for d in word:
        alpha, beta = a * alpha, a * beta + d
    return beta / (1 - alpha)


def cycle_points_1d(a, cells, p):
    """All period-``p`` orbit start points over colour loops, brute force."""
    n = len(cells)
    pts = set()
    for colors in itertools.product(range(n), repeat=p):
        loop = colors + (colors[0],)
        choices = [cells[loop[t + 1]][loop[t]] for t in range(p)]
        if not all(choices):
            continue
        for word in itertools.product(*choices):
            x = composed_fixed_point(a, word)
            orbit = [(x, colors[0])]
            for t in range(p - 1):
                x = a * x + word[t]
                orbit.append((x, loop[t + 1]))
            pts.add(frozenset(orbit))
    return pts


def interval_union_length(intervals):
    """Total length of a union of closed intervals."""
    total = 0
    cur = None
    for a, b in sorted(intervals):
        if cur is None or a > cur[1]:
            if cur is not None:
                total += cur[1] - cur[0]
            cur = [a, b]
        else:
            cur[1] = max(cur[1], b)
    if cur is not None:
        total += cur[1] - cur[0]
    return total


def coverage_at(x, tiles, points):
    """How many translates ``T_i + p`` (with multiplicity) contain ``x``."""
    count = 0
    for (pt, color), mult in points.items():
        for a, b in tiles[color]:
            if pt + a <= x <= pt + b:
                count += mult
                break
    return count
