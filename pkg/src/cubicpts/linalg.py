"""Exact linear algebra over Z, Q and F_p.

Everything here works on plain lists of Python ints or Fractions so that
arbitrarily large entries stay exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np


def valuation(n: int, p: int) -> int | None:
    """p-adic valuation of a nonzero integer; None for zero."""
    if n == 0:
        return None
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix by fraction-free elimination."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    if any(len(r) != n for r in a):
        raise ValueError("matrix is not square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q with left-to-right pivot order."""
    a = [[Fraction(x) for x in r] for r in rows]
    if not a:
        return a, []
    ncols = len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(a):
            break
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def primitive(vec: Sequence) -> list[int]:
    """Scale a rational vector to a primitive integer vector, first nonzero entry positive."""
    fr = [Fraction(x) for x in vec]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    if lead < 0:
        ints = [-x for x in ints]
    return ints


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[int]]:
    """Basis of the right kernel over Q as primitive integer vectors.

    The basis is ordered by free column, so the first vector is the one
    attached to the leftmost non-pivot column.
    """
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(primitive(v))
    return basis


def rank_q(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def pivot_columns_mod_p(rows: Sequence[Sequence[int]], p: int) -> list[int]:
    """Greedy pivot columns of a matrix over F_p (left to right)."""
    if not rows:
        return []
    if p >= 2**31:
        raise ValueError("modulus too large for int64 elimination")
    a = np.array([[int(x) % p for x in r] for r in rows], dtype=np.int64)
    nrows, ncols = a.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, p) % p
        below = a[r + 1:, c].copy()
        if below.any():
            a[r + 1:] = (a[r + 1:] - np.outer(below, a[r])) % p
        pivots.append(c)
        r += 1
    return pivots


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    return len(pivot_columns_mod_p(rows, p))


def lagrange_at_zero(xs: Sequence[int], ys: Sequence) -> Fraction:
    """Value at 0 of the interpolating polynomial through (xs, ys)."""
    total = Fraction(0)
    for i, xi in enumerate(xs):
        term = Fraction(ys[i])
        for j, xj in enumerate(xs):
            if j != i:
                term *= Fraction(-xj, xi - xj)
        total += term
    return total
