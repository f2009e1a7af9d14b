"""Rational points of bounded naive height on a plane cubic.

For every pair (x0, x1) in the box the cubic restricts to an integer
polynomial g(t) = F(x0, x1, t).  Its integer roots are located exactly: the
real critical points of g split [-B, B] into monotone pieces, and each piece
is searched by vectorized integer bisection with exact int64 (or Python int)
evaluation.  The critical points are only used to place the splits, so the
few integers next to each split are checked explicitly.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .forms import CubicForm, coeff_height, require_smooth

WORKERS_ENV = "CUBICPTS_WORKERS"


@dataclass(frozen=True, order=True)
class PlanePoint:
    x0: int
    x1: int
    x2: int

    def __post_init__(self):
        if (self.x0, self.x1, self.x2) == (0, 0, 0):
            raise ValueError("(0, 0, 0) is not a projective point")

    @classmethod
    def normalized(cls, x0: int, x1: int, x2: int) -> "PlanePoint":
        x0, x1, x2 = int(x0), int(x1), int(x2)
        g = gcd(gcd(x0, x1), x2)
        if g == 0:
            raise ValueError("(0, 0, 0) is not a projective point")
        if (x0 or x1 or x2) < 0:
            g = -g
        return cls(x0 // g, x1 // g, x2 // g)

    @property
    def coords(self) -> tuple[int, int, int]:
        return (self.x0, self.x1, self.x2)

    @property
    def height(self) -> int:
        return max(abs(self.x0), abs(self.x1), abs(self.x2))

    def is_normalized(self) -> bool:
        return self == PlanePoint.normalized(*self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __str__(self) -> str:
        return f"[{self.x0},{self.x1},{self.x2}]"


def parse_point(text: str) -> PlanePoint:
    parts = [p for p in text.replace("[", " ").replace("]", " ").replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ValueError(f"expected three coordinates, got {text!r}")
    return PlanePoint.normalized(*(int(p) for p in parts))


# --- the sieve ---------------------------------------------------------------

def _row_coefficients(c: Sequence[int], x0: int, x1):
    """Coefficients (c3, c2, c1, c0) of F(x0, x1, t) as polynomials in t."""
    c3 = c[9] + 0 * x1
    c2 = c[5] * x0 + c[8] * x1
    c1 = c[2] * x0 * x0 + c[4] * x0 * x1 + c[7] * x1 * x1
    c0 = c[0] * x0**3 + c[1] * x0 * x0 * x1 + c[3] * x0 * x1 * x1 + c[6] * x1 * x1 * x1
    return c3, c2, c1, c0


def _eval(cs, t):
    c3, c2, c1, c0 = cs
    return ((c3 * t + c2) * t + c1) * t + c0


def _critical_splits(cs, B: int) -> tuple[np.ndarray, np.ndarray]:
    """Floors of the (up to two) real critical points of each row, NaN if absent."""
    c3, c2, c1, _ = (np.asarray(a, dtype=float) for a in cs)
    n = c2.shape[0]
    s1 = np.full(n, np.nan)
    s2 = np.full(n, np.nan)
    cubic = c3 != 0
    disc = c2 * c2 - 3.0 * c3 * c1
    two = cubic & (disc > 0)
    if two.any():
        r = np.sqrt(disc[two])
        a = (-c2[two] - r) / (3.0 * c3[two])
        b = (-c2[two] + r) / (3.0 * c3[two])
        s1[two] = np.minimum(a, b)
        s2[two] = np.maximum(a, b)
    quad = (~cubic) & (c2 != 0)
    if quad.any():
        s1[quad] = -c1[quad] / (2.0 * c2[quad])
    lim = B + 4
    s1 = np.floor(np.clip(s1, -lim, lim))
    s2 = np.floor(np.clip(s2, -lim, lim))
    return s1, s2


def _integer_roots(cs, B: int, dtype) -> list[tuple[int, int]]:
    """(row, t) for every integer root t in [-B, B] of each row polynomial."""
    n = len(cs[1])
    rows_idx = np.arange(n)
    s1, s2 = _critical_splits(cs, B)
    has1 = ~np.isnan(s1)
    has2 = ~np.isnan(s2)
    s1i = np.where(has1, s1, 0).astype(np.int64)
    s2i = np.where(has2, s2, 0).astype(np.int64)

    # Explicit checks around each split.
    check_rows, check_t = [], []
    for s, has in ((s1i, has1), (s2i, has2)):
        for d in (-1, 0, 1):
            check_rows.append(rows_idx[has])
            check_t.append(s[has] + d)
    # Monotone pieces [lo, hi].
    lo_parts, hi_parts, row_parts = [], [], []
    none = ~has1
    one = has1 & ~has2
    both = has1 & has2
    lo_parts += [np.full(none.sum(), -B)]
    hi_parts += [np.full(none.sum(), B)]
    row_parts += [rows_idx[none]]
    lo_parts += [np.full(one.sum(), -B), s1i[one] + 2]
    hi_parts += [s1i[one] - 2, np.full(one.sum(), B)]
    row_parts += [rows_idx[one], rows_idx[one]]
    lo_parts += [np.full(both.sum(), -B), s1i[both] + 2, s2i[both] + 2]
    hi_parts += [s1i[both] - 2, s2i[both] - 2, np.full(both.sum(), B)]
    row_parts += [rows_idx[both]] * 3

    lo = np.clip(np.concatenate(lo_parts), -B, B).astype(np.int64)
    hi = np.clip(np.concatenate(hi_parts), -B, B).astype(np.int64)
    prow = np.concatenate(row_parts).astype(np.int64)
    keep = lo <= hi
    lo, hi, prow = lo[keep], hi[keep], prow[keep]

    def coeffs_for(idx):
        return tuple(np.asarray(a)[idx] for a in cs)

    def g(idx, t):
        t = t.astype(dtype) if dtype is object else t
        return _eval(coeffs_for(idx), t)

    found: list[tuple[int, int]] = []

    ct = np.concatenate(check_t) if check_t else np.zeros(0, np.int64)
    cr = np.concatenate(check_rows) if check_rows else np.zeros(0, np.int64)
    inside = (ct >= -B) & (ct <= B)
    ct, cr = ct[inside], cr[inside]
    if ct.size:
        vals = g(cr, ct)
        hit = np.asarray(vals == 0, dtype=bool)
        found += list(zip(cr[hit].tolist(), ct[hit].tolist()))

    if lo.size:
        glo = g(prow, lo)
        ghi = g(prow, hi)
        z = np.asarray(glo == 0, dtype=bool)
        found += list(zip(prow[z].tolist(), lo[z].tolist()))
        z = np.asarray(ghi == 0, dtype=bool)
        found += list(zip(prow[z].tolist(), hi[z].tolist()))
        slo = np.sign(glo).astype(np.int64)
        shi = np.sign(ghi).astype(np.int64)
        active = (slo * shi) < 0
        lo, hi, prow, slo = lo[active], hi[active], prow[active], slo[active]
        while lo.size:
            gap = hi - lo > 1
            if not gap.any():
                break
            lo, hi, prow, slo = lo[gap], hi[gap], prow[gap], slo[gap]
            mid = (lo + hi) // 2
            gm = g(prow, mid)
            sm = np.sign(gm).astype(np.int64)
            z = sm == 0
            found += list(zip(prow[z].tolist(), mid[z].tolist()))
            go_up = sm == slo
            lo = np.where(go_up, mid, lo)
            hi = np.where(go_up, hi, mid)
            live = ~z
            lo, hi, prow, slo = lo[live], hi[live], prow[live], slo[live]
    return found


def _dtype_for(f: CubicForm, B: int):
    bound = sum(abs(c) for c in f.coeffs) * (B + 5) ** 3 * 4
    return np.int64 if bound < 2**62 else object


def _sieve_x0_range(coeffs: tuple[int, ...], B: int, x0_values: Iterable[int]) -> list[tuple[int, int, int]]:
    f = CubicForm(coeffs)
    dtype = _dtype_for(f, B)
    out = []
    for x0 in x0_values:
        if x0 == 0:
            x1 = np.arange(1, B + 1, dtype=np.int64)
        else:
            x1 = np.arange(-B, B + 1, dtype=np.int64)
        if dtype is object:
            x1 = x1.astype(object)
        cs = _row_coefficients(coeffs, x0 if dtype is not object else int(x0), x1)
        cs = tuple(np.broadcast_to(np.asarray(a, dtype=dtype), x1.shape) for a in cs)
        for row, t in _integer_roots(cs, B, dtype):
            a, b = x0, int(x1[row])
            if gcd(gcd(a, b), t) == 1:
                out.append((a, b, t))
    if 0 in x0_values and f(0, 0, 1) == 0:
        out.append((0, 0, 1))
    return out


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def enumerate_points(f: CubicForm, B: int, workers: int | None = None) -> list[PlanePoint]:
    """All normalized primitive points of height <= B on F = 0, sorted."""
    require_smooth(f)
    if B < 1:
        raise ValueError("height bound must be at least 1")
    workers = workers or _workers()
    xs = list(range(0, B + 1))
    if workers == 1 or B < 64:
        triples = _sieve_x0_range(f.coeffs, B, xs)
    else:
        chunks = [xs[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_sieve_x0_range, [f.coeffs] * workers, [B] * workers, chunks)
            triples = [t for part in parts for t in part]
    pts = {PlanePoint(*t) for t in triples}
    for p in pts:
        if f(*p.coords) != 0:
            raise AssertionError(f"sieve produced {p} which is not on the curve")
    return sorted(pts)


def brute_force_points(f: CubicForm, B: int) -> list[PlanePoint]:
    """Exhaustive scan of all triples in [-B, B]^3 (the O(B^3) oracle)."""
    r = np.arange(-B, B + 1, dtype=np.int64)
    found = set()
    c = f.coeffs
    for x0 in range(-B, B + 1):
        a, b = np.meshgrid(r, r, indexing="ij")
        vals = (
            c[0] * x0**3 + c[1] * x0 * x0 * a + c[2] * x0 * x0 * b + c[3] * x0 * a * a
            + c[4] * x0 * a * b + c[5] * x0 * b * b + c[6] * a**3 + c[7] * a * a * b
            + c[8] * a * b * b + c[9] * b**3
        )
        for x1, x2 in zip(a[vals == 0].tolist(), b[vals == 0].tolist()):
            if (x0, x1, x2) != (0, 0, 0):
                found.add(PlanePoint.normalized(x0, x1, x2))
    return sorted(found)


def count_table(f: CubicForm, B_list: Sequence[int]) -> list[tuple[int, int]]:
    """Rows (B, N(B)) for an increasing list of bounds."""
    B_list = list(B_list)
    if any(b2 <= b1 for b1, b2 in zip(B_list, B_list[1:])):
        raise ValueError("B_list must be strictly increasing")
    if not B_list:
        return []
    pts = enumerate_points(f, B_list[-1])
    heights = sorted(p.height for p in pts)
    rows = []
    for B in B_list:
        rows.append((B, int(np.searchsorted(heights, B, side="right"))))
    return rows


def format_count_csv(rows: Sequence[tuple[int, int]]) -> str:
    return "B,N\n" + "".join(f"{B},{N}\n" for B, N in rows)


@dataclass(frozen=True)
class TrentaReport:
    B: int
    N: int
    coeff_height: int
    ratio: float | None  # log||F|| / (30 log B) when N >= 10

    def as_csv(self) -> str:
        ratio = "" if self.ratio is None else repr(self.ratio)
        return f"B,N,coeff_height,ratio\n{self.B},{self.N},{self.coeff_height},{ratio}\n"


def trenta_diagnostic(f: CubicForm, B: int, points: Sequence[PlanePoint] | None = None) -> TrentaReport:
    """Report N(B) and, when N(B) >= 10, the ratio log||F|| / (30 log B)."""
    if B < 3:
        raise ValueError("the diagnostic needs B >= 3")
    if points is None:
        points = enumerate_points(f, B)
    N = sum(1 for p in points if p.height <= B)
    h = coeff_height(f)
    ratio = math.log(h) / (30 * math.log(B)) if N >= 10 else None
    return TrentaReport(B, N, h, ratio)
