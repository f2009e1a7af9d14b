"""Lattice points in height ellipsoids of the Mordell-Weil lattice.

Enumeration is Fincke-Pohst over the float Cholesky form, with pruning widened
by a small slack so nothing near the boundary is lost.  Each leaf is then
decided exactly when the Gram matrix is rational, and otherwise against the
tolerance tag of the (approximate) canonical-height Gram matrix: leaves
within that margin of the boundary are counted separately as ambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd, log, sqrt
from typing import Iterator, Sequence

import numpy as np

from .linalg import rank_q

DAVID_EXPONENTS = (Fraction(-7, 16), Fraction(-1, 6), Fraction(-7, 96), Fraction(-1, 40), Fraction(1, 240))
MAX_DIM = 6


class IndefiniteFormError(ValueError):
    pass


class DeskScaleError(ValueError):
    pass


@dataclass
class HeightForm:
    """Q(n) = n^T G n; ``exact`` holds a rational Gram matrix when available."""

    gram: np.ndarray
    tol: float = 0.0
    exact: list[list[Fraction]] | None = None
    source: str = ""

    @classmethod
    def rational(cls, rows: Sequence[Sequence], source: str = "") -> "HeightForm":
        exact = [[Fraction(x) for x in r] for r in rows]
        return cls(np.array([[float(x) for x in r] for r in exact]).reshape(len(exact), len(exact)), 0.0, exact, source)

    @classmethod
    def from_basis(cls, basis) -> "HeightForm":
        return cls(np.array(basis.gram, dtype=float).reshape(basis.r, basis.r), 3 * basis.tol, None, "canonical height")

    @property
    def r(self) -> int:
        return self.gram.shape[0]

    def __post_init__(self):
        g = self.gram
        if g.shape[0] and not np.allclose(g, g.T):
            raise IndefiniteFormError("Gram matrix is not symmetric")
        if self.exact is not None:
            for k in range(1, len(self.exact) + 1):
                if _fraction_det([row[:k] for row in self.exact[:k]]) <= 0:
                    raise IndefiniteFormError("form is not positive definite")
        elif g.shape[0]:
            for k in range(1, g.shape[0] + 1):
                if not np.linalg.det(g[:k, :k]) > self.tol:
                    raise IndefiniteFormError("form is not positive definite within tolerance")

    @property
    def _scaled(self) -> tuple[list[list[int]], int]:
        if "_int" not in self.__dict__:
            den = 1
            for row in self.exact:
                for x in row:
                    den = den * x.denominator // gcd(den, x.denominator)
            self.__dict__["_int"] = ([[int(x * den) for x in row] for row in self.exact], den)
        return self.__dict__["_int"]

    def value(self, n: Sequence[int]):
        if self.exact is not None:
            g, den = self._scaled
            r = self.r
            return Fraction(sum(g[i][j] * n[i] * n[j] for i in range(r) for j in range(r)), den)
        v = np.asarray(n, dtype=float)
        return float(v @ self.gram @ v)

    def margin(self, n: Sequence[int]) -> float:
        if self.exact is not None:
            return 0.0
        return self.tol * float(sum(abs(x) for x in n)) ** 2


def _fraction_det(rows: list[list[Fraction]]) -> Fraction:
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def _cholesky_q(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Q(n) = sum_i d_i (n_i + sum_{j>i} mu_ij n_j)^2."""
    L = np.linalg.cholesky(g)  # g = L L^T
    d = np.diag(L) ** 2
    mu = (L / np.diag(L)).T  # mu[i, j] for j > i
    return d, mu


def ellipsoid_vectors(form: HeightForm, rho: float) -> Iterator[tuple[tuple[int, ...], bool]]:
    """All n with Q(n) <= rho (+ margin); yields (n, ambiguous)."""
    r = form.r
    if rho < 0:
        return
    if r == 0:
        yield (), False
        return
    d, mu = _cholesky_q(form.gram)
    slack = 1e-9 * (1 + rho)
    bound = float(rho) + slack
    n = [0] * r

    def rec(i: int, remaining: float):
        c = -sum(mu[i, j] * n[j] for j in range(i + 1, r))
        w = sqrt(max(remaining, 0.0) / d[i]) + 1e-9
        for x in range(ceil(c - w), floor(c + w) + 1):
            n[i] = x
            rem = remaining - d[i] * (x - c) ** 2
            if rem < -slack:
                continue
            if i == 0:
                yield from leaf()
            else:
                yield from rec(i - 1, rem)
        n[i] = 0

    def leaf():
        v = tuple(n)
        q = form.value(v)
        if form.exact is not None:
            if q <= Fraction(rho):
                yield v, False
            return
        m = form.margin(v)
        if q <= rho - m:
            yield v, False
        elif q <= rho + m:
            yield v, True

    # widen the pruning radius by the largest margin the tolerance can produce
    if form.exact is None and form.tol > 0:
        lam = float(np.linalg.eigvalsh(form.gram)[0])
        top = (float(rho) + 1) / lam  # |n|_2^2 bound
        bound = float(rho) + form.tol * r * top + slack
    yield from rec(r - 1, bound)


@dataclass(frozen=True)
class CountResult:
    count: int  # vectors certainly inside, plus ambiguous ones
    ambiguous: int

    @property
    def certain(self) -> int:
        return self.count - self.ambiguous


def ellipsoid_count_report(form: HeightForm, rho: float) -> CountResult:
    total = amb = 0
    for _, a in ellipsoid_vectors(form, rho):
        total += 1
        amb += a
    return CountResult(total, amb)


def ellipsoid_count(form: HeightForm, rho: float) -> int:
    """#{n in Z^r : Q(n) <= rho} (ambiguous boundary vectors included)."""
    return ellipsoid_count_report(form, rho).count


@dataclass
class MinimaReport:
    minima: list[float]
    witnesses: list[tuple[int, ...]]


def successive_minima(form: HeightForm) -> MinimaReport:
    r = form.r
    if r > MAX_DIM:
        raise DeskScaleError(f"rank {r} exceeds the desk-scale limit {MAX_DIM}")
    if r == 0:
        return MinimaReport([], [])
    rho = float(min(np.diag(form.gram)))
    while True:
        vecs = sorted(
            (float(form.value(v)), v) for v, _ in ellipsoid_vectors(form, rho) if any(v) and _positive(v)
        )
        chosen: list[tuple[int, ...]] = []
        vals: list[float] = []
        for q, v in vecs:
            if rank_q(chosen + [list(v)]) > len(chosen):
                chosen.append(v)
                vals.append(sqrt(q))
                if len(chosen) == r:
                    return MinimaReport(vals, [tuple(c) for c in chosen])
        rho *= 2


def _positive(v: Sequence[int]) -> bool:
    return next(x for x in v if x) > 0


def davenport_bound(minima: Sequence[float], rho: float) -> float:
    out = 1.0
    for M in minima:
        out *= max(1.0, 4 * sqrt(rho) / M)
    return out


def davenport_check(form: HeightForm, rho: float) -> tuple[int, float, bool]:
    count = ellipsoid_count(form, rho)
    bound = davenport_bound(successive_minima(form).minima, rho)
    return count, bound, count <= bound


def david_exponent_sum_ok() -> bool:
    return sum(-e for e in DAVID_EXPONENTS[:4]) < 1


def david_report(minima: Sequence[float], D: int) -> str:
    """Ratios M_j / (log|D|)^{e_j}; reported, never asserted."""
    if abs(D) < 3:
        raise ValueError("|D| must be at least 3")
    L = log(abs(D))
    lines = ["j,M_j,exponent,ratio"]
    for j, (M, e) in enumerate(zip(minima, DAVID_EXPONENTS), 1):
        lines.append(f"{j},{M:.10g},{e},{M / L ** float(e):.10g}")
    total = sum(-e for e in DAVID_EXPONENTS[:4])
    lines.append(f"# 7/16+1/6+7/96+1/40 = {total} {'<' if david_exponent_sum_ok() else '>='} 1")
    return "\n".join(lines) + "\n"


@dataclass
class GrowthRow:
    B: int
    N: int
    h_max: float
    lattice_bound: int  # #T * ellipsoid_count(Q, h_max)
    ambiguous: int
    calibrated: int  # ellipsoid_count(Q, c_cal log B)
    log_power: float  # (log B)^(1 + r/2)

    @property
    def ok(self) -> bool:
        return self.N <= self.lattice_bound


def growth_report(basis, points, B_list: Sequence[int], c_cal: float = 1.0) -> list[GrowthRow]:
    """Rows for each B; asserts N(B) <= #T * ellipsoid_count(Q, h_max(B))."""
    from .heights import canonical_height

    form = HeightForm.from_basis(basis)
    T = len(basis.torsion)
    rows = []
    for B in sorted(B_list):
        inside = [P for P in points if P.height <= B]
        hmax = max((canonical_height(basis.ctx, P, basis.tol) for P in inside), default=0.0)
        res = ellipsoid_count_report(form, hmax)
        cal = ellipsoid_count(form, c_cal * log(B)) if B > 1 else 1
        row = GrowthRow(B, len(inside), hmax, T * res.count, T * res.ambiguous, cal, log(B) ** (1 + basis.r / 2))
        assert row.ok, f"N({B}) = {row.N} exceeds #T * ellipsoid count {row.lattice_bound}"
        rows.append(row)
    return rows


def format_growth_csv(rows: Sequence[GrowthRow]) -> str:
    lines = ["B,N,h_max,torsion_times_ellipsoid,ambiguous,ellipsoid_c_log_B,log_B_power"]
    for r in rows:
        lines.append(f"{r.B},{r.N},{r.h_max:.10f},{r.lattice_bound},{r.ambiguous},{r.calibrated},{r.log_power:.6f}")
    return "\n".join(lines) + "\n"
