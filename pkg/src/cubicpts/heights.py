"""Naive, x-coordinate and canonical heights, and the height pairing.

The canonical height is the doubling limit lim 4^-n h_x(2^n P) on the short
model y^2 = x^3 + alpha x + beta.  With x_n = a_n/d_n the x-coordinate of
2^n P in lowest terms, the duplication formula gives

    h(x_{n+1}) = 4 h(x_n) + arch(x_n) - log g_n,

where arch is the archimedean correction of the quartic pair (Phi, Psi) and
g_n = gcd(Phi(a_n, d_n), Psi(a_n, d_n)) divides Res(Phi, Psi).  So the limit
telescopes into h(x_0) + sum 4^-(n+1) (arch(x_n) - log g_n).  Each g_n is
computed exactly from x_n modulo a power of each prime dividing the
resultant, and arch(x_n) from a high-precision real orbit; numbers of size
4^n digits never get formed.  Both terms of the series are bounded by
explicit constants (an integer Bezout identity bounds arch from below), so
the truncation point is chosen with a rigorous tail bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import log
from typing import Sequence

import mpmath
import numpy as np

from .forms import coeff_height, prime_factors
from .jacobian import GroupContext, NotOnCurveError
from .linalg import bareiss_det, rref
from .points import PlanePoint
from .weierstrass import EPoint, ShortModel

MAX_DOUBLINGS = 40
DEFAULT_TOL = 1e-8


class HeightError(ArithmeticError):
    pass


def naive_height(P: PlanePoint) -> float:
    """log H(P)."""
    return log(P.height)


def hx(model, Z: EPoint) -> float:
    """log max(|num|, |den|) of the x-coordinate; 0 at infinity by convention."""
    if Z is None:
        return 0.0
    x = Fraction(Z[0])
    return log(max(abs(x.numerator), x.denominator))


def _duplication(alpha: int, beta: int):
    """Coefficients (a^4 .. d^4) of Phi and Psi with x(2P) = Phi/Psi."""
    phi = [1, 0, -2 * alpha, -8 * beta, alpha * alpha]
    psi = [0, 4, 0, 4 * alpha, 4 * beta]
    return phi, psi


def _hom(c: Sequence, a, d):
    return c[0] * a**4 + c[1] * a**3 * d + c[2] * a * a * d * d + c[3] * a * d**3 + c[4] * d**4


@dataclass(frozen=True)
class DuplicationBounds:
    """Constants controlling the telescoped series for one short model."""

    resultant: int
    arch_upper: float
    arch_lower: float
    primes: tuple[int, ...]

    @property
    def term_bound(self) -> float:
        """Bound for |arch(x) - log g| over all x."""
        return max(abs(self.arch_upper), abs(self.arch_lower - log(abs(self.resultant))))

    def doublings_for(self, tol: float) -> int:
        M = self.term_bound
        n = 0
        while M * 4.0**-n / 3 >= tol / 2:
            n += 1
        return n


def duplication_bounds(model: ShortModel) -> DuplicationBounds:
    phi, psi = _duplication(model.alpha, model.beta)
    # Sylvester system: G1*Phi + G2*Psi = rhs, G1, G2 cubic; columns are
    # the coefficients of G1 then G2, rows the degree-7 monomials a^(7-k) d^k
    rows = [[0] * 8 for _ in range(8)]
    for j in range(4):
        for i in range(5):
            rows[i + j][j] = phi[i]
            rows[i + j][4 + j] = psi[i]
    det_rows, _ = rref([r + [int(k == 0), int(k == 7)] for k, r in enumerate(rows)])
    res = bareiss_det(rows)
    if res == 0:
        raise HeightError("duplication polynomials share a root; model is singular")
    sol_a = [det_rows[i][8] for i in range(8)]
    sol_d = [det_rows[i][9] for i in range(8)]
    # |res| max(|a|,|d|)^7 <= (|G1|_1 + |G2|_1) max(|a|,|d|)^3 max(|Phi|,|Psi|)
    norm = max(sum(abs(c) for c in s) for s in (sol_a, sol_d))
    lower = -log(float(norm))  # the resultant cancels: sol is G/res
    upper = log(max(sum(abs(c) for c in phi), sum(abs(c) for c in psi)))
    return DuplicationBounds(res, upper, lower, tuple(sorted(prime_factors(res))))


class _Orbit:
    def __init__(self, model: ShortModel, bounds: DuplicationBounds):
        self.model = model
        self.bounds = bounds
        self.phi, self.psi = _duplication(model.alpha, model.beta)

    def local_terms(self, x0: Fraction, steps: int) -> list[float]:
        """sum_p v_p(g_n) log p for n < steps."""
        out = [0.0] * steps
        for p in self.bounds.primes:
            vres = 0
            r = abs(self.bounds.resultant)
            while r % p == 0:
                r //= p
                vres += 1
            k = steps * vres + 20
            mod = p**k
            a, d = x0.numerator % mod, x0.denominator % mod
            for n in range(steps):
                A = _hom(self.phi, a, d) % mod
                B = _hom(self.psi, a, d) % mod
                v = min(_val_mod(A, p, k), _val_mod(B, p, k))
                if v > vres or v >= k:
                    raise HeightError(f"{p}-adic precision exhausted")
                out[n] += v * log(p)
                k -= v
                mod = p**k
                a, d = (A // p**v) % mod, (B // p**v) % mod
        return out

    def arch_terms(self, x0: Fraction, steps: int, dps: int) -> list:
        with mpmath.workdps(dps):
            a, d = mpmath.mpf(x0.numerator), mpmath.mpf(x0.denominator)
            s = max(abs(a), abs(d))
            a, d = a / s, d / s
            out = []
            for _ in range(steps):
                A = _hom(self.phi, a, d)
                B = _hom(self.psi, a, d)
                s = max(abs(A), abs(B))
                out.append(mpmath.log(s))
                a, d = A / s, B / s
            return out

    def series(self, x0: Fraction, steps: int, dps: int) -> mpmath.mpf:
        loc = self.local_terms(x0, steps)
        arch = self.arch_terms(x0, steps, dps)
        with mpmath.workdps(dps):
            total = mpmath.log(max(abs(x0.numerator), x0.denominator))
            for n in range(steps):
                total += (arch[n] - loc[n]) / mpmath.mpf(4) ** (n + 1)
            return total


def _val_mod(x: int, p: int, k: int) -> int:
    """Valuation of x known modulo p^k (k if x == 0 mod p^k)."""
    if x == 0:
        return k
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _cache(ctx: GroupContext) -> dict:
    return ctx.__dict__.setdefault("_height_cache", {})


def _orbit(ctx: GroupContext) -> _Orbit:
    c = _cache(ctx)
    if "orbit" not in c:
        model = ctx.weierstrass.model
        c["orbit"] = _Orbit(model, duplication_bounds(model))
    return c["orbit"]


def canonical_height(ctx: GroupContext, P: PlanePoint, tol: float = DEFAULT_TOL) -> float:
    """Canonical height lim 4^-n h_x(2^n P), accurate to within ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not ctx.on_curve(P):
        raise NotOnCurveError(f"{P} is not on the curve")
    key = (P, tol)
    cache = _cache(ctx)
    if key in cache:
        return cache[key]
    if ctx.torsion_order(P) is not None:
        cache[key] = 0.0
        return 0.0
    orbit = _orbit(ctx)
    steps = orbit.bounds.doublings_for(tol)
    if steps > MAX_DOUBLINGS:
        raise HeightError(f"{steps} doublings needed for tol={tol}; cap is {MAX_DOUBLINGS}")
    x0 = Fraction(ctx.weierstrass.phi(P)[0])
    dps = 30 + 2 * steps
    prev = None
    for _ in range(6):
        val = orbit.series(x0, steps, dps)
        if prev is not None and abs(val - prev) < tol / 10:
            break
        prev = val
        dps *= 2
    else:
        raise HeightError("real orbit did not stabilise")
    h = float(val)
    cache[key] = h
    return h


def doubling_heights(ctx: GroupContext, P: PlanePoint, n: int) -> list[float]:
    """h_x(2^k P) / 4^k for k = 0..n by exact doubling (small n only)."""
    W = ctx.weierstrass
    Z = W.phi(P)
    out = []
    for k in range(n + 1):
        out.append(hx(W.model, Z) / 4**k)
        Z = W.model.add(Z, Z)
    return out


def height_pairing(ctx: GroupContext, P: PlanePoint, Q: PlanePoint, tol: float = DEFAULT_TOL) -> float:
    s = canonical_height(ctx, ctx.add(P, Q), tol)
    return (s - canonical_height(ctx, P, tol) - canonical_height(ctx, Q, tol)) / 2


def gram(ctx: GroupContext, points: Sequence[PlanePoint], tol: float = DEFAULT_TOL) -> np.ndarray:
    n = len(points)
    G = np.zeros((n, n))
    for i in range(n):
        G[i, i] = canonical_height(ctx, points[i], tol)
        for j in range(i):
            G[i, j] = G[j, i] = height_pairing(ctx, points[i], points[j], tol)
    return G


@dataclass(frozen=True)
class HeightReport:
    point: PlanePoint
    h_naive: float
    h_x: float
    h_hat: float
    tol: float

    HEADER = "point,h_naive,h_x,h_hat,tol"

    def as_csv(self) -> str:
        return (
            f"{self.HEADER}\n\"{self.point}\",{self.h_naive:.12f},{self.h_x:.12f},"
            f"{self.h_hat:.12f},{self.tol:g}\n"
        )


def height_report(ctx: GroupContext, P: PlanePoint, tol: float = DEFAULT_TOL) -> HeightReport:
    W = ctx.weierstrass
    return HeightReport(P, naive_height(P), hx(W.model, W.phi(P)), canonical_height(ctx, P, tol), tol)


def crude_height_audit(ctx: GroupContext, pairs, B: int, m: int) -> float:
    """Measured exponent A = max log H(Q) / log B over pairs (P, Q, R) in X_R.

    Each pair is checked against P = mQ - (m-1)R in the plane group law.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no pairs to audit")
    if B < 2:
        raise ValueError("B must be at least 2")
    A = 0.0
    for P, Q, R in pairs:
        if P.height > B or R.height > B:
            raise ValueError(f"pair ({P}, {Q}) exceeds the height bound {B}")
        if ctx.sub(ctx.smul(m, Q), ctx.smul(m - 1, R)) != P:
            raise ValueError(f"({P}, {Q}) is not on X_R for R = {R}, m = {m}")
        A = max(A, log(Q.height) / log(B))
    return A


@dataclass(frozen=True)
class ComparisonReport:
    """Measured constants c in h([1,a,b]) <= c(1 + log||F||) and |h_hat - h_x| <= c(1 + log||F||)."""

    model_constant: float
    difference_constant: float
    max_difference: float
    samples: int


def comparison_report(ctx: GroupContext, points: Sequence[PlanePoint], tol: float = DEFAULT_TOL) -> ComparisonReport:
    scale = 1 + log(coeff_height(ctx.curve))
    W = ctx.weierstrass
    diff = 0.0
    for P in points:
        if P == ctx.base:
            continue
        diff = max(diff, abs(canonical_height(ctx, P, tol) - hx(W.model, W.phi(P))))
    return ComparisonReport(W.model.height_of_coefficients() / scale, diff / scale, diff, len(points))
