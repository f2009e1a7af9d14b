"""Short Weierstrass model of a plane cubic with a rational base point.

With O the base point, t the tangent line at O and T the third point on it
(div t = 2O + T on the curve):

* x = u/t for a line u through T spans L(2O) together with 1;
* y = Q/t^2 for a conic Q cutting out at least O + 2T spans L(3O) with 1, x
  (when O is a flex, T = O and y = w/t for any line w missing O).

The Weierstrass relation among x and y is found by exact linear algebra
modulo F, then completed to y^2 = x^3 + alpha x + beta and scaled to the
integral model with no u^4 | alpha, u^6 | beta redundancy.  The only point
where x, y are not given by their defining quotients is T itself; its image
is obtained by rewriting the quotients with denominators nonzero at T.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, log
from typing import Sequence

from sympy import factorint

from . import polys
from .forms import CubicForm
from .jacobian import _cross, _dot, CubicGroup
from .linalg import nullspace, rank_q
from .points import PlanePoint

EPoint = tuple[Fraction, Fraction] | None  # None is the point at infinity


class WeierstrassError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ShortModel:
    """y^2 = x^3 + alpha x + beta with integral alpha, beta."""

    alpha: int
    beta: int

    def __post_init__(self):
        if 4 * self.alpha**3 + 27 * self.beta**2 == 0:
            raise WeierstrassError("singular Weierstrass model")

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.alpha**3 + 27 * self.beta**2)

    def contains(self, Z: EPoint) -> bool:
        if Z is None:
            return True
        x, y = Z
        return y * y == x**3 + self.alpha * x + self.beta

    def neg(self, Z: EPoint) -> EPoint:
        return None if Z is None else (Z[0], -Z[1])

    def add(self, Z1: EPoint, Z2: EPoint) -> EPoint:
        if Z1 is None:
            return Z2
        if Z2 is None:
            return Z1
        x1, y1 = Z1
        x2, y2 = Z2
        if x1 == x2:
            if y1 + y2 == 0:
                return None
            lam = (3 * x1 * x1 + self.alpha) / (2 * y1)
        else:
            lam = (y2 - y1) / (x2 - x1)
        x3 = lam * lam - x1 - x2
        return (x3, lam * (x1 - x3) - y1)

    def smul(self, m: int, Z: EPoint) -> EPoint:
        if m < 0:
            return self.smul(-m, self.neg(Z))
        out: EPoint = None
        while m:
            if m & 1:
                out = self.add(out, Z)
            m >>= 1
            if m:
                Z = self.add(Z, Z)
        return out

    def height_of_coefficients(self) -> float:
        """h([1, alpha, beta])."""
        return log(max(1, abs(self.alpha), abs(self.beta)))

    def __str__(self) -> str:
        return f"[{self.alpha}/1, {self.beta}/1]"


@dataclass
class WeierstrassModel:
    """Short model plus the birational maps phi: C -> E and phi^-1."""

    form: CubicForm
    base: PlanePoint
    model: ShortModel
    flex: bool
    T: PlanePoint
    t: tuple[int, int, int]  # tangent line at the base point
    u: tuple[int, int, int]
    ynum: polys.Poly  # numerator of y (line if flex, else conic)
    # x_s = ax * x + bx ; y_s = cy * y + dy * x + ey   (x = u/t, y = ynum/t^k)
    ax: Fraction
    bx: Fraction
    cy: Fraction
    dy: Fraction
    ey: Fraction

    @property
    def alpha(self) -> int:
        return self.model.alpha

    @property
    def beta(self) -> int:
        return self.model.beta

    @property
    def ydeg(self) -> int:
        return 1 if self.flex else 2

    def _raw(self, P: PlanePoint) -> tuple[Fraction, Fraction]:
        v = P.coords
        tv = _dot(self.t, v)
        x = Fraction(_dot(self.u, v), tv)
        y = Fraction(polys.evaluate(self.ynum, v), tv**self.ydeg)
        return x, y

    def _to_short(self, x: Fraction, y: Fraction) -> EPoint:
        return (self.ax * x + self.bx, self.cy * y + self.dy * x + self.ey)

    @cached_property
    def _phi_T(self) -> EPoint:
        v = self.T.coords
        tpoly = polys.linear(self.t)
        x = value_at(polys.linear(self.u), tpoly, self.form, v)
        y = value_at(self.ynum, polys.power(tpoly, self.ydeg), self.form, v)
        return self._to_short(x, y)

    def phi(self, P: PlanePoint) -> EPoint:
        if P == self.base:
            return None
        if not self.flex and P == self.T:
            return self._phi_T
        return self._to_short(*self._raw(P))

    def phi_inverse(self, Z: EPoint) -> PlanePoint:
        if Z is None:
            return self.base
        if not self.model.contains(Z):
            raise WeierstrassError(f"{Z} is not on {self.model}")
        xs, ys = Z
        x = (xs - self.bx) / self.ax
        y = (ys - self.dy * x - self.ey) / self.cy
        line = [a - x * b for a, b in zip(self.u, self.t)]
        if self.flex:
            w = [self.ynum.get(e, 0) for e in polys.monomials(1)]
            cand = _cross(line, [a - y * b for a, b in zip(w, self.t)])
        else:
            if Z == self._phi_T:
                return self.T
            tp = polys.linear(self.t)
            conic = polys.add(self.ynum, polys.mul(tp, tp), -y)
            Tv = self.T.coords
            for k in range(3):
                d = _cross(line, [int(i == k) for i in range(3)])
                if any(d) and any(_cross(d, Tv)):
                    break
            grad = [polys.evaluate(polys.derivative(conic, i), Tv) for i in range(3)]
            kd = polys.evaluate(conic, d)
            gd = _dot(grad, d)
            cand = [kd * a - gd * b for a, b in zip(Tv, d)]
        P = _to_plane(cand)
        if not self.flex and (P is None or P == self.T):
            # the line is tangent to the curve at T; the residual point is T o T
            P = CubicGroup(self.form, self.base).third(self.T, self.T)
        if P is None or self.form(*P.coords) != 0 or self.phi(P) != Z:
            raise WeierstrassError(f"phi^-1 undefined at {Z}")
        return P

    def could_be_torsion(self, Z: EPoint) -> bool:
        """Necessary condition from Nagell-Lutz on the integral model."""
        if Z is None:
            return True
        x, y = Z
        return x.denominator == 1 and y.denominator == 1

    def measured_constant(self) -> float:
        """h([1, alpha, beta]) / (1 + log ||F||)."""
        h = max(abs(c) for c in self.form.coeffs)
        return self.model.height_of_coefficients() / (1 + log(h))

    def __str__(self) -> str:
        return str(self.model)


def _to_plane(v: Sequence) -> PlanePoint | None:
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    if not any(ints):
        return None
    return PlanePoint.normalized(*ints)


def value_at(num: polys.Poly, den: polys.Poly, form: CubicForm, point: Sequence[int], extra: int = 4) -> Fraction:
    """Value at ``point`` of the function num/den on the curve F = 0.

    When num and den both vanish there, find another representative
    num'/den' (num*den' = den*num' modulo F) with den'(point) != 0.
    """
    dv = polys.evaluate(den, point)
    if dv != 0:
        return Fraction(polys.evaluate(num, point), dv)
    d = polys.degree(den)
    F = form.poly
    for k in range(max(d, 1), d + extra + 1):
        target = polys.monomials(d + k)
        mk = polys.monomials(k)
        ml = polys.monomials(d + k - 3) if d + k >= 3 else ()
        cols = []
        for e in mk:  # den' coefficients
            cols.append(polys.mul(num, {e: 1}))
        for e in mk:  # num' coefficients
            cols.append(polys.mul(den, {e: -1}))
        for e in ml:  # multiple of F
            cols.append(polys.mul(F, {e: -1}))
        rows = [[c.get(m, 0) for c in cols] for m in target]
        for vec in nullspace(rows, len(cols)):
            den2 = polys.from_vector(vec[: len(mk)], k)
            num2 = polys.from_vector(vec[len(mk): 2 * len(mk)], k)
            dv2 = polys.evaluate(den2, point)
            if dv2 != 0:
                return Fraction(polys.evaluate(num2, point), dv2)
    raise WeierstrassError(f"could not evaluate the function at {tuple(point)}")


def _line_through(point: Sequence[int], avoid: Sequence[int]) -> list[int]:
    """A line through ``point`` not proportional to the line ``avoid``."""
    for k in range(3):
        ell = _cross(point, [int(i == k) for i in range(3)])
        if any(ell) and any(_cross(ell, avoid)):
            return ell
    raise WeierstrassError("no independent line found")


def _reduce_scaling(alpha: int, beta: int) -> int:
    """Largest u > 0 with u^4 | alpha and u^6 | beta."""
    g = gcd(alpha, beta)
    if g == 0:
        return 1
    u = 1
    for p, _ in factorint(g).items():
        k = min(
            _vp(alpha, p) // 4 if alpha else 10**9,
            _vp(beta, p) // 6 if beta else 10**9,
        )
        u *= p**k
    return u


def _vp(n: int, p: int) -> int:
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def to_weierstrass(form: CubicForm, base: PlanePoint) -> WeierstrassModel:
    group = CubicGroup(form, base)
    O = base.coords
    T = group.third(base, base)
    t = list(form.grad_at(O))
    g = gcd(gcd(t[0], t[1]), t[2])
    t = [c // g for c in t]
    flex = T == base
    tp = polys.linear(t)
    if flex:
        u = _line_through(O, t)
        k = next(i for i in range(3) if O[i] != 0)
        ynum = polys.linear([int(i == k) for i in range(3)])
        d = 3
    else:
        Tv = T.coords
        u = _line_through(Tv, t)
        tangent_T = form.grad_at(Tv)
        D = next(
            dd for dd in (_cross(tangent_T, [int(i == k) for i in range(3)]) for k in range(3))
            if any(dd) and any(_cross(dd, Tv))
        )
        conics = polys.monomials(2)
        conds = []
        conds.append([polys.evaluate({e: 1}, O) for e in conics])
        conds.append([polys.evaluate({e: 1}, Tv) for e in conics])
        conds.append([
            sum(D[i] * polys.evaluate(polys.derivative({e: 1}, i), Tv) for i in range(3))
            for e in conics
        ])
        up = polys.linear(u)
        known = [polys.to_vector(polys.mul(tp, tp), 2), polys.to_vector(polys.mul(tp, up), 2)]
        ynum = None
        for vec in nullspace(conds, 6):
            if rank_q(known + [vec]) == 3:
                ynum = polys.from_vector(vec, 2)
                break
        if ynum is None:
            raise WeierstrassError("no conic with a triple pole found")
        d = 4
    up = polys.linear(u)
    ky = 1 if flex else 2
    one = {(0, 0, 0): 1}

    def tpow(n):
        return polys.power(tp, n)

    # relation among y^2, xy, y, x^3, x^2, x, 1 after multiplying by t^d
    terms = [
        polys.mul(polys.mul(ynum, ynum), tpow(d - 2 * ky)),
        polys.mul(polys.mul(up, ynum), tpow(d - 1 - ky)),
        polys.mul(ynum, tpow(d - ky)),
        polys.mul(polys.power(up, 3), tpow(d - 3)),
        polys.mul(polys.power(up, 2), tpow(d - 2)),
        polys.mul(up, tpow(d - 1)),
        polys.mul(one, tpow(d)),
    ]
    mult = polys.monomials(d - 3)
    cols = terms + [polys.mul(form.poly, {e: -1}) for e in mult]
    rows = [[c.get(m, 0) for c in cols] for m in polys.monomials(d)]
    ker = nullspace(rows, len(cols))
    if len(ker) != 1:
        raise WeierstrassError(f"expected a unique Weierstrass relation, found {len(ker)}")
    k0, k1, k2, k3, k4, k5, k6 = ker[0][:7]
    c1, c2, c3 = k0, k1, k2
    c4, c5, c6, c7 = -k3, -k4, -k5, -k6
    if c1 == 0 or c4 == 0:
        raise WeierstrassError("degenerate Weierstrass relation")
    a1 = c2
    a3 = c1 * c4 * c3
    a2 = c1 * c5
    a4 = c1 * c1 * c4 * c6
    a6 = c1**3 * c4 * c4 * c7
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    cc4 = b2 * b2 - 24 * b4
    cc6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    alpha0, beta0 = -27 * cc4, -54 * cc6
    s = _reduce_scaling(alpha0, beta0)
    model = ShortModel(alpha0 // s**4, beta0 // s**6)
    kx = Fraction(c1 * c4)  # X = kx * x
    kyy = Fraction(c1 * c1 * c4)  # Y = kyy * y
    ax = 36 * kx / s**2
    bx = Fraction(3 * b2, s**2)
    cy = 108 * 2 * kyy / s**3
    dy = 108 * a1 * kx / s**3
    ey = Fraction(108 * a3, s**3)
    return WeierstrassModel(form, base, model, flex, T, tuple(t), tuple(u), ynum, ax, bx, cy, dy, ey)
