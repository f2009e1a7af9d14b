"""Chord-tangent group law on a plane cubic, over Q and over F_p.

The law runs directly on the plane model with an arbitrary rational base
point as identity: P + Q = O o (P o Q), where ``o`` takes the third
intersection of a line with the cubic.  For a line through P and Q the
restriction of F to sP + tQ factors as st((grad F(P).Q) s + (grad F(Q).P) t),
which gives the third point in closed form with integer arithmetic only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Iterator, Sequence

import numpy as np

from .forms import CubicForm, bad_primes, require_smooth
from .points import PlanePoint, enumerate_points

Triple = tuple[int, int, int]


class BadPrimeError(ValueError):
    pass


class NotOnCurveError(ValueError):
    pass


def _cross(u: Sequence, v: Sequence) -> list:
    return [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]


def _dot(u: Sequence, v: Sequence):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


@dataclass(frozen=True, order=True)
class FpPoint:
    x0: int
    x1: int
    x2: int
    p: int

    @classmethod
    def normalized(cls, v: Sequence[int], p: int) -> "FpPoint":
        v = [int(x) % p for x in v]
        k = next((i for i in range(3) if v[i]), None)
        if k is None:
            raise ValueError("(0, 0, 0) is not a projective point")
        inv = pow(v[k], -1, p)
        return cls(*((x * inv) % p for x in v), p)

    @property
    def coords(self) -> Triple:
        return (self.x0, self.x1, self.x2)

    def __str__(self) -> str:
        return f"[{self.x0},{self.x1},{self.x2}] mod {self.p}"


class _ChordLaw:
    """Shared chord-tangent arithmetic; subclasses fix the coefficient ring."""

    form: CubicForm
    zero: object

    def _make(self, v: Sequence[int]):
        raise NotImplementedError

    def _reduce(self, x: int) -> int:
        return x

    def _coords(self, P) -> Triple:
        return P.coords

    def _proportional(self, u: Sequence[int], v: Sequence[int]) -> bool:
        return all(self._reduce(c) == 0 for c in _cross(u, v))

    def on_curve(self, P) -> bool:
        return self._reduce(self.form(*self._coords(P))) == 0

    def third(self, P, Q):
        """Third intersection of the line PQ (the tangent if P == Q) with the cubic."""
        a, b = self._coords(P), self._coords(Q)
        F = self.form
        if P == Q:
            g = [self._reduce(x) for x in F.grad_at(a)]
            for k in range(3):
                e = [int(i == k) for i in range(3)]
                d = [self._reduce(x) for x in _cross(g, e)]
                if any(d) and not self._proportional(d, a):
                    break
            else:
                raise ArithmeticError(f"no tangent direction at {P}")
            s = self._reduce(F(*d))
            t = self._reduce(_dot(F.grad_at(d), a))
            r = [s * x - t * y for x, y in zip(a, d)]
        else:
            s = self._reduce(_dot(F.grad_at(b), a))
            t = self._reduce(_dot(F.grad_at(a), b))
            r = [s * x - t * y for x, y in zip(a, b)]
        if all(self._reduce(x) == 0 for x in r):
            raise ArithmeticError(f"line through {P} and {Q} lies in the curve")
        return self._make(r)

    @cached_property
    def _neg_pivot(self):
        return self.third(self.zero, self.zero)

    def add(self, P, Q):
        return self.third(self.zero, self.third(P, Q))

    def neg(self, P):
        return self.third(P, self._neg_pivot)

    def sub(self, P, Q):
        return self.add(P, self.neg(Q))

    def psi(self, P, Q):
        """Representative of the class [P] - [Q], i.e. P - Q in the group law."""
        return self.sub(P, Q)

    def smul(self, m: int, P):
        if m < 0:
            return self.smul(-m, self.neg(P))
        result = self.zero
        addend = P
        while m:
            if m & 1:
                result = self.add(result, addend)
            m >>= 1
            if m:
                addend = self.add(addend, addend)
        return result

    def order(self, P, limit: int) -> int | None:
        """Smallest n in 1..limit with nP = O, else None."""
        Q = P
        for n in range(1, limit + 1):
            if Q == self.zero:
                return n
            Q = self.add(Q, P)
        return None


class CubicGroup(_ChordLaw):
    """Group law on C(Q) with identity ``base``."""

    def __init__(self, form: CubicForm, base: PlanePoint):
        require_smooth(form)
        self.form = form
        self.zero = base
        if not self.on_curve(base):
            raise NotOnCurveError(f"base point {base} is not on the curve")

    def _make(self, v):
        return PlanePoint.normalized(*v)

    def check(self, P: PlanePoint) -> PlanePoint:
        if not self.on_curve(P):
            raise NotOnCurveError(f"{P} is not on the curve")
        return P


class FpGroup(_ChordLaw):
    """The same law on the reduction C(F_p), p a prime of good reduction."""

    def __init__(self, form: CubicForm, base: PlanePoint, p: int):
        if p in bad_primes(form):
            raise BadPrimeError(f"{p} is a prime of bad reduction")
        self.form = form
        self.p = p
        self.zero = reduce_point(base, p)

    def _make(self, v):
        return FpPoint.normalized(v, self.p)

    def _reduce(self, x: int) -> int:
        return x % self.p

    def points(self) -> list[FpPoint]:
        return fp_points(self.form, self.p)


def reduce_point(P: PlanePoint, p: int) -> FpPoint:
    return FpPoint.normalized(P.coords, p)


def fp_points(form: CubicForm, p: int) -> list[FpPoint]:
    """Exhaustive list of C(F_p), sorted."""
    c = [x % p for x in form.coeffs]
    r = np.arange(p, dtype=np.int64)
    a, b = np.meshgrid(r, r, indexing="ij")

    def ev(x0, x1, x2):
        terms = [
            (c[0], x0 * x0 % p * x0), (c[1], x0 * x0 % p * x1), (c[2], x0 * x0 % p * x2),
            (c[3], x0 * x1 % p * x1), (c[4], x0 * x1 % p * x2), (c[5], x0 * x2 % p * x2),
            (c[6], x1 * x1 % p * x1), (c[7], x1 * x1 % p * x2), (c[8], x1 * x2 % p * x2),
            (c[9], x2 * x2 % p * x2),
        ]
        total = 0
        for k, m in terms:
            total = (total + k * (m % p)) % p
        return total

    out = []
    one = np.ones_like(a)
    zero = np.zeros_like(a)
    mask = ev(one, a, b) == 0
    out += [FpPoint(1, int(x), int(y), p) for x, y in zip(a[mask], b[mask])]
    mask = ev(zero[0], one[0], r) == 0
    out += [FpPoint(0, 1, int(y), p) for y in r[mask]]
    if c[9] == 0:
        out.append(FpPoint(0, 0, 1, p))
    return sorted(out)


def find_base_point(form: CubicForm, bound: int = 30) -> PlanePoint:
    pts = enumerate_points(form, bound)
    if not pts:
        raise ValueError(f"no rational point of height <= {bound}; supply a base point")
    return min(pts, key=lambda P: (P.height, P))


class GroupContext:
    """A smooth cubic with a chosen rational base point and its Weierstrass model."""

    def __init__(self, form: CubicForm, base: PlanePoint | Sequence[int] | None = None):
        require_smooth(form)
        if base is None:
            base = find_base_point(form)
        elif not isinstance(base, PlanePoint):
            base = PlanePoint.normalized(*base)
        self.curve = form
        self.base = base
        self.group = CubicGroup(form, base)
        self._fp: dict[int, FpGroup] = {}

    @classmethod
    def from_spec(cls, spec) -> "GroupContext":
        return cls(spec.form, spec.base)

    @cached_property
    def weierstrass(self):
        from .weierstrass import to_weierstrass

        return to_weierstrass(self.curve, self.base)

    @cached_property
    def bad_primes(self) -> frozenset[int]:
        return frozenset(bad_primes(self.curve))

    def fp(self, p: int) -> FpGroup:
        if p not in self._fp:
            self._fp[p] = FpGroup(self.curve, self.base, p)
        return self._fp[p]

    # thin wrappers so callers can write ctx.add(P, Q)
    @property
    def zero(self) -> PlanePoint:
        return self.base

    def third_intersection(self, P, Q):
        return self.group.third(P, Q)

    def add(self, P, Q):
        return self.group.add(P, Q)

    def neg(self, P):
        return self.group.neg(P)

    def sub(self, P, Q):
        return self.group.sub(P, Q)

    def smul(self, m: int, P):
        return self.group.smul(m, P)

    def psi(self, P, Q):
        return self.group.psi(P, Q)

    def on_curve(self, P) -> bool:
        return self.group.on_curve(P)

    def is_torsion(self, P, limit: int = 12) -> bool:
        return self.torsion_order(P, limit) is not None

    def torsion_order(self, P, limit: int = 12) -> int | None:
        """Order of P if it is at most ``limit``.

        Non-integral Weierstrass coordinates rule torsion out at once
        (Nagell-Lutz), which avoids forming large multiples.
        """
        if P == self.base:
            return 1
        if not self.weierstrass.could_be_torsion(self.weierstrass.phi(P)):
            return None
        return self.group.order(P, limit)


def iter_multiples(group: _ChordLaw, P, count: int) -> Iterator:
    Q = group.zero
    for _ in range(count):
        yield Q
        Q = group.add(Q, P)
