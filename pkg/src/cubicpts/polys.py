"""Homogeneous polynomials stored as {exponent tuple: coefficient} dicts."""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Dict, Sequence, Tuple

Exp = Tuple[int, ...]
Poly = Dict[Exp, object]


@lru_cache(maxsize=None)
def monomials(deg: int, nvars: int = 3) -> tuple[Exp, ...]:
    """All exponent vectors of total degree ``deg``, descending lexicographic."""
    out = [e for e in product(range(deg, -1, -1), repeat=nvars) if sum(e) == deg]
    return tuple(out)


def add(f: Poly, g: Poly, scale=1) -> Poly:
    out = dict(f)
    for e, c in g.items():
        v = out.get(e, 0) + scale * c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def mul(f: Poly, g: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def power(f: Poly, k: int, nvars: int = 3) -> Poly:
    out: Poly = {(0,) * nvars: 1}
    for _ in range(k):
        out = mul(out, f)
    return out


def linear(coeffs: Sequence) -> Poly:
    n = len(coeffs)
    return {tuple(int(i == j) for j in range(n)): c for i, c in enumerate(coeffs) if c}


def evaluate(f: Poly, point: Sequence):
    total = 0
    for e, c in f.items():
        term = c
        for x, k in zip(point, e):
            if k:
                term = term * x**k
        total = total + term
    return total


def derivative(f: Poly, i: int) -> Poly:
    out: Poly = {}
    for e, c in f.items():
        if e[i]:
            d = list(e)
            d[i] -= 1
            out[tuple(d)] = out.get(tuple(d), 0) + c * e[i]
    return {e: c for e, c in out.items() if c}


def degree(f: Poly) -> int:
    degs = {sum(e) for e in f}
    if len(degs) > 1:
        raise ValueError("polynomial is not homogeneous")
    return degs.pop() if degs else 0


def to_vector(f: Poly, deg: int, nvars: int = 3) -> list:
    return [f.get(e, 0) for e in monomials(deg, nvars)]


def from_vector(vec: Sequence, deg: int, nvars: int = 3) -> Poly:
    return {e: c for e, c in zip(monomials(deg, nvars), vec) if c}
