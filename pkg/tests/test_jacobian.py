from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import isqrt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicpts.forms import parse_form
from cubicpts.jacobian import (
    BadPrimeError, GroupContext, NotOnCurveError, find_base_point, fp_points, reduce_point,
)
from cubicpts.points import PlanePoint
from cubicpts.weierstrass import ShortModel, to_weierstrass

from conftest import CURVES, curve

SMALL_PRIMES = [5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


def sample(name, n):
    _, ctx, basis = curve(name)
    gens = basis.generators
    R = 8 if len(gens) == 1 else 4
    out = []
    for t in basis.torsion:
        for coeffs in product(range(-R, R + 1), repeat=len(gens)):
            out.append(basis.combine(coeffs, t))
    return sorted(set(out))[:n]


@pytest.mark.parametrize("name", CURVES)


def test_group_axioms(name):
    ctx = curve(name)[1]
    pts = sample(name, 12)
    O = ctx.zero
    for P in pts:
        assert ctx.on_curve(P)
        assert ctx.add(P, O) == P
        assert ctx.add(P, ctx.neg(P)) == O
        assert ctx.psi(P, P) == O
        for Q in pts[:6]:
            assert ctx.add(P, Q) == ctx.add(Q, P)
            assert ctx.psi(P, Q) == ctx.neg(ctx.psi(Q, P))
            assert ctx.add(ctx.psi(P, Q), Q) == P
            for R in pts[:3]:
                assert ctx.add(ctx.add(P, Q), R) == ctx.add(P, ctx.add(Q, R))


@settings(max_examples=40, deadline=None)
@given(st.integers(-6, 6), st.integers(-6, 6))


def test_scalar_multiplication_is_linear(a, b):
    ctx, basis = curve("389a")[1:]
    G = basis.generators[0]
    assert ctx.smul(a + b, G) == ctx.add(ctx.smul(a, G), ctx.smul(b, G))
    assert ctx.smul(a * b, G) == ctx.smul(a, ctx.smul(b, G))


def test_collinear_triples_sum_to_pivot():
    ctx, basis = curve("37a")[1:]
    pivot = ctx.third_intersection(ctx.zero, ctx.zero)
    for P, Q in product(sample("37a", 6), repeat=2):
        R = ctx.third_intersection(P, Q)
        assert ctx.add(ctx.add(P, Q), R) == ctx.neg(pivot)


def count_mod_p(f, p):
    n = 0
    for v in [(0, 0, 1)] + [(0, 1, b) for b in range(p)] + [(1, a, b) for a in range(p) for b in range(p)]:
        n += f(*v) % p == 0
    return n


@pytest.mark.parametrize("name", CURVES)


def test_hasse_window_and_exhaustive_count(name):
    ctx = curve(name)[1]
    model = ctx.weierstrass.model
    for p in SMALL_PRIMES:
        if p in ctx.bad_primes:
            with pytest.raises(BadPrimeError):
                ctx.fp(p)
            continue
        pts = fp_points(ctx.curve, p)
        assert abs(len(pts) - p - 1) <= isqrt(4 * p)
        if p <= 23:
            assert len(pts) == count_mod_p(ctx.curve, p)
        if model.discriminant % p:
            short = 1 + sum(1 + legendre(x**3 + model.alpha * x + model.beta, p) for x in range(p))
            assert short == len(pts)


def legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@pytest.mark.parametrize("name", CURVES)


def test_reduction_is_a_homomorphism(name):
    ctx = curve(name)[1]
    pts = sample(name, 8)
    for p in (5, 7, 11, 13):
        if p in ctx.bad_primes:
            continue
        G = ctx.fp(p)
        for P, Q in product(pts, repeat=2):
            assert reduce_point(ctx.add(P, Q), p) == G.add(reduce_point(P, p), reduce_point(Q, p))
        for P in pts:
            k = G.order(reduce_point(P, p), 2 * p + 2)
            assert k is not None and G.smul(k, reduce_point(P, p)) == G.zero


def test_torsion_orders():
    ctx, basis = curve("fermat")[1:]
    assert sorted(ctx.torsion_order(t) for t in basis.torsion) == [1, 3, 3]
    ctx, basis = curve("c256")[1:]
    assert ctx.torsion_order(PlanePoint(0, 0, 1)) == 2
    assert ctx.torsion_order(basis.generators[0]) is None


def test_context_errors():
    with pytest.raises(NotOnCurveError):
        GroupContext(curve("37a")[0].form, (1, 1, 1))
    with pytest.raises(ValueError):
        GroupContext(parse_form("x0^3 + x1^3"), (1, -1, 0))
    assert find_base_point(curve("389a")[0].form).height <= 1


@pytest.mark.parametrize(
    "name,alpha,beta,flex",
    [("37a", -16, 16, True), ("389a", -3024, 46224, True), ("fermat", 0, -432, True)],
)


def test_frozen_short_models(name, alpha, beta, flex):
    W = curve(name)[1].weierstrass
    assert (W.alpha, W.beta, W.flex) == (alpha, beta, flex)
    assert str(W.model) == f"[{alpha}/1, {beta}/1]"


def test_nonflex_base():
    W = curve("37a_nonflex")[1].weierstrass
    assert not W.flex and W.T == PlanePoint.normalized(1, -1, 1)
    # same j-invariant as the flex model of the same curve
    a, b = W.alpha, W.beta
    assert Fraction(a**3, 4 * a**3 + 27 * b**2) == Fraction((-16) ** 3, 4 * (-16) ** 3 + 27 * 16**2)


@pytest.mark.parametrize("name", CURVES)


def test_weierstrass_round_trip_and_homomorphism(name):
    ctx = curve(name)[1]
    W = ctx.weierstrass
    pts = sample(name, 200)
    for P in pts:
        Z = W.phi(P)
        assert W.model.contains(Z)
        assert W.phi_inverse(Z) == P
    for P, Q in zip(pts, reversed(pts)):
        assert W.phi(ctx.add(P, Q)) == W.model.add(W.phi(P), W.phi(Q))


def test_short_model_arithmetic():
    E = ShortModel(-16, 16)
    Z = (Fraction(0), Fraction(4))
    assert E.contains(Z) and E.smul(3, Z) == E.add(Z, E.add(Z, Z))
    assert E.add(Z, E.neg(Z)) is None
    assert E.discriminant == -16 * (4 * (-16) ** 3 + 27 * 256)


def test_scaling_is_minimal():
    W = to_weierstrass(curve("c256")[0].form, PlanePoint(0, 1, 0))
    a, b = W.alpha, W.beta
    assert not any(a % u**4 == 0 and b % u**6 == 0 for u in range(2, 50))

