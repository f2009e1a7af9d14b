from __future__ import annotations

from fractions import Fraction
from math import log

import numpy as np
import pytest

from cubicpts.heights import (
    HeightError, canonical_height, comparison_report, crude_height_audit, doubling_heights,
    duplication_bounds, gram, height_pairing, height_report, hx, naive_height,
)
from cubicpts.jacobian import NotOnCurveError
from cubicpts.points import PlanePoint
from cubicpts.weierstrass import ShortModel

from conftest import CURVES, curve


def test_naive_and_x_heights():
    assert naive_height(PlanePoint(2, -7, 3)) == log(7)
    E = ShortModel(-16, 16)
    assert hx(E, (Fraction(161, 16), Fraction(0))) == log(161)
    assert hx(E, (Fraction(-3, 1000), Fraction(0))) == log(1000)
    assert hx(E, None) == 0.0


def test_reference_generator_heights():
    # reference values for the generators of conductors 37 and 389
    ctx, basis = curve("37a")[1:]
    assert canonical_height(ctx, basis.generators[0]) == pytest.approx(0.0511114082, abs=1e-8)
    ctx, basis = curve("389a")[1:]
    assert basis.regulator == pytest.approx(0.152460177943, abs=1e-7)


def test_flex_and_nonflex_bases_agree():
    a = curve("37a")[1:]
    b = curve("37a_nonflex")[1:]
    assert a[1].regulator == pytest.approx(b[1].regulator, abs=3e-8)


@pytest.mark.parametrize("name", ["37a", "389a", "c256"])
def test_series_matches_exact_doubling(name):
    ctx, basis = curve(name)[1:]
    P = basis.generators[0]
    exact = doubling_heights(ctx, P, 6)
    h = canonical_height(ctx, P, 1e-10)
    bound = duplication_bounds(ctx.weierstrass.model).term_bound
    for k, v in enumerate(exact):
        assert abs(v - h) <= bound * 4.0**-k / 3 + 1e-9


@pytest.mark.parametrize("name", ["37a", "389a", "c256"])
def test_quadratic_scaling(name):
    ctx, basis = curve(name)[1:]
    G = basis.generators[-1]
    h = canonical_height(ctx, G)
    for n in (2, 3, 5, -1):
        assert canonical_height(ctx, ctx.smul(n, G)) == pytest.approx(n * n * h, abs=1e-6)


@pytest.mark.parametrize("name", CURVES)
def test_torsion_has_zero_height(name):
    ctx, basis = curve(name)[1:]
    for t in basis.torsion:
        assert canonical_height(ctx, t) == 0.0


def test_tolerance_controls_accuracy():
    ctx, basis = curve("389a")[1:]
    P = basis.combine((2, -1))
    coarse = canonical_height(ctx, P, 1e-4)
    fine = canonical_height(ctx, P, 1e-12)
    assert abs(coarse - fine) < 1e-4


def test_invalid_inputs():
    ctx = curve("37a")[1]
    with pytest.raises(NotOnCurveError):
        canonical_height(ctx, PlanePoint(1, 1, 1))
    with pytest.raises(ValueError):
        canonical_height(ctx, ctx.zero, 0)
    with pytest.raises(HeightError):
        canonical_height(ctx, PlanePoint(0, 0, 1), 1e-30)


def test_gram_is_symmetric_positive_definite():
    ctx, basis = curve("389a")[1:]
    G = gram(ctx, basis.generators)
    assert np.allclose(G, G.T) and np.all(np.linalg.eigvalsh(G) > 0)
    P, Q = basis.generators
    assert height_pairing(ctx, P, Q) == pytest.approx(G[0, 1], abs=1e-12)
    assert height_pairing(ctx, P, ctx.neg(Q)) == pytest.approx(-G[0, 1], abs=5e-8)


def test_height_report_csv():
    ctx = curve("37a")[1]
    text = height_report(ctx, PlanePoint(0, 0, 1)).as_csv()
    header, row = text.splitlines()
    assert header == "point,h_naive,h_x,h_hat,tol"
    assert row.startswith('"[0,0,1]",0.000000000000,')


def test_comparison_and_audit():
    ctx, basis = curve("389a")[1:]
    pts = [basis.combine((a, b)) for a in range(-2, 3) for b in range(-2, 3)]
    rep = comparison_report(ctx, pts)
    assert rep.samples == len(pts) and rep.model_constant > 0 and rep.max_difference >= 0
    G = basis.generators[0]
    Q = ctx.smul(3, G)
    assert crude_height_audit(ctx, [(Q, Q, Q)], 10**4, 1) == pytest.approx(log(Q.height) / log(10**4))
    with pytest.raises(ValueError):
        crude_height_audit(ctx, [(Q, G, Q)], 10**9, 1)
    with pytest.raises(ValueError):
        crude_height_audit(ctx, [], 100, 1)
