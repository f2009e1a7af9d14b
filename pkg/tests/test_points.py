from __future__ import annotations

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cubicpts.forms import CubicForm, parse_form
from cubicpts.points import (
    PlanePoint, brute_force_points, count_table, enumerate_points, format_count_csv,
    parse_point, trenta_diagnostic,
)

from conftest import CURVES, curve, scan_points

FERMAT = parse_form("x0^3 + x1^3 + x2^3")


def test_normalization():
    assert PlanePoint.normalized(-2, 4, 0) == PlanePoint(1, -2, 0)
    assert PlanePoint.normalized(0, -3, 6) == PlanePoint(0, 1, -2)
    assert PlanePoint.normalized(0, 0, -5) == PlanePoint(0, 0, 1)
    assert PlanePoint(1, -2, 0).height == 2
    with pytest.raises(ValueError):
        PlanePoint.normalized(0, 0, 0)


def test_parse_point():
    assert parse_point("[2,-4,6]") == PlanePoint(1, -2, 3)
    assert parse_point("0 1 -1") == PlanePoint(0, 1, -1)
    assert str(PlanePoint(0, 1, -1)) == "[0,1,-1]"
    with pytest.raises(ValueError):
        parse_point("1 2")


def test_fermat_counts():
    assert [p.coords for p in enumerate_points(FERMAT, 10)] == [(0, 1, -1), (1, -1, 0), (1, 0, -1)]
    assert count_table(FERMAT, [1, 10, 100]) == [(1, 3), (10, 3), (100, 3)]
    assert format_count_csv([(10, 3)]) == "B,N\n10,3\n"


@pytest.mark.parametrize("name", CURVES)
def test_sieve_matches_library_scan(name):
    f = curve(name)[0].form
    assert enumerate_points(f, 20) == brute_force_points(f, 20)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=10, max_size=10), st.integers(1, 12))
def test_sieve_matches_scan_on_random_smooth_cubics(coeffs, B):
    f = CubicForm(tuple(coeffs))
    assume(not f.is_zero and f.disc != 0)
    assert [p.coords for p in enumerate_points(f, B)] == scan_points(f.coeffs, B)


def test_parallel_workers_agree():
    f = curve("389a")[0].form
    assert enumerate_points(f, 200, workers=3) == enumerate_points(f, 200, workers=1)


def test_count_table_rejects_unsorted():
    with pytest.raises(ValueError):
        count_table(FERMAT, [10, 5])


def test_diagnostic():
    rep = trenta_diagnostic(FERMAT, 100)
    assert rep.N == 3 and rep.ratio is None
    f = curve("389a")[0].form
    rep = trenta_diagnostic(f, 100)
    assert rep.N >= 10 and rep.coeff_height == 2
    assert rep.ratio == pytest.approx(0.6931471805599453 / (30 * 4.605170185988092))
    assert rep.as_csv().startswith("B,N,coeff_height,ratio\n100,")
    with pytest.raises(ValueError):
        trenta_diagnostic(FERMAT, 2)


def test_singular_input_rejected():
    with pytest.raises(ValueError):
        enumerate_points(parse_form("x0^3 + x1^3"), 5)
