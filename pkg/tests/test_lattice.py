from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicpts import lattice
from cubicpts.lattice import HeightForm
from cubicpts.points import enumerate_points

from conftest import box_count, curve


def test_identity_disc():
    I2 = HeightForm.rational([[1, 0], [0, 1]])
    assert lattice.ellipsoid_count(I2, 25) == 81
    assert lattice.davenport_check(I2, 25) == (81, 400.0, True)
    assert lattice.ellipsoid_count(I2, 0) == 1
    assert lattice.ellipsoid_count(I2, -1) == 0
    assert lattice.ellipsoid_count(HeightForm.rational([]), 3) == 1


def test_boundary_is_exact_for_rational_forms():
    Q = HeightForm.rational([[Fraction(1, 3), 0], [0, Fraction(1, 3)]])
    # n = (3, 0) lies exactly on Q = 3
    assert lattice.ellipsoid_count(Q, 3) == box_count([[Fraction(1, 3), 0], [0, Fraction(1, 3)]], 3)


@st.composite
def rational_forms(draw):
    r = draw(st.integers(1, 3))
    L = [[Fraction(draw(st.integers(-3, 3)), draw(st.integers(1, 3))) for _ in range(r)] for _ in range(r)]
    eps = Fraction(1, draw(st.integers(1, 5)))
    return [[sum(L[k][i] * L[k][j] for k in range(r)) + (eps if i == j else 0) for j in range(r)] for i in range(r)]


@settings(max_examples=40, deadline=None)
@given(rational_forms(), st.fractions(min_value=0, max_value=20, max_denominator=6))
def test_count_matches_box_oracle(g, rho):
    form = HeightForm.rational(g)
    assert lattice.ellipsoid_count(form, rho) == box_count(g, rho)
    count, bound, ok = lattice.davenport_check(form, rho)
    assert ok and count <= bound


def test_successive_minima():
    mins = lattice.successive_minima(HeightForm.rational([[1, 0], [0, 4]]))
    assert mins.minima == [1.0, 2.0]
    mins = lattice.successive_minima(HeightForm.rational([[2, 1], [1, 2]]))
    assert mins.minima == pytest.approx([2**0.5, 2**0.5])
    with pytest.raises(lattice.DeskScaleError):
        lattice.successive_minima(HeightForm.rational(np.eye(7, dtype=int).tolist()))


def test_indefinite_rejected():
    with pytest.raises(lattice.IndefiniteFormError):
        HeightForm.rational([[1, 2], [2, 1]])
    with pytest.raises(lattice.IndefiniteFormError):
        HeightForm(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_real_form_reports_ambiguity():
    basis = curve("37a")[2]
    form = HeightForm.from_basis(basis)
    h = float(basis.gram[0, 0])
    res = lattice.ellipsoid_count_report(form, 4 * h)
    assert res.count == 5 and res.ambiguous == 2 and res.certain == 3


def test_david_report():
    assert lattice.david_exponent_sum_ok()
    assert sum(-e for e in lattice.DAVID_EXPONENTS[:4]) == Fraction(337, 480)
    text = lattice.david_report([0.5, 0.7], -16 * 389)
    lines = text.splitlines()
    assert lines[0] == "j,M_j,exponent,ratio" and len(lines) == 4
    assert lines[-1].endswith("< 1")
    with pytest.raises(ValueError):
        lattice.david_report([1.0], 2)


@pytest.mark.parametrize("name", ["fermat", "37a", "389a", "c256"])
def test_growth_report(name):
    basis = curve(name)[2]
    pts = enumerate_points(basis.ctx.curve, 300)
    rows = lattice.growth_report(basis, pts, [10, 100, 300])
    assert all(r.ok and r.N <= r.lattice_bound for r in rows)
    assert [r.N for r in rows] == sorted(r.N for r in rows)
    text = lattice.format_growth_csv(rows)
    assert text.splitlines()[0] == "B,N,h_max,torsion_times_ellipsoid,ambiguous,ellipsoid_c_log_B,log_B_power"
    assert len(text.splitlines()) == 4
