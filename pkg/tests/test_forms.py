from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicpts import corpus_path, polys
from cubicpts.forms import (
    CubicForm, DegreeError, FormError, FormSyntaxError, SingularCurveError, ZeroFormError,
    bad_primes, coeff_height, content_normalize, format_curve_spec, load_curve_spec,
    parse_curve_spec, parse_form, require_smooth, smoothness_certificate,
)

FERMAT = CubicForm((1, 0, 0, 0, 0, 0, 1, 0, 0, 1))


def weierstrass(a, b):
    return CubicForm((1, 0, 0, 0, 0, a, 0, -1, 0, b))


def test_coefficient_order():
    assert list(polys.monomials(3)[:3]) == [(3, 0, 0), (2, 1, 0), (2, 0, 1)]
    assert parse_form("x0^2*x2").coeffs == (0, 0, 1, 0, 0, 0, 0, 0, 0, 0)
    assert parse_form("x1*x2^2").coeffs == (0, 0, 0, 0, 0, 0, 0, 0, 1, 0)


def test_parse_fermat_and_products():
    assert parse_form("x0^3 + x1^3 + x2^3") == FERMAT
    f = parse_form("(x0 + x1)*(x0 - x1)*x2")
    assert f.coeffs == (0, 0, 1, 0, 0, 0, 0, -1, 0, 0)
    assert f(3, 1, 2) == 16


def test_parse_errors():
    with pytest.raises(DegreeError):
        parse_form("x0^2 + x1^2")
    with pytest.raises(DegreeError):
        parse_form("x0^3 + x1")
    with pytest.raises(ZeroFormError):
        parse_form("x0^3 - x0^3")
    with pytest.raises(FormSyntaxError) as exc:
        parse_form("x0^3 + * x1^3")
    assert exc.value.position >= 0
    with pytest.raises(FormError):
        parse_form("x0^3 + y^3")


def test_content_and_height():
    f = CubicForm((2, 0, 0, 0, 0, 0, 4, 0, 0, -6))
    g = content_normalize(f)
    assert g.coeffs == (1, 0, 0, 0, 0, 0, 2, 0, 0, -3)
    assert coeff_height(g) == 3
    assert content_normalize(CubicForm(tuple(-c for c in FERMAT.coeffs))) == FERMAT


def test_fermat_discriminant():
    assert FERMAT.disc == 3**12


@pytest.mark.parametrize("a,b", [(-1, 0), (0, 1), (-16, 16), (-2, 0), (1, 1), (-3024, 46224)])
def test_weierstrass_discriminant(a, b):
    assert weierstrass(a, b).disc == 432 * (4 * a**3 + 27 * b**2)


def test_singular_forms():
    node = weierstrass(-3, 2)  # y^2 = (x - 1)^2 (x + 2)
    assert node.disc == 0
    cert = smoothness_certificate(node)
    assert not cert.smooth
    assert node(*cert.witness) == 0 and node.grad_at(cert.witness) == (0, 0, 0)
    with pytest.raises(SingularCurveError):
        require_smooth(node)
    # three concurrent lines over Q(i): singular point is rational anyway
    assert smoothness_certificate(parse_form("x0^3 + x1^3")).smooth is False


def singular_mod_p(f, p):
    for v in product(range(p), repeat=3):
        if v == (0, 0, 0):
            continue
        if f(*v) % p == 0 and all(g % p == 0 for g in f.grad_at(v)):
            return True
    return False


@pytest.mark.parametrize("name", ["fermat", "37a", "389a", "c256"])
def test_bad_primes_match_exhaustive_scan(name):
    f = load_curve_spec(corpus_path(name)).form
    bad = bad_primes(f)
    for p in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        assert (p in bad) == singular_mod_p(f, p), p


small = st.integers(-3, 3)


@settings(max_examples=25, deadline=None)
@given(st.lists(small, min_size=10, max_size=10), st.integers(-3, 3).filter(bool))
def test_discriminant_scales_by_twelfth_power(coeffs, lam):
    f = CubicForm(tuple(coeffs))
    if f.is_zero:
        return
    assert f.scaled(lam).disc == lam**12 * f.disc


@settings(max_examples=20, deadline=None)
@given(st.lists(small, min_size=10, max_size=10), st.lists(small, min_size=9, max_size=9))
def test_discriminant_under_linear_change(coeffs, m):
    f = CubicForm(tuple(coeffs))
    if f.is_zero:
        return
    M = [m[0:3], m[3:6], m[6:9]]
    det = (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
           + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))
    g = f.substitute(M)
    if g.is_zero:
        return
    assert g.disc == det**12 * f.disc


def test_curve_spec_roundtrip(tmp_path):
    spec = load_curve_spec(corpus_path("37a"))
    assert spec.name == "37a" and spec.base == (0, 1, 0)
    assert spec.basis is not None and spec.basis.exists()
    again = parse_curve_spec(format_curve_spec(spec))
    assert again.form == spec.form and again.base == spec.base
    with pytest.raises(FormError):
        parse_curve_spec("name: x\ncoeffs: 1 2 3\n")
    with pytest.raises(FormError):
        parse_curve_spec("name: x\n")
