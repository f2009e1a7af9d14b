from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicpts import linalg, polys

from conftest import rank_mod

matrices = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n)
)
wide = st.integers(1, 4).flatmap(
    lambda r: st.lists(st.lists(st.integers(-5, 5), min_size=5, max_size=5), min_size=r, max_size=r)
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_bareiss_matches_sympy(rows):
    assert linalg.bareiss_det(rows) == sympy.Matrix(rows).det()


@settings(max_examples=60, deadline=None)
@given(wide)
def test_nullspace_and_rank(rows):
    ker = linalg.nullspace(rows, 5)
    assert len(ker) == 5 - linalg.rank_q(rows) == 5 - sympy.Matrix(rows).rank()
    for v in ker:
        assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in rows)


@settings(max_examples=40, deadline=None)
@given(wide, st.sampled_from([2, 3, 7, 101]))
def test_rank_mod_p(rows, p):
    assert linalg.rank_mod_p(rows, p) == len(linalg.pivot_columns_mod_p(rows, p)) == rank_mod(rows, p)


def test_valuation_and_primitive():
    assert linalg.valuation(7**3 * 10, 7) == 3
    assert linalg.valuation(0, 7) is None
    assert linalg.primitive([Fraction(1, 2), Fraction(-1, 3), 0]) == [3, -2, 0]


def test_lagrange_and_polys():
    assert linalg.lagrange_at_zero([1, 2, 3], [Fraction(5), Fraction(7), Fraction(9)]) == 3
    p = polys.add(polys.linear([1, 2, 0]), polys.linear([0, 0, 3]))
    assert polys.evaluate(polys.power(p, 2), (1, 1, 1)) == 36
    assert polys.degree(polys.mul(p, p)) == 2


def test_large_modulus_rejected():
    with pytest.raises(ValueError):
        linalg.pivot_columns_mod_p([[1]], 2**31 + 11)
