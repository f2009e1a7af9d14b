from __future__ import annotations

from itertools import product

import numpy as np

from cubicpts import corpus_path
from cubicpts.descent import load_mw_basis
from cubicpts.forms import load_curve_spec
from cubicpts.jacobian import GroupContext

CURVES = ["fermat", "37a", "37a_nonflex", "389a", "c256"]


def scan_points(coeffs, B):
    """Independent oracle: every primitive triple in [-B, B]^3 on the cubic."""
    c = [int(x) for x in coeffs]
    x0, x1, x2 = np.meshgrid(*[np.arange(-B, B + 1, dtype=np.int64)] * 3, indexing="ij")
    v = (c[0] * x0**3 + c[1] * x0**2 * x1 + c[2] * x0**2 * x2 + c[3] * x0 * x1**2
         + c[4] * x0 * x1 * x2 + c[5] * x0 * x2**2 + c[6] * x1**3 + c[7] * x1**2 * x2
         + c[8] * x1 * x2**2 + c[9] * x2**3)
    g = np.gcd(np.gcd(x0, x1), x2)
    first = np.where(x0 != 0, x0, np.where(x1 != 0, x1, x2))
    hit = (v == 0) & (g == 1) & (first > 0)
    return sorted(zip(x0[hit].tolist(), x1[hit].tolist(), x2[hit].tolist()))


def box_count(gram, rho):
    """Independent oracle: count integer vectors with n^T G n <= rho by a box scan."""
    from fractions import Fraction

    g = [[Fraction(x) for x in row] for row in gram]
    r = len(g)
    lam = min(np.linalg.eigvalsh(np.array([[float(x) for x in row] for row in g])))
    R = int(np.floor(np.sqrt(float(rho) / lam))) + 1
    count = 0
    for n in product(range(-R, R + 1), repeat=r):
        q = sum(g[i][j] * n[i] * n[j] for i in range(r) for j in range(r))
        if q <= rho:
            count += 1
    return count


def rank_mod(rows, p):
    """Plain Gaussian elimination over F_p (independent of the library)."""
    rows = [[x % p for x in r] for r in rows]
    rank = 0
    for c in range(len(rows[0]) if rows else 0):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


_CTX: dict = {}


def curve(name):
    if name not in _CTX:
        spec = load_curve_spec(corpus_path(name))
        ctx = GroupContext(spec.form, spec.base)
        _CTX[name] = (spec, ctx, load_mw_basis(spec.basis, ctx))
    return _CTX[name]

