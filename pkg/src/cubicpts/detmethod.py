"""Determinant method on the curves X_R inside P^2 x P^2.

Pairs (P, Q) on X_R with Q in one residue class mod p are evaluated on a
fixed set of bi-degree (a, b) monomials whose cosets span the forms modulo
those vanishing on X_R.  For p large compared with the archimedean size of
the E x E minors, each minor is divisible by a power of p it cannot carry
unless it vanishes, so the matrix has a kernel: an auxiliary form through
every pair in the class.

Matrix rows use the primitive integer triples of P and Q.  Any other
representative whose coordinates are not all divisible by p differs from
these by a p-adic unit, so every p-adic valuation below is unaffected.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, floor, isqrt, log
from typing import Sequence

from sympy import isprime, nextprime

from . import polys
from .descent import DescentClass, MordellWeilBasis, XRPair, xr_pairs_for_class
from .heights import crude_height_audit
from .jacobian import BadPrimeError, FpPoint, GroupContext, fp_points, reduce_point
from .linalg import bareiss_det, nullspace, pivot_columns_mod_p, rank_q, valuation
from .points import PlanePoint

log_ = logging.getLogger(__name__)

SAFETY = 1.1
DEFAULT_C0 = 30.0


class AdmissibilityError(ValueError):
    pass


class NoAuxiliaryFormError(ArithmeticError):
    pass


class BasisRankError(ArithmeticError):
    pass


def admissible(a: int, b: int, m: int) -> bool:
    return a >= 1 and b >= 1 and m >= 1 and Fraction(1, a) + Fraction(m * m, b) < 3


def dimension_formula(a: int, b: int, m: int) -> int:
    """#E = 3(m^2 a + b), valid when 1/a + m^2/b < 3."""
    if not admissible(a, b, m):
        raise AdmissibilityError(f"(a, b, m) = ({a}, {b}, {m}) violates 1/a + m^2/b < 3")
    return 3 * (m * m * a + b)


@dataclass(frozen=True, order=True)
class BiMonomial:
    e: tuple[int, int, int]
    f: tuple[int, int, int]

    def evaluate(self, x: Sequence, y: Sequence, mod: int | None = None):
        out = 1
        for v, k in zip(list(x) + list(y), self.e + self.f):
            out = out * (pow(v, k, mod) if mod else v**k)
            if mod:
                out %= mod
        return out

    def __str__(self) -> str:
        return "x^" + "".join(map(str, self.e)) + "y^" + "".join(map(str, self.f))


@lru_cache(maxsize=None)
def all_bimonomials(a: int, b: int) -> tuple[BiMonomial, ...]:
    """Every bi-degree (a, b) monomial, descending lexicographic on (e, f)."""
    return tuple(BiMonomial(e, f) for e in polys.monomials(a) for f in polys.monomials(b))


@dataclass(frozen=True)
class MonomialBasis:
    a: int
    b: int
    m: int
    elems: tuple[BiMonomial, ...]
    q: int

    @property
    def E(self) -> int:
        return len(self.elems)


def xr_samples_mod_q(ctx: GroupContext, R: PlanePoint, m: int, q: int, count: int | None = None) -> list[tuple[FpPoint, FpPoint]]:
    """Pairs (P', Q') on X_R over F_q, one for each of the first ``count`` points Q'."""
    G = ctx.fp(q)  # raises on bad q
    Rb = reduce_point(R, q)
    shift = G.smul(m - 1, Rb)
    pts = fp_points(ctx.curve, q)
    if count is not None:
        pts = pts[:count]
    return [(G.sub(G.smul(m, Qp), shift), Qp) for Qp in pts]


def _sample_prime(ctx: GroupContext, E: int, attempt: int) -> int:
    q = max(101, 4 * (E + 10))
    bad = ctx.bad_primes
    k = 0
    while True:
        q = nextprime(q)
        if q not in bad:
            if k == attempt:
                return q
            k += 1


def monomial_basis(ctx: GroupContext, R: PlanePoint, m: int, a: int, b: int, retries: int = 3) -> MonomialBasis:
    """Pivot monomials of the evaluation matrix on X_R(F_q), in the fixed order."""
    E = dimension_formula(a, b, m)
    if b < m * m:
        raise AdmissibilityError(f"b = {b} is below m^2 = {m * m}")
    mons = all_bimonomials(a, b)
    for attempt in range(retries + 1):
        q = _sample_prime(ctx, E, attempt)
        samples = xr_samples_mod_q(ctx, R, m, q)
        if len(samples) < E + 10:
            continue
        rows = [[mo.evaluate(P.coords, Q.coords, q) for mo in mons] for P, Q in samples]
        piv = pivot_columns_mod_p(rows, q)
        if len(piv) == E:
            return MonomialBasis(a, b, m, tuple(mons[i] for i in piv), q)
        log_.warning("evaluation rank %d != %d at q=%d; retrying", len(piv), E, q)
    raise BasisRankError(f"evaluation rank never reached {E} for (a,b,m)=({a},{b},{m})")


@dataclass
class Bucket:
    key: FpPoint  # common reduction Q* of the Q's
    pairs: list[XRPair]
    unit_index: int  # coordinate of Q* that is a p-unit (moved to position 0)

    @property
    def size(self) -> int:
        return len(self.pairs)


def residue_buckets(pairs: Sequence[XRPair], p: int) -> dict[FpPoint, Bucket]:
    """S(Q'; p, B): pairs grouped by the reduction of Q, ordered by key."""
    out: dict[FpPoint, Bucket] = {}
    for pr in pairs:
        key = reduce_point(pr.Q, p)
        if key not in out:
            unit = next(i for i in range(3) if key.coords[i])
            out[key] = Bucket(key, [], unit)
        out[key].pairs.append(pr)
    return dict(sorted(out.items()))


def build_matrix(bucket: Bucket | Sequence[XRPair], basis: MonomialBasis) -> list[list[int]]:
    pairs = bucket.pairs if isinstance(bucket, Bucket) else bucket
    return [[mo.evaluate(pr.P.coords, pr.Q.coords) for mo in basis.elems] for pr in pairs]


def matrix_hash(rows: Sequence[Sequence[int]]) -> str:
    text = "\n".join(",".join(map(str, r)) for r in rows)
    return hashlib.sha256(text.encode()).hexdigest()


# p-adic implicit function

def _permutation(Qstar: FpPoint) -> list[int]:
    i0 = next(i for i in range(3) if Qstar.coords[i] % Qstar.p)
    return [i0] + [i for i in range(3) if i != i0]


def partials_unit(f, Qstar: FpPoint, p: int | None = None) -> int:
    """Index i in {1, 2} (in permuted coordinates) with dF/dy_i(Q*) a p-unit."""
    p = p or Qstar.p
    perm = _permutation(Qstar)
    g = f.grad_at(Qstar.coords)
    for i in (1, 2):
        if g[perm[i]] % p:
            return i
    raise ArithmeticError(f"all partials vanish at {Qstar}: {p} is not a good prime")


def _smul(a, b, n, mod):
    out = [0] * n
    for i, x in enumerate(a):
        if x:
            for j in range(n - i):
                out[i + j] = (out[i + j] + x * b[j]) % mod
    return out


def _sinv(a, n, mod):
    c = pow(a[0], -1, mod)
    out = [c] + [0] * (n - 1)
    for k in range(1, n):
        s = sum(a[i] * out[k - i] for i in range(1, k + 1))
        out[k] = (-c * s) % mod
    return out


def _seval(poly: polys.Poly, args, n, mod):
    total = [0] * n
    for e, c in poly.items():
        term = [c % mod] + [0] * (n - 1)
        for v, k in zip(args, e):
            for _ in range(k):
                term = _smul(term, v, n, mod)
        total = [(x + y) % mod for x, y in zip(total, term)]
    return total


def _defect_order(ser, p: int, n: int) -> int:
    """min_j v_p(d_j) + j, i.e. the p-adic order after t = p s (capped at n)."""
    best = n
    for j, d in enumerate(ser):
        if d % p**n:
            best = min(best, valuation(d % p**n, p) + j)
    return best


@dataclass
class HenselLift:
    p: int
    n: int
    perm: list[int]  # (y0, y1, y2) = (x[perm[0]], x[perm[1]], x[perm[2]])
    z2star: int
    series: list[int]  # z1 = sum series[k] (z2 - z2*)^k  mod p^n
    poly: list[int]  # f_n(z2) = sum poly[k] z2^k  mod p^n
    defects: list[int] = field(default_factory=list)  # defect order after each Newton step

    def affine(self, point: Sequence[int]) -> tuple[int, int]:
        """(z1, z2) of a point in the residue class, modulo p^n."""
        mod = self.p**self.n
        y = [point[i] for i in self.perm]
        inv = pow(y[0] % mod, -1, mod)
        return y[1] * inv % mod, y[2] * inv % mod

    def __call__(self, z2: int) -> int:
        mod = self.p**self.n
        return sum(c * pow(z2, k, mod) for k, c in enumerate(self.poly)) % mod

    def residual_valuation(self, point: Sequence[int]) -> int:
        z1, z2 = self.affine(point)
        d = (z1 - self(z2)) % self.p**self.n
        return self.n if d == 0 else valuation(d, self.p)


def hensel_implicit(f, Qstar: FpPoint, p: int, n: int) -> HenselLift:
    """f_n with z1 = f_n(z2) mod p^n on the residue class of Q*."""
    if n < 1:
        raise ValueError("n must be positive")
    perm = _permutation(Qstar)
    if partials_unit(f, Qstar, p) == 2:
        perm = [perm[0], perm[2], perm[1]]
    mod = p**n
    inv0 = pow(Qstar.coords[perm[0]], -1, p)
    z1s = Qstar.coords[perm[1]] * inv0 % p
    z2s = Qstar.coords[perm[2]] * inv0 % p
    # affine equation g(z1, z2) = F with y0 = 1, in permuted variables
    g: polys.Poly = {}
    for e, c in f.poly.items():
        ep = tuple(e[perm[i]] for i in range(3))
        g[ep] = c
    gz = polys.derivative(g, 1)
    one = [1] + [0] * (n - 1)
    t = [z2s, 1] + [0] * (n - 2) if n > 1 else [z2s]
    z = [z1s] + [0] * (n - 1)
    defects = []
    for _ in range(n.bit_length() + 1):
        val = _seval(g, (one, z, t), n, mod)
        der = _seval(gz, (one, z, t), n, mod)
        step = _smul(val, _sinv(der, n, mod), n, mod)
        z = [(x - y) % mod for x, y in zip(z, step)]
        defects.append(_defect_order(_seval(g, (one, z, t), n, mod), p, n))
    if defects[-1] < n:
        raise ArithmeticError("Newton iteration did not reach full precision")
    # expand sum c_k (z2 - z2*)^k
    poly = [0] * n
    for k, c in enumerate(z):
        for j in range(k + 1):
            poly[j] = (poly[j] + c * comb(k, j) * pow(-z2s, k - j, mod)) % mod
    return HenselLift(p, n, perm, z2s, z, poly, defects)


def minor_valuation(delta: Sequence[Sequence[int]], p: int) -> tuple[int, int | None]:
    """(det, v_p(det)); asserts the valuation bound for square bucket minors."""
    E = len(delta)
    det = bareiss_det(delta)
    v = valuation(det, p)
    if v is not None and v < E * (E - 1) // 2:
        raise AssertionError(f"v_{p}(det) = {v} < {E * (E - 1) // 2}")
    return det, v


def archimedean_bound(delta: Sequence[Sequence[int]], B: int, a: int, b: int, A: float) -> bool:
    """|det| <= E^E B^(E(a + A b))."""
    E = len(delta)
    det = bareiss_det(delta)
    if det == 0:
        return True
    return log(abs(det)) <= E * log(E) + E * (a + A * b) * log(B) + 1e-9


def prime_threshold(B: int, a: int, b: int, E: int, A: float, c0: float) -> float:
    return c0 * log(B) + 4 * B ** (2 * (a + A * b) / (E - 1))


def choose_prime(B: int, a: int, b: int, E: int, A: float, c0: float, f) -> int:
    """Smallest good prime in (P, 2P], P = c0 log B + 4 B^(2(a+Ab)/(E-1))."""
    if E < 3:
        raise ValueError("E must be at least 3")
    assert E * E < 4 ** (E - 1)  # E^(2/(E-1)) < 4
    P = prime_threshold(B, a, b, E, A, c0)
    bad = f if isinstance(f, (set, frozenset)) else _bad(f)
    for hi in (2 * P, 4 * P):
        p = nextprime(floor(P))
        while p <= hi:
            if p not in bad:
                if hi > 2 * P:
                    log_.warning("no good prime in (P, 2P]; used (P, 4P]")
                return p
            p = nextprime(p)
    raise ValueError(f"no good prime in ({P}, {4 * P}]")


def _bad(f):
    from .forms import bad_primes

    return bad_primes(f)


@dataclass
class AuxiliaryForm:
    coeffs: dict[BiMonomial, int]

    def __call__(self, x: Sequence, y: Sequence, mod: int | None = None):
        total = sum(c * mo.evaluate(x, y, mod) for mo, c in self.coeffs.items())
        return total % mod if mod else total

    def vector(self, basis: MonomialBasis) -> list[int]:
        return [self.coeffs.get(mo, 0) for mo in basis.elems]


def auxiliary_form(matrix: Sequence[Sequence[int]], basis: MonomialBasis) -> AuxiliaryForm:
    """First kernel vector of M (exact), as a form supported on the basis."""
    E = basis.E
    if not matrix:
        vec = [1] + [0] * (E - 1)
    else:
        ker = nullspace(matrix, E)
        if not ker:
            raise NoAuxiliaryFormError("matrix has full rank E: no auxiliary form (p too small?)")
        vec = ker[0]
    return AuxiliaryForm({mo: c for mo, c in zip(basis.elems, vec) if c})


def nonvanishing_on_xr(ctx: GroupContext, G: AuxiliaryForm, R: PlanePoint, m: int, q: int, samples: int = 50) -> bool:
    for P, Q in xr_samples_mod_q(ctx, R, m, q, samples):
        if G(P.coords, Q.coords, q):
            return True
    return False


@dataclass
class BucketReport:
    key: FpPoint
    size: int
    rank: int
    minor_det_valuation: str  # "zero", an integer, or "n/a" when size < E
    matrix_sha256: str
    form: list[int] | None
    ok: bool
    note: str = ""


@dataclass
class ClassBoundReport:
    curve: tuple[int, ...]
    R: PlanePoint
    m: int
    a: int
    b: int
    B: int
    A: float
    c0: float
    p: int
    E: int
    forced: bool
    class_size: int
    buckets: list[BucketReport]
    r: int

    @property
    def ok(self) -> bool:
        return all(bk.ok for bk in self.buckets) and self.class_size <= self.certified_bound

    @property
    def max_bucket(self) -> int:
        return max((bk.size for bk in self.buckets), default=0)

    @property
    def prime_bound(self) -> int:
        """p * 3(m^2 a + b)."""
        return self.p * self.E

    @property
    def certified_bound(self) -> int:
        """#C(F_p) * E, with #C(F_p) bounded by Hasse."""
        return (self.p + 1 + isqrt(4 * self.p)) * self.E

    @property
    def overall_bound(self) -> int:
        return self.m**self.r * self.prime_bound

    def certificate(self) -> str:
        lines = [
            "detmethod certificate",
            "curve: " + " ".join(map(str, self.curve)),
            f"R: {self.R}",
            f"m: {self.m}",
            f"a: {self.a}",
            f"b: {self.b}",
            f"B: {self.B}",
            f"A: {self.A:.6f}",
            f"c0: {self.c0:g}",
            f"p: {self.p}" + (" (forced)" if self.forced else ""),
            f"E: {self.E}",
            f"class size: {self.class_size}",
            f"buckets: {len(self.buckets)}",
        ]
        for bk in self.buckets:
            form = "none" if bk.form is None else " ".join(map(str, bk.form))
            lines.append(
                f"bucket {bk.key.coords}: size={bk.size} rank={bk.rank} "
                f"minor_v_p={bk.minor_det_valuation} sha256={bk.matrix_sha256} "
                f"form=[{form}] {'ok' if bk.ok else 'FAIL ' + bk.note}"
            )
        lines += [
            f"bound per class (p*E): {self.prime_bound}",
            f"certified bound per class (#C(F_p)*E): {self.certified_bound}",
            f"overall bound (m^r*p*E): {self.overall_bound}",
            f"status: {'PASS' if self.ok else 'FAIL'}",
        ]
        return "\n".join(lines) + "\n"


def process_bucket(bucket: Bucket, basis: MonomialBasis, p: int) -> BucketReport:
    M = build_matrix(bucket, basis)
    E = basis.E
    rank = rank_q(M)
    minor = "n/a"
    note = ""
    ok = True
    if bucket.size >= E:
        det, v = bareiss_det(M[:E]), None
        if det == 0:
            minor = "zero"
        else:
            v = valuation(det, p)
            minor = str(v)
            if v < E * (E - 1) // 2:
                ok, note = False, "valuation bound violated"
    form = None
    try:
        G = auxiliary_form(M, basis)
        if any(G(pr.P.coords, pr.Q.coords) for pr in bucket.pairs):
            ok, note = False, "auxiliary form does not vanish on the bucket"
        form = G.vector(basis)
    except NoAuxiliaryFormError:
        ok, note = False, "no auxiliary form (rank E)"
    if bucket.size > E:
        ok, note = False, note or f"bucket size {bucket.size} > {E}"
    return BucketReport(bucket.key, bucket.size, rank, minor, matrix_hash(M), form, ok, note)


def class_bound(
    ctx: GroupContext,
    K: DescentClass,
    R: PlanePoint,
    m: int,
    a: int,
    b: int,
    B: int,
    basis: MordellWeilBasis,
    A: float | None = None,
    c0: float = DEFAULT_C0,
    force_prime: int | None = None,
) -> ClassBoundReport:
    """Run the pipeline on one descent class and collect the certificate data."""
    E = dimension_formula(a, b, m)
    pairs = xr_pairs_for_class(K, R, m, basis, B)
    if A is None:
        A = SAFETY * max(1.0, crude_height_audit(ctx, [(x.P, x.Q, x.R) for x in pairs], B, m))
    mb = monomial_basis(ctx, R, m, a, b)
    if force_prime is not None:
        if not isprime(force_prime) or force_prime in ctx.bad_primes:
            raise BadPrimeError(f"{force_prime} is not a good prime")
        p = force_prime
    else:
        p = choose_prime(B, a, b, E, A, c0, ctx.bad_primes)
    buckets = residue_buckets(pairs, p)
    reports = [process_bucket(bk, mb, p) for bk in buckets.values()]
    return ClassBoundReport(
        ctx.curve.coeffs, R, m, a, b, B, A, c0, p, E, force_prime is not None, len(pairs), reports, basis.r
    )
