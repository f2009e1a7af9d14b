"""Mordell-Weil coordinates, the m-descent partition and the curves X_R.

Points are decomposed as D = sum n_i g_i + t over a basis of generators g_i
and an explicit torsion list.  The real solve against the height Gram matrix
only proposes the integers n_i; every decomposition is then checked exactly
in the plane group law, so rounding never decides an answer on its own.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sympy import factorint

from .heights import DEFAULT_TOL, canonical_height, gram, height_pairing
from .jacobian import GroupContext, NotOnCurveError
from .points import PlanePoint, enumerate_points

ROUNDING = 0.25
MAX_TORSION = 16


class BasisError(ValueError):
    pass


class NotInSpanError(ArithmeticError):
    """A point is not an integral combination of the basis plus torsion."""


@dataclass
class MordellWeilBasis:
    ctx: GroupContext
    generators: list[PlanePoint]
    torsion: list[PlanePoint]
    gram: np.ndarray
    tol: float = DEFAULT_TOL
    verified: bool = True  # False when the rank is only a search lower bound
    _coords: dict = field(default_factory=dict, repr=False)

    @property
    def r(self) -> int:
        return len(self.generators)

    @property
    def rank_note(self) -> str:
        return "verified rank" if self.verified else "unverified rank"

    @property
    def regulator(self) -> float:
        return float(np.linalg.det(self.gram)) if self.r else 1.0

    def torsion_index(self, t: PlanePoint) -> int:
        return self.torsion.index(t)

    def torsion_multiples(self, m: int) -> list[PlanePoint]:
        """The subgroup mT, in torsion-list order."""
        image = {self.ctx.smul(m, t) for t in self.torsion}
        return [t for t in self.torsion if t in image]

    def coset_id(self, t: PlanePoint, m: int) -> int:
        """Least torsion index in the coset t + mT."""
        return min(self.torsion_index(self.ctx.add(t, s)) for s in self.torsion_multiples(m))

    def combine(self, n: Sequence[int], t: PlanePoint | None = None) -> PlanePoint:
        ctx = self.ctx
        out = ctx.zero if t is None else t
        for k, g in zip(n, self.generators):
            if k:
                out = ctx.add(out, ctx.smul(k, g))
        return out


def _triples(text: str) -> list[int]:
    return [int(s) for s in re.findall(r"-?\d+", text)]


def parse_basis(text: str) -> tuple[list[PlanePoint], list[PlanePoint]]:
    gens, tors = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        vals = _triples(rest)
        if kind not in ("gen", "tor") or len(vals) != 3:
            raise BasisError(f"line {lineno}: expected 'gen|tor x0 x1 x2', got {raw!r}")
        (gens if kind == "gen" else tors).append(PlanePoint.normalized(*vals))
    return gens, tors


def format_basis(basis: MordellWeilBasis) -> str:
    lines = [f"gen {g.x0} {g.x1} {g.x2}" for g in basis.generators]
    lines += [f"tor {t.x0} {t.x1} {t.x2}" for t in basis.torsion]
    return "\n".join(lines) + "\n"


def close_torsion(ctx: GroupContext, tors: Iterable[PlanePoint]) -> list[PlanePoint]:
    """Subgroup generated by ``tors``; identity first, then sorted."""
    group = {ctx.zero}
    frontier = list(tors)
    while frontier:
        t = frontier.pop()
        if t in group:
            continue
        if ctx.torsion_order(t) is None:
            raise BasisError(f"{t} is not a torsion point")
        new = {ctx.add(t, s) for s in group} | {t}
        frontier.extend(new - group)
        group |= new
        if len(group) > MAX_TORSION:
            raise BasisError("torsion subgroup larger than 16")
    return [ctx.zero] + sorted(group - {ctx.zero})


def validate_basis(ctx: GroupContext, gens, tors, tol: float = DEFAULT_TOL, verified: bool = True) -> MordellWeilBasis:
    for P in list(gens) + list(tors):
        if not ctx.on_curve(P):
            raise NotOnCurveError(f"{P} is not on the curve")
    torsion = list(tors)
    if ctx.zero not in torsion:
        torsion = [ctx.zero] + torsion
    closed = close_torsion(ctx, torsion)
    if set(closed) != set(torsion):
        raise BasisError("torsion list is not closed under the group law")
    for t in torsion:
        if ctx.neg(t) not in closed:
            raise BasisError("torsion list is not closed under negation")
    for g in gens:
        if canonical_height(ctx, g, tol) <= tol:
            raise BasisError(f"generator {g} is torsion")
    G = gram(ctx, gens, tol)
    r = len(gens)
    # relative test: pairing errors of size tol swamp any absolute threshold
    if r and not np.linalg.det(G) > 10 * tol * np.prod(np.diag(G)):
        raise BasisError("generators are dependent (singular Gram matrix)")
    return MordellWeilBasis(ctx, list(gens), closed, G, tol, verified)


def load_mw_basis(path: str | Path | None, ctx: GroupContext, tol: float = DEFAULT_TOL, search_bound: int = 100) -> MordellWeilBasis:
    if path is None:
        return search_basis(ctx, search_bound, tol)
    gens, tors = parse_basis(Path(path).read_text(encoding="utf-8"))
    return validate_basis(ctx, gens, tors, tol)


def _solve(basis: MordellWeilBasis, D: PlanePoint) -> np.ndarray:
    ctx = basis.ctx
    v = np.array([height_pairing(ctx, D, g, basis.tol) for g in basis.generators])
    return np.linalg.solve(basis.gram, v)


def coordinates(D: PlanePoint, basis: MordellWeilBasis) -> tuple[tuple[int, ...], PlanePoint]:
    """Exact decomposition D = sum n_i g_i + t with t in the torsion list."""
    if D in basis._coords:
        return basis._coords[D]
    ctx = basis.ctx
    if not ctx.on_curve(D):
        raise NotOnCurveError(f"{D} is not on the curve")
    if basis.r == 0 or D in basis.torsion:
        n = (0,) * basis.r
    else:
        x = _solve(basis, D)
        n = tuple(int(round(c)) for c in x)
        if any(abs(c - k) >= ROUNDING for c, k in zip(x, n)):
            raise NotInSpanError(f"{D} has non-integral coordinates {list(x)}")
    t = ctx.sub(D, basis.combine(n))
    if t not in basis.torsion:
        raise NotInSpanError(f"{D} - {n} is not in the torsion list")
    basis._coords[D] = (n, t)
    return n, t


def equivalent_m(P: PlanePoint, Q: PlanePoint, m: int, basis: MordellWeilBasis) -> bool:
    """P ~_m Q, i.e. psi(P, Q) lies in m J(Q)."""
    if m < 1:
        raise ValueError("m must be positive")
    n, t = coordinates(basis.ctx.psi(P, Q), basis)
    return all(k % m == 0 for k in n) and t in basis.torsion_multiples(m)


@dataclass
class DescentClass:
    label: tuple[tuple[int, ...], int]
    representative: PlanePoint
    members: list[PlanePoint]

    @property
    def size(self) -> int:
        return len(self.members)

    def label_text(self) -> str:
        n, coset = self.label
        return "(" + ",".join(map(str, n)) + f")|t{coset}"


def class_key(P: PlanePoint, m: int, basis: MordellWeilBasis):
    n, t = coordinates(P, basis)
    return tuple(k % m for k in n), basis.coset_id(t, m)


def class_bound(basis: MordellWeilBasis, m: int) -> int:
    """m^r #(T/mT), never more than 16 m^r."""
    return m**basis.r * len(basis.torsion) // len(basis.torsion_multiples(m))


def partition(points: Sequence[PlanePoint], m: int, basis: MordellWeilBasis, verify: int = 200) -> list[DescentClass]:
    """Classes of ~_m among ``points``, ordered by representative.

    ``verify`` pairs (deterministically chosen) are re-checked against
    equivalent_m, and the equivalence axioms are asserted on them.
    """
    if m < 1:
        raise ValueError("m must be positive")
    groups: dict = {}
    keys = {}
    for P in points:
        k = class_key(P, m, basis)
        keys[P] = k
        groups.setdefault(k, []).append(P)
    pts = sorted(set(points))
    step = max(1, len(pts) * len(pts) // max(verify, 1))
    checked = 0
    for idx in range(0, len(pts) * len(pts), step):
        P, Q = pts[idx // len(pts)], pts[idx % len(pts)]
        same = equivalent_m(P, Q, m, basis)
        assert same == (keys[P] == keys[Q]), f"class key disagrees with ~_{m} on {P}, {Q}"
        assert same == equivalent_m(Q, P, m, basis), "~_m is not symmetric"
        checked += 1
        if checked >= verify:
            break
    classes = []
    for k, members in groups.items():
        members = sorted(set(members))
        classes.append(DescentClass(k, members[0], members))
    classes.sort(key=lambda c: c.representative)
    assert len(classes) <= class_bound(basis, m) <= 16 * m**basis.r
    return classes


def format_classes_csv(classes: Sequence[DescentClass]) -> str:
    lines = ["label,size,representative"]
    for c in classes:
        lines.append(f"{c.label_text()},{c.size},\"{c.representative}\"")
    return "\n".join(lines) + "\n"


def divide_by_m(D: PlanePoint, m: int, basis: MordellWeilBasis) -> PlanePoint | None:
    """Some Q with mQ = D, or None; the torsion part is the least-index choice."""
    n, t = coordinates(D, basis)
    if any(k % m for k in n):
        return None
    ctx = basis.ctx
    root = next((s for s in basis.torsion if ctx.smul(m, s) == t), None)
    if root is None:
        return None
    Q = basis.combine([k // m for k in n], root)
    assert ctx.smul(m, Q) == D, "division by m failed exact verification"
    return Q


@dataclass(frozen=True)
class XRPair:
    P: PlanePoint
    Q: PlanePoint
    R: PlanePoint
    m: int

    def holds(self, ctx: GroupContext) -> bool:
        return ctx.sub(ctx.smul(self.m, self.Q), ctx.smul(self.m - 1, self.R)) == self.P


def xr_pairs_for_class(K: DescentClass, R: PlanePoint, m: int, basis: MordellWeilBasis, B: int) -> list[XRPair]:
    ctx = basis.ctx
    if R not in K.members:
        raise ValueError(f"{R} is not in the class")
    out = []
    for P in K.members:
        if P.height > B:
            raise ValueError(f"{P} has height above {B}")
        Qd = divide_by_m(ctx.psi(P, R), m, basis)
        if Qd is None:
            raise NotInSpanError(f"psi({P}, {R}) is not divisible by {m}; basis incomplete?")
        pair = XRPair(P, ctx.add(R, Qd), R, m)
        assert pair.holds(ctx)
        out.append(pair)
    return out


# bounded search fallback

def _fractional_relation(basis: MordellWeilBasis, P: PlanePoint, max_den: int = 12):
    """(d, c) with d P = sum c_i g_i + torsion exactly, d > 1 minimal; else None."""
    x = _solve(basis, P)
    fr = [Fraction(float(c)).limit_denominator(max_den) for c in x]
    d = 1
    for f in fr:
        d = d * f.denominator // gcd(d, f.denominator)
    if d == 1:
        return None
    c = [int(f * d) for f in fr]
    if any(abs(float(f) - v) > 1e-4 for f, v in zip(fr, x)):
        return None
    ctx = basis.ctx
    if ctx.sub(ctx.smul(d, P), basis.combine(c)) not in basis.torsion:
        return None
    return d, c


def _saturate_once(basis: MordellWeilBasis, P: PlanePoint) -> list[PlanePoint] | None:
    """A basis of strictly larger index containing P's lattice, or None."""
    rel = _fractional_relation(basis, P)
    if rel is None:
        return None
    d, c = rel
    p = min(factorint(d))
    ctx = basis.ctx
    # (d/p) P has rational coordinates c/p; some c_i is prime to p
    P1 = ctx.smul(d // p, P)
    i = next((j for j, k in enumerate(c) if k % p), None)
    if i is None:
        return None
    u = pow(c[i] % p, -1, p)
    P2 = ctx.smul(u, P1)
    # P2 has coordinates u c / p; subtracting the integral part leaves 1/p at i
    shift = [(u * k) // p for k in c]
    new = ctx.sub(P2, basis.combine(shift))
    gens = list(basis.generators)
    gens[i] = new
    return gens


def search_basis(ctx: GroupContext, bound: int = 100, tol: float = DEFAULT_TOL) -> MordellWeilBasis:
    """Lower-bound basis from points of height <= bound (flagged unverified)."""
    pts = enumerate_points(ctx.curve, bound)
    tors = [P for P in pts if ctx.torsion_order(P) is not None]
    torsion = close_torsion(ctx, tors)
    free = sorted((P for P in pts if P not in set(torsion)), key=lambda P: (canonical_height(ctx, P, tol), P))
    gens: list[PlanePoint] = []
    for P in free:
        trial = gens + [P]
        G = gram(ctx, trial, tol)
        if np.linalg.det(G) > max(tol, 1e-6) * np.prod(np.diag(G)):
            gens = trial
    basis = validate_basis(ctx, gens, torsion, tol, verified=False)
    changed = True
    while changed:
        changed = False
        for P in free:
            try:
                coordinates(P, basis)
                continue
            except NotInSpanError:
                pass
            new = _saturate_once(basis, P)
            if new is not None:
                basis = validate_basis(ctx, new, torsion, tol, verified=False)
                changed = True
                break
    return basis
