"""Ternary cubic forms: parsing, normalization, discriminant and bad primes."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import gcd
from pathlib import Path
from typing import Iterable, Sequence

from sympy import factorint

from . import polys
from .linalg import bareiss_det, lagrange_at_zero

# x0^3, x0^2x1, x0^2x2, x0x1^2, x0x1x2, x0x2^2, x1^3, x1^2x2, x1x2^2, x2^3
CUBIC_MONOMIALS: tuple[tuple[int, int, int], ...] = polys.monomials(3)
VARIABLES = ("x0", "x1", "x2")


class FormError(ValueError):
    pass


class FormSyntaxError(FormError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class DegreeError(FormError):
    pass


class ZeroFormError(FormError):
    pass


class SingularCurveError(FormError):
    pass


@dataclass(frozen=True)
class CubicForm:
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != 10:
            raise FormError("a ternary cubic has exactly 10 coefficients")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @classmethod
    def from_poly(cls, poly: polys.Poly) -> "CubicForm":
        return cls(tuple(poly.get(e, 0) for e in CUBIC_MONOMIALS))

    @property
    def poly(self) -> polys.Poly:
        return {e: c for e, c in zip(CUBIC_MONOMIALS, self.coeffs) if c}

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = gcd(g, c)
        return g

    @cached_property
    def gradient(self) -> tuple[polys.Poly, polys.Poly, polys.Poly]:
        f = self.poly
        return tuple(polys.derivative(f, i) for i in range(3))

    def __call__(self, x0, x1, x2):
        c = self.coeffs
        return (
            c[0] * x0 * x0 * x0 + c[1] * x0 * x0 * x1 + c[2] * x0 * x0 * x2
            + c[3] * x0 * x1 * x1 + c[4] * x0 * x1 * x2 + c[5] * x0 * x2 * x2
            + c[6] * x1 * x1 * x1 + c[7] * x1 * x1 * x2 + c[8] * x1 * x2 * x2
            + c[9] * x2 * x2 * x2
        )

    def grad_at(self, point: Sequence[int]) -> tuple[int, int, int]:
        """(dF/dx0, dF/dx1, dF/dx2) at an integer triple."""
        x0, x1, x2 = point
        c = self.coeffs
        return (
            3 * c[0] * x0 * x0 + 2 * c[1] * x0 * x1 + 2 * c[2] * x0 * x2
            + c[3] * x1 * x1 + c[4] * x1 * x2 + c[5] * x2 * x2,
            c[1] * x0 * x0 + 2 * c[3] * x0 * x1 + c[4] * x0 * x2
            + 3 * c[6] * x1 * x1 + 2 * c[7] * x1 * x2 + c[8] * x2 * x2,
            c[2] * x0 * x0 + c[4] * x0 * x1 + 2 * c[5] * x0 * x2
            + c[7] * x1 * x1 + 2 * c[8] * x1 * x2 + 3 * c[9] * x2 * x2,
        )

    @cached_property
    def disc(self) -> int:
        """Macaulay resultant of the three partial derivatives."""
        return macaulay_resultant(self.gradient)

    @property
    def is_smooth(self) -> bool:
        return self.disc != 0

    def scaled(self, c: int) -> "CubicForm":
        return CubicForm(tuple(c * a for a in self.coeffs))

    def substitute(self, matrix: Sequence[Sequence[int]]) -> "CubicForm":
        """The form F(M x), i.e. pull back along the linear map x -> M x."""
        rows = [polys.linear(r) for r in matrix]
        out: polys.Poly = {}
        for e, c in self.poly.items():
            term: polys.Poly = {(0, 0, 0): c}
            for i, k in enumerate(e):
                for _ in range(k):
                    term = polys.mul(term, rows[i])
            out = polys.add(out, term)
        return CubicForm.from_poly(out)

    def __str__(self) -> str:
        return format_form(self)


def format_form(f: CubicForm, names: Sequence[str] = VARIABLES) -> str:
    parts = []
    for e, c in zip(CUBIC_MONOMIALS, f.coeffs):
        if not c:
            continue
        factors = []
        for name, k in zip(names, e):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        mono = "*".join(factors)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = mono if mag == 1 else f"{mag}*{mono}"
        parts.append((sign, body))
    if not parts:
        return "0"
    head_sign, head = parts[0]
    text = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


# --- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise FormSyntaxError(f"unexpected character {text[bad]!r}", bad)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("int", m.group(1), start))
        elif m.group(2):
            tokens.append(("var", m.group(2), start))
        else:
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: Sequence[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = list(names)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> polys.Poly:
        value = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise FormSyntaxError(f"unexpected token {text!r}", pos)
        return value

    def expr(self) -> polys.Poly:
        value = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            _, op, _ = self.take()
            rhs = self.term()
            value = polys.add(value, rhs, 1 if op == "+" else -1)
        return value

    def term(self) -> polys.Poly:
        value = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == "*":
                self.take()
            elif not (kind in ("int", "var") or (kind == "op" and text == "(")):
                break
            value = polys.mul(value, self.unary())
        return value

    def unary(self) -> polys.Poly:
        kind, text, _ = self.peek()
        if kind == "op" and text in "+-":
            self.take()
            inner = self.unary()
            return inner if text == "+" else {e: -c for e, c in inner.items()}
        return self.power()

    def power(self) -> polys.Poly:
        base = self.atom()
        kind, text, pos = self.peek()
        if kind == "op" and text in ("^", "**"):
            self.take()
            kind, exp_text, pos = self.take()
            if kind != "int":
                raise FormSyntaxError("exponent must be a nonnegative integer", pos)
            base = polys.power(base, int(exp_text), len(self.names))
        return base

    def atom(self) -> polys.Poly:
        kind, text, pos = self.take()
        n = len(self.names)
        if kind == "int":
            return {(0,) * n: int(text)} if int(text) else {}
        if kind == "var":
            if text not in self.names:
                raise FormSyntaxError(f"unknown variable {text!r}", pos)
            k = self.names.index(text)
            return {tuple(int(j == k) for j in range(n)): 1}
        if kind == "op" and text == "(":
            value = self.expr()
            kind, text, pos = self.take()
            if (kind, text) != ("op", ")"):
                raise FormSyntaxError("expected ')'", pos)
            return value
        raise FormSyntaxError(f"unexpected token {text!r}" if text else "unexpected end of input", pos)


def parse_form(text: str, variables: Sequence[str] = VARIABLES) -> CubicForm:
    """Parse an integer ternary cubic written as a polynomial expression."""
    if len(variables) != 3:
        raise FormError("exactly three variables are required")
    poly = _Parser(text, variables).parse()
    if not poly:
        raise ZeroFormError("the zero form does not define a curve")
    bad = sorted({sum(e) for e in poly if sum(e) != 3})
    if bad:
        raise DegreeError(f"every term must have total degree 3, found degree(s) {bad}")
    return CubicForm.from_poly(poly)


# --- normalization -----------------------------------------------------------

def content_normalize(f: CubicForm) -> CubicForm:
    """Divide out the content and make the first nonzero coefficient positive."""
    if f.is_zero:
        raise ZeroFormError("the zero form cannot be normalized")
    g = f.content
    lead = next(c for c in f.coeffs if c)
    if lead < 0:
        g = -g
    return CubicForm(tuple(c // g for c in f.coeffs))


def coeff_height(f: CubicForm) -> int:
    if f.is_zero:
        raise ZeroFormError("the zero form has no height")
    return max(abs(c) for c in f.coeffs)


# --- Macaulay resultant of three ternary quadrics ----------------------------

def _macaulay_rows(quads: Sequence[polys.Poly], shift: int):
    mons = polys.monomials(4)
    index = {e: i for i, e in enumerate(mons)}
    rows = []
    for e in mons:
        i = next(k for k in range(3) if e[k] >= 2)
        cof = list(e)
        cof[i] -= 2
        q = dict(quads[i])
        sq = tuple(2 if j == i else 0 for j in range(3))
        q[sq] = q.get(sq, 0) + shift
        row = [0] * len(mons)
        for qe, c in q.items():
            row[index[tuple(a + b for a, b in zip(qe, cof))]] += c
        rows.append(row)
    extraneous = [i for i, e in enumerate(mons) if sum(1 for k in e if k >= 2) > 1]
    return rows, extraneous


def macaulay_resultant(quads: Sequence[polys.Poly]) -> int:
    """Resultant of three ternary quadratic forms, normalized by Res(x0^2, x1^2, x2^2) = 1.

    Macaulay's quotient det(M) / det(A) can be 0/0 for special inputs, so the
    system is perturbed to q_i + t*x_i^2; Res(t) is a polynomial of degree at
    most 12 in t, recovered at t = 0 by interpolation from nonsingular shifts.
    """
    xs, ys = [], []
    t = 1
    while len(xs) < 13:
        rows, extra = _macaulay_rows(quads, t)
        den = bareiss_det([[rows[i][j] for j in extra] for i in extra])
        if den != 0:
            xs.append(t)
            ys.append(Fraction(bareiss_det(rows), den))
        t += 1
    value = lagrange_at_zero(xs, ys)
    if value.denominator != 1:
        raise ArithmeticError("Macaulay resultant interpolation is not integral")
    return int(value)


# --- smoothness and reduction ------------------------------------------------

@dataclass(frozen=True)
class SmoothnessCertificate:
    smooth: bool
    disc: int
    witness: tuple[int, int, int] | None = None
    witness_prime: int | None = None  # None: witness is a rational point

    def __bool__(self) -> bool:
        return self.smooth


def _normalize_triple(v: Sequence[int]) -> tuple[int, int, int]:
    g = gcd(gcd(v[0], v[1]), v[2])
    v = [x // g for x in v]
    if next(x for x in v if x) < 0:
        v = [-x for x in v]
    return tuple(v)


def singular_points_mod_p(f: CubicForm, p: int) -> list[tuple[int, int, int]]:
    """All points of P^2(F_p) where the three partials vanish (exhaustive)."""
    out = []
    for pt in projective_points(p):
        if all(g % p == 0 for g in f.grad_at(pt)) and f(*pt) % p == 0:
            out.append(pt)
    return out


def projective_points(p: int) -> Iterable[tuple[int, int, int]]:
    yield (0, 0, 1)
    for b in range(p):
        yield (0, 1, b)
    for a, b in product(range(p), repeat=2):
        yield (1, a, b)


def smoothness_certificate(f: CubicForm, search_height: int = 12) -> SmoothnessCertificate:
    """Smooth iff the discriminant is nonzero; otherwise locate a singular point.

    A rational singular point is searched in a small box first; failing that
    the witness is a singular point of the reduction modulo a small prime.
    """
    d = f.disc
    if d != 0:
        return SmoothnessCertificate(True, d)
    rng = range(-search_height, search_height + 1)
    for pt in product(rng, repeat=3):
        if pt == (0, 0, 0) or next(x for x in pt if x) < 0:
            continue
        if gcd(gcd(pt[0], pt[1]), pt[2]) != 1:
            continue
        if f.grad_at(pt) == (0, 0, 0) and f(*pt) == 0:
            return SmoothnessCertificate(False, d, pt)
    for p in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        pts = singular_points_mod_p(f, p)
        if pts:
            return SmoothnessCertificate(False, d, pts[0], p)
    return SmoothnessCertificate(False, d)


def prime_factors(n: int) -> set[int]:
    if n == 0:
        raise ValueError("zero has no finite factorization")
    return set(factorint(abs(n)))


def bad_primes(f: CubicForm) -> set[int]:
    """Primes dividing 6 * D_F; every other prime is one of good reduction."""
    d = f.disc
    if d == 0:
        raise SingularCurveError("bad_primes needs a smooth cubic")
    return prime_factors(6 * d)


def require_smooth(f: CubicForm) -> None:
    if f.is_zero:
        raise ZeroFormError("the zero form does not define a curve")
    if f.disc == 0:
        raise SingularCurveError(f"the cubic {f} is singular")


# --- curve-spec files --------------------------------------------------------

@dataclass
class CurveSpec:
    name: str
    form: CubicForm
    base: tuple[int, int, int] | None = None
    basis: Path | None = None
    source: Path | None = field(default=None, compare=False)


def _ints(text: str) -> list[int]:
    return [int(t) for t in re.split(r"[\s,\[\]]+", text.strip()) if t]


def parse_curve_spec(text: str, source: Path | None = None) -> CurveSpec:
    """Read a curve record of ``key: value`` lines (name, coeffs|form, base, basis)."""
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            key, sep, value = line.partition("=")
        if not sep:
            raise FormError(f"line {lineno}: expected 'key: value'")
        fields[key.strip().lower()] = value.strip()
    if "coeffs" in fields:
        coeffs = _ints(fields["coeffs"])
        if len(coeffs) != 10:
            raise FormError(f"coeffs must list 10 integers, got {len(coeffs)}")
        form = CubicForm(tuple(coeffs))
    elif "form" in fields:
        form = parse_form(fields["form"])
    else:
        raise FormError("curve record needs a 'coeffs' or 'form' field")
    base = None
    if "base" in fields:
        b = _ints(fields["base"])
        if len(b) != 3:
            raise FormError("base point must have 3 coordinates")
        base = tuple(b)
    basis = None
    if fields.get("basis"):
        basis = Path(fields["basis"])
        if source is not None and not basis.is_absolute():
            basis = source.parent / basis
    name = fields.get("name") or (source.stem if source else "curve")
    return CurveSpec(name, form, base, basis, source)


def load_curve_spec(path: str | Path) -> CurveSpec:
    path = Path(path)
    return parse_curve_spec(path.read_text(encoding="utf-8"), path)


def format_curve_spec(spec: CurveSpec) -> str:
    lines = [f"name: {spec.name}", "coeffs: " + " ".join(map(str, spec.form.coeffs))]
    if spec.base is not None:
        lines.append("base: " + " ".join(map(str, spec.base)))
    if spec.basis is not None:
        lines.append(f"basis: {spec.basis}")
    return "\n".join(lines) + "\n"
