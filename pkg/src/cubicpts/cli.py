"""Command line front end: ``cubicpts <command> --curve FILE ...``.

Exit status: 0 when every asserted invariant held, 1 when one failed (the
failing certificate path is printed), 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from math import floor, log, sqrt
from pathlib import Path
from typing import Sequence

from . import descent, detmethod, heights, lattice
from .forms import CurveSpec, FormError, load_curve_spec
from .jacobian import GroupContext
from .points import count_table, enumerate_points, format_count_csv, parse_point, trenta_diagnostic


class ConfigError(ValueError):
    pass


class InvariantFailure(Exception):
    def __init__(self, message: str, path: Path | None = None):
        super().__init__(message)
        self.path = path


@dataclass
class RunConfig:
    command: str
    curve: Path
    basis: Path | None = None
    B: int = 100
    m: int = 1
    a: int | None = None
    b: int | None = None
    tol: float = heights.DEFAULT_TOL
    A: float | None = None
    c0: float = detmethod.DEFAULT_C0
    out: Path | None = None
    B_table: list[int] = field(default_factory=list)
    force_prime: int | None = None

    def validate(self) -> "RunConfig":
        if self.B < 3:
            raise ConfigError(f"B must be at least 3, got {self.B}")
        if any(B < 3 for B in self.B_table):
            raise ConfigError("every B in the table must be at least 3")
        if self.m < 1:
            raise ConfigError(f"m must be positive, got {self.m}")
        if self.a is not None and self.b is not None and not detmethod.admissible(self.a, self.b, self.m):
            raise ConfigError(f"(a, b, m) = ({self.a}, {self.b}, {self.m}) violates 1/a + m^2/b < 3")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        return self

    def default_ab(self, B: int | None = None) -> tuple[int, int]:
        """a = 1 + [log B], b = m^2 unless given explicitly."""
        B = B or self.B
        a = self.a if self.a is not None else 1 + floor(log(B))
        b = self.b if self.b is not None else self.m**2
        return a, b


def _context(spec: CurveSpec) -> GroupContext:
    return GroupContext(spec.form, spec.base)


def _basis(ctx: GroupContext, spec: CurveSpec, path: Path | None, tol: float) -> descent.MordellWeilBasis:
    path = path or spec.basis
    return descent.load_mw_basis(path, ctx, tol)


def theorem_envelope(B: int, m: int, r: int) -> float:
    return m ** (r + 2) * (log(B) ** 2 + B ** (2 / (3 * m * m)) * log(B))


def log_power_envelope(B: int, r: int) -> tuple[int, float]:
    return 1 + floor(sqrt(log(B))), log(B) ** (3 + r / 2)


@dataclass
class TheoremRow:
    B: int
    m: int
    r: int
    N: int
    a: int
    b: int
    p: int
    E: int
    max_bucket: int
    envelope: float
    cor_m: int
    cor_envelope: float
    ok: bool
    rank_note: str

    @property
    def ratio(self) -> float:
        return self.N / self.envelope

    @property
    def cor_ratio(self) -> float:
        return self.N / self.cor_envelope


THEOREM_HEADER = "B,m,r,N,a,b,p,E,max_bucket,envelope,ratio,optimal_m,log_power_envelope,log_power_ratio,status,rank"


def format_theorem_csv(rows: Sequence[TheoremRow]) -> str:
    lines = [THEOREM_HEADER]
    for t in rows:
        lines.append(
            f"{t.B},{t.m},{t.r},{t.N},{t.a},{t.b},{t.p},{t.E},{t.max_bucket},{t.envelope:.6f},"
            f"{t.ratio:.8f},{t.cor_m},{t.cor_envelope:.6f},{t.cor_ratio:.8f},"
            f"{'PASS' if t.ok else 'FAIL'},{t.rank_note}"
        )
    return "\n".join(lines) + "\n"


def run_classes(ctx, basis, pts, config: RunConfig, B: int, a: int, b: int) -> list[detmethod.ClassBoundReport]:
    inside = [P for P in pts if P.height <= B]
    reports = []
    for K in descent.partition(inside, config.m, basis):
        reports.append(
            detmethod.class_bound(
                ctx, K, K.representative, config.m, a, b, B, basis,
                A=config.A, c0=config.c0, force_prime=config.force_prime,
            )
        )
    return reports


def write_certificates(reports, out: Path | None, stem: str) -> Path | None:
    """Write certificates; returns the path of the first failing one."""
    failing = None
    for i, rep in enumerate(reports):
        text = rep.certificate()
        path = None
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"{stem}-class{i}.cert"
            path.write_text(text, encoding="utf-8")
        if not rep.ok and failing is None:
            failing = path or Path(f"<{stem}-class{i}>")
    return failing


def theorem_one_report(config: RunConfig) -> list[TheoremRow]:
    spec = load_curve_spec(config.curve)
    ctx = _context(spec)
    basis = _basis(ctx, spec, config.basis, config.tol)
    Bs = config.B_table or [config.B]
    pts = enumerate_points(spec.form, max(Bs))
    rows = []
    for B in sorted(Bs):
        a, b = config.default_ab(B)
        reports = run_classes(ctx, basis, pts, config, B, a, b)
        failing = write_certificates(reports, config.out, f"{spec.name}-B{B}-m{config.m}")
        rep0 = reports[0]
        cm, cenv = log_power_envelope(B, basis.r)
        rows.append(
            TheoremRow(
                B, config.m, basis.r, sum(1 for P in pts if P.height <= B), a, b, rep0.p, rep0.E,
                max(rp.max_bucket for rp in reports), theorem_envelope(B, config.m, basis.r),
                cm, cenv, failing is None, basis.rank_note,
            )
        )
        if failing is not None:
            raise InvariantFailure(format_theorem_csv(rows), failing)
    return rows


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubicpts", description="Rational points on plane cubic curves.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, basis=True):
        p.add_argument("--curve", type=Path, required=True, help="curve spec file")
        if basis:
            p.add_argument("--basis", type=Path, help="Mordell-Weil basis file (gen/tor lines)")
        p.add_argument("--out", type=Path, help="directory for CSVs and certificates")

    p = sub.add_parser("points", help="enumerate points and count N(B)")
    common(p, basis=False)
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--table", type=_ints, help="comma separated list of B values")
    p.add_argument("--diagnostic", action="store_true", help="also report the N(B) >= 10 coefficient ratio")

    p = sub.add_parser("heights", help="naive, x and canonical heights of a point")
    common(p, basis=False)
    p.add_argument("--point", required=True)
    p.add_argument("--tol", type=float, default=heights.DEFAULT_TOL)

    p = sub.add_parser("descent", help="partition points into m-descent classes")
    common(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--B", type=int, required=True)

    for name, helptext in (("detmethod", "determinant method certificates"), ("theorem", "bound report")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--m", type=int, default=1)
        p.add_argument("--a", type=int)
        p.add_argument("--b", type=int)
        p.add_argument("--B", type=int, required=name == "detmethod")
        p.add_argument("--B-table", dest="B_table", type=_ints)
        p.add_argument("--A", type=float)
        p.add_argument("--c0", type=float, default=detmethod.DEFAULT_C0)
        p.add_argument("--tol", type=float, default=heights.DEFAULT_TOL)
        p.add_argument("--force-prime", dest="force_prime", type=int, help="debug: use this prime")

    p = sub.add_parser("lattice", help="growth report against the height ellipsoid")
    common(p)
    p.add_argument("--B-table", dest="B_table", type=_ints, required=True)
    p.add_argument("--c-cal", dest="c_cal", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=heights.DEFAULT_TOL)
    return ap


def _emit(text: str, out: Path | None, name: str) -> None:
    sys.stdout.write(text)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text, encoding="utf-8")


def dispatch(args: argparse.Namespace) -> int:
    spec = load_curve_spec(args.curve)
    cmd = args.command
    if cmd == "points":
        if args.B < 1:
            raise ConfigError("B must be positive")
        Bs = sorted(set((args.table or []) + [args.B]))
        text = format_count_csv(count_table(spec.form, Bs))
        if args.diagnostic:
            if args.B < 3:
                raise ConfigError("the diagnostic needs B >= 3")
            text += trenta_diagnostic(spec.form, args.B).as_csv()
        _emit(text, args.out, f"{spec.name}-points.csv")
        return 0

    ctx = _context(spec)
    if cmd == "heights":
        P = parse_point(args.point)
        if not ctx.on_curve(P):
            raise ConfigError(f"{P} is not on the curve")
        _emit(heights.height_report(ctx, P, args.tol).as_csv(), args.out, f"{spec.name}-heights.csv")
        return 0

    basis = _basis(ctx, spec, args.basis, getattr(args, "tol", heights.DEFAULT_TOL))
    if cmd == "descent":
        RunConfig(cmd, args.curve, m=args.m, B=max(args.B, 3)).validate()
        pts = enumerate_points(spec.form, args.B)
        classes = descent.partition(pts, args.m, basis)
        text = descent.format_classes_csv(classes)
        if not basis.verified:
            text += f"# {basis.rank_note}: r = {basis.r} is a lower bound\n"
        _emit(text, args.out, f"{spec.name}-descent-m{args.m}.csv")
        return 0

    if cmd == "lattice":
        pts = enumerate_points(spec.form, max(args.B_table))
        rows = lattice.growth_report(basis, pts, args.B_table, args.c_cal)
        text = lattice.format_growth_csv(rows)
        form = lattice.HeightForm.from_basis(basis)
        mins = lattice.successive_minima(form)
        if basis.r:
            text += lattice.david_report(mins.minima, ctx.weierstrass.model.discriminant)
        _emit(text, args.out, f"{spec.name}-lattice.csv")
        return 0

    config = RunConfig(
        cmd, args.curve, args.basis, args.B or (max(args.B_table) if args.B_table else 100), args.m,
        args.a, args.b, args.tol, args.A, args.c0, args.out, args.B_table or [], args.force_prime,
    ).validate()
    if cmd == "detmethod":
        if config.a is None or config.b is None:
            config.a, config.b = config.default_ab()
        detmethod.dimension_formula(config.a, config.b, config.m)
        pts = enumerate_points(spec.form, config.B)
        reports = run_classes(ctx, basis, pts, config, config.B, config.a, config.b)
        text = "".join(r.certificate() for r in reports)
        _emit(text, config.out, f"{spec.name}-detmethod.txt")
        failing = write_certificates(reports, config.out, f"{spec.name}-B{config.B}-m{config.m}")
        if failing is not None:
            raise InvariantFailure("a detmethod certificate failed", failing)
        return 0
    rows = theorem_one_report(config)
    _emit(format_theorem_csv(rows), config.out, f"{spec.name}-theorem.csv")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return dispatch(args)
    except InvariantFailure as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        if exc.path is not None:
            print(f"failing certificate: {exc.path}", file=sys.stderr)
        return 1
    except (AssertionError, ArithmeticError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, FormError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
