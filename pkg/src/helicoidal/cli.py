"""Command-line front end: solve, scan, mesh, verify.

Exit codes: 0 ok, 2 solver non-convergence, 3 failed check, 64 usage error.
Option precedence is flags > config file > built-in defaults; the config
file is a flat ``key = value`` document whose keys are the long option names
with ``-`` replaced by ``_``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import builder, period_solver as ps, verify
from .quadrature import QuadratureError

EXIT_OK, EXIT_NOCONV, EXIT_CHECK, EXIT_USAGE = 0, 2, 3, 64
FIT_TOL = 1e-5


class UsageError(Exception):
    pass


# --- solution records ------------------------------------------------------------


@dataclass
class SolutionRecord:
    beta: float
    a: float
    rho: float
    b: float
    a3: float
    lam: float
    c1: float
    c2: float
    a1: float
    a2: float
    R: float
    t_period: float
    residual_h: float
    residual_d: float
    residual_F: float
    residual_a3_cross: float
    root_count: int

    @classmethod
    def from_solved(cls, s) -> "SolutionRecord":
        k = s.consts
        return cls(s.params.beta, s.params.a, s.params.rho, s.b, s.a3, s.params.lam,
                   k.c1, k.c2, k.a1, k.a2, s.R, s.t_period, s.residual_h, s.residual_d,
                   s.residual_F, s.residual_a3_cross, s.root_count)

    def dumps(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            key = "lambda" if f.name == "lam" else f.name
            out.append(f"{key} = {v:d}" if isinstance(v, int) else f"{key} = {v:.17g}")
        return "\n".join(out) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SolutionRecord":
        kv = _parse_flat(text)
        kv["lam"] = kv.pop("lambda")
        vals = {}
        for f in fields(cls):
            if f.name not in kv:
                raise ValueError(f"solution file lacks {f.name!r}")
            vals[f.name] = int(kv[f.name]) if f.name == "root_count" else float(kv[f.name])
        return cls(**vals)

    def solved(self):
        return ps.solved_from_params(self.a, self.rho, self.beta, self.lam)


def _parse_flat(text: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string("[root]\n" + text)
    return dict(cp["root"])


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return _parse_flat(fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc


# --- commands -------------------------------------------------------------------


def _beta(args) -> float:
    beta = args.beta
    if beta is None or not 0.0 < beta <= 1.0:
        raise UsageError("--beta must lie in (0, 1]")
    return beta


def cmd_solve(args) -> int:
    beta = _beta(args)
    try:
        s = ps.solve_period_problem(beta, n_points=args.n_points, lam=args.lam)
    except ps.PeriodProblemUnsolved as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    rec = SolutionRecord.from_solved(s)
    text = rec.dumps()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    if max(abs(rec.residual_h), abs(rec.residual_d)) > args.tol:
        print(f"error: residuals exceed --tol {args.tol:g}", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def scan_cell(a: float, rho: float, beta: float) -> tuple:
    """One row of the scan table; failures give NaN cells."""
    try:
        b = ps.solve_b(a, rho, beta)
        a3 = ps.compute_a3(a, rho, beta)
        h = ps.h_func(a, rho, beta)
        d = ps.d_func(a, rho, beta)
    except (QuadratureError, ValueError, ArithmeticError, RuntimeError):
        return (a, rho, math.nan, math.nan, math.nan, math.nan)
    return (a, rho, b, a3, h, d)


def _scan_star(args):
    return scan_cell(*args)


def _axis(spec, name):
    lo, hi, n = spec
    n = int(n)
    if n < 1 or not lo <= hi:
        raise UsageError(f"bad --{name} range")
    return np.linspace(lo, hi, n)


def cmd_scan(args) -> int:
    beta = _beta(args)
    a_axis = _axis(args.a_range, "a-range")
    rho_axis = _axis(args.rho_range, "rho-range")
    if a_axis[0] <= 0.0 or a_axis[-1] > 1.0 or rho_axis[0] <= 0.0 or rho_axis[-1] >= math.pi:
        raise UsageError("grid must lie in a in (0, 1], rho in (0, pi)")
    jobs = [(float(a), float(r), beta) for a in a_axis for r in rho_axis]
    if args.threads > 1:
        with ProcessPoolExecutor(args.threads) as ex:
            rows = list(ex.map(_scan_star, jobs, chunksize=4))
    else:
        rows = [scan_cell(*j) for j in jobs]
    failed = sum(1 for r in rows if any(math.isnan(v) for v in r))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        wr = csv.writer(out, lineterminator="\n")
        wr.writerow(["a", "rho", "b", "a3", "h", "d"])
        for r in rows:
            wr.writerow([repr(float(v)) for v in r])
    finally:
        if out is not sys.stdout:
            out.close()
    if failed:
        print(f"warning: {failed} cells failed", file=sys.stderr)
    return EXIT_OK


def _geometry_summary(geom) -> str:
    out = [f"{tag} residual {ln.residual:.3e} length {ln.length:.6g}" for tag, ln in geom.lines.items()]
    out.append(f"max relative residual {geom.max_relative_residual():.3e}")
    out.append(f"angle l1+ l1- {geom.angle:.12g}")
    out.append(f"d_geo {geom.d_geo:.12g} h_geo {geom.h_geo:.12g} t_geo {geom.t_geo:.12g}")
    out.append(f"corner coincidence {geom.coincidence:.3e} diameter {geom.diameter:.6g}")
    return "\n".join(out)


def cmd_mesh(args) -> int:
    fmt = args.format.lower()
    if fmt not in ("obj", "ply"):
        raise UsageError(f"unknown format {args.format!r}")
    if not args.solution:
        raise UsageError("mesh needs --solution")
    try:
        with open(args.solution) as fh:
            rec = SolutionRecord.loads(fh.read())
    except (OSError, ValueError, KeyError, configparser.Error) as exc:
        raise UsageError(f"cannot read solution: {exc}") from exc
    try:
        cfg = builder.MeshConfig(args.radial_res, args.angular_res, eps_end=args.eps_end,
                                 copies=args.copies).resolved(rec.a)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    s = rec.solved()
    mesh = builder.mesh_fundamental(s, cfg)
    geom = builder.boundary_geometry(mesh)
    print(_geometry_summary(geom))
    if geom.max_relative_residual() > FIT_TOL:
        print("error: boundary line fit failed", file=sys.stderr)
        return EXIT_CHECK
    if cfg.copies > 1:
        try:
            mesh = builder.assemble_complete(mesh, s, cfg=cfg, geometry=geom)
        except builder.AssemblyError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CHECK
        z = mesh.vertices[:, 2]
        print(f"copies {cfg.copies} vertices {len(mesh.vertices)} vertical extent {z.max() - z.min():.12g}")
    if args.out:
        builder.export_mesh(mesh, fmt, args.out)
    return EXIT_OK


def _structure_points(args):
    if args.solution:
        with open(args.solution) as fh:
            return [SolutionRecord.loads(fh.read()).solved()]
    return verify.default_structure_points()


def cmd_verify(args) -> int:
    suites = verify.SUITES if args.suite == "all" else (args.suite,)
    reports = []
    for name in suites:
        if name == "claims":
            reports += verify.run_claim_suite((args.beta,) if args.beta else verify.BETAS)
        elif name == "lemmas":
            reports += verify.run_lemma_suite()
        else:
            reports += verify.run_structure_suite(_structure_points(args), seed=args.seed)
    if args.check:
        unknown = set(args.check) - {r.check_id for r in reports}
        if unknown:
            raise UsageError(f"unknown check ids {sorted(unknown)}")
        reports = [r for r in reports if r.check_id in args.check]
    for r in sorted(reports, key=lambda r: r.check_id):
        print(f"{r.check_id:28s} {r.status:4s} {r.pass_count:5d} {r.fail_count:5d}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(verify.reports_to_json(reports) + "\n")
    return EXIT_CHECK if any(r.status == "fail" for r in reports) else EXIT_OK


# --- parsing --------------------------------------------------------------------

DEFAULTS = {
    "tol": 1e-8,
    "seed": 0,
    "threads": 1,
    "n_points": 64,
    "lam": 1.0,
    "radial_res": 64,
    "angular_res": 64,
    "copies": 1,
    "format": "obj",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--beta", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--config")

    p = _Parser(prog="helicoidal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="solve the period problem")
    s.add_argument("--n-points", type=int)
    s.add_argument("--lam", type=float)

    s = sub.add_parser("scan", parents=[common], help="tabulate h and d on a grid")
    s.add_argument("--a-range", type=float, nargs=3, metavar=("LO", "HI", "N"))
    s.add_argument("--rho-range", type=float, nargs=3, metavar=("LO", "HI", "N"))

    s = sub.add_parser("mesh", parents=[common], help="mesh a solved member")
    s.add_argument("--solution")
    s.add_argument("--radial-res", type=int)
    s.add_argument("--angular-res", type=int)
    s.add_argument("--eps-end", type=float)
    s.add_argument("--copies", type=int)
    s.add_argument("--format")

    s = sub.add_parser("verify", parents=[common], help="run check suites")
    s.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    s.add_argument("--check", action="append")
    s.add_argument("--solution")
    return p


_CASTS = {"beta": float, "tol": float, "seed": int, "threads": int, "n_points": int, "lam": float,
          "radial_res": int, "angular_res": int, "copies": int, "eps_end": float,
          "a_range": lambda v: [float(x) for x in v.replace(",", " ").split()],
          "rho_range": lambda v: [float(x) for x in v.replace(",", " ").split()]}


def resolve_options(args) -> argparse.Namespace:
    """Fill unset flags from the config file, then from defaults."""
    cfg = load_config(args.config)
    defaults = dict(DEFAULTS, a_range=[0.05, 0.95, 10], rho_range=[0.1, math.pi - 0.1, 10])
    for key, value in vars(args).items():
        if value is not None or key in ("command", "config", "check"):
            continue
        if key in cfg:
            try:
                setattr(args, key, _CASTS.get(key, str)(cfg[key]))
            except ValueError as exc:
                raise UsageError(f"bad config value for {key}: {exc}") from exc
        elif key in defaults:
            setattr(args, key, defaults[key])
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be positive")
    return args


COMMANDS = {"solve": cmd_solve, "scan": cmd_scan, "mesh": cmd_mesh, "verify": cmd_verify}


def main(argv=None) -> int:
    try:
        args = resolve_options(build_parser().parse_args(argv))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
