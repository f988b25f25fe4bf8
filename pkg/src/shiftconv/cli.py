"""Command-line front end.

Exit status: 0 when every check passes, 1 when a check fails, 2 on usage,
cache or I/O errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import circle, coeffs, sumlab, voronoi
from .config import Config, load_config
from .errors import BudgetError, CacheChecksumError, CacheVersionError, RangeNotCoveredError
from .transforms import SpectralParams
from .weights import bump_eq1_on_unit2, plateau, simple_bump

D3_TOL = 1e-3
GL2_TOL = 1e-6
POISSON_TOL = 1e-8


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shiftconv", description="Shifted convolution sum laboratory")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--cache-dir", help="coefficient table cache directory")
    p.add_argument("--threads", type=int, help="worker threads for direct sums")
    p.add_argument("--out", default="shiftconv-out", help="directory for CSV/SVG outputs")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sieve", help="build coefficient tables into the cache")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--kind", choices=("d3", "tau", "all"), default="all")

    v = sub.add_parser("verify", help="run identity checks")
    vs = v.add_subparsers(dest="check", required=True)
    d3 = vs.add_parser("voronoi-d3")
    d3.add_argument("--qmax", type=int, default=12)
    d3.add_argument("--scale", type=float, default=2000.0)
    gl2 = vs.add_parser("voronoi-gl2")
    gl2.add_argument("--qmax", type=int, default=10)
    gl2.add_argument("--scale", type=float, default=5000.0)
    gl2.add_argument("--delta", type=float, default=8.0, help="plateau sharpness of the test weight")
    j = vs.add_parser("jutila")
    j.add_argument("--q", type=_int_list, default=[64, 128, 256, 512], help="comma-separated Q values")
    j.add_argument("--r", type=int, default=1)
    vs.add_parser("poisson")

    sm = sub.add_parser("sum", help="evaluate S(H, X) directly")
    sm.add_argument("--X", type=float, required=True)
    sm.add_argument("--H", type=float, required=True)
    sm.add_argument("--r", type=int, default=1)
    sm.add_argument("--lambda", dest="lam", choices=("d3", "one"), default="d3")

    e = sub.add_parser("experiment", help="run a grid experiment")
    e.add_argument("--grid", required=True, help="grid file (X, H_law, r, lambda keys)")
    return p


def _lambda_table(kind: str, N: int, cfg: Config):
    if kind == "d3":
        return coeffs.d3_table_cached(N, cfg.cache_dir, cfg.memory_budget)
    import numpy as np

    return coeffs.from_sieve("one", np.ones(N + 1, dtype=np.int64))


def _pow2_at_least(n: int) -> int:
    return 1 << max(1, math.ceil(math.log2(max(n, 2))))


def cmd_sieve(args, cfg: Config) -> int:
    if args.N < 1:
        raise UsageError("--N must be positive")
    if args.kind in ("d3", "all"):
        t = coeffs.d3_table_cached(args.N, cfg.cache_dir, cfg.memory_budget)
        print(f"d3 table: N={t.limit} cached in {cfg.cache_dir}")
    if args.kind in ("tau", "all"):
        t = coeffs.tau_table_cached(args.N, cfg.cache_dir, cfg.memory_budget)
        print(f"tau table: N={t.limit} cached in {cfg.cache_dir}")
    return 0


def _finish(reports, path: Path, tol: float, name: str) -> int:
    voronoi.write_reports_csv(reports, path)
    worst = max(r.rel_error for r in reports)
    ok = worst <= tol
    print(f"{name}: {len(reports)} checks, worst rel_error {worst:.3e} (tolerance {tol:g}) -> {'PASS' if ok else 'FAIL'}")
    print(f"report: {path}")
    return 0 if ok else 1


def cmd_voronoi_d3(args, cfg: Config, out: Path) -> int:
    W = simple_bump(args.scale)
    reports = []
    for q in range(1, args.qmax + 1):
        for c in range(1, q + 1):
            if math.gcd(c, q) != 1:
                continue
            r = voronoi.d3_voronoi_check(c, q, W, eps=cfg.cutoff_eps, safety=cfg.safety_factor)
            reports.append(r)
            print(f"q={q:3d} c={c:3d} rel_error={r.rel_error:.3e} terms={r.terms_used}")
    return _finish(reports, out / "voronoi-d3.csv", D3_TOL, "voronoi-d3")


def cmd_voronoi_gl2(args, cfg: Config, out: Path) -> int:
    W = plateau(args.delta, args.scale)
    params = SpectralParams.holomorphic(12)
    table = coeffs.tau_table_cached(_pow2_at_least(int(40 * args.scale)), cfg.cache_dir, cfg.memory_budget)
    reports = []
    for q in range(1, args.qmax + 1):
        cache = voronoi._PsiCache(q, params, W, cfg.maass_kernels)
        for c in range(1, q + 1):
            if math.gcd(c, q) != 1:
                continue
            r = voronoi.gl2_voronoi_check(c, q, W, params, table, eps=cfg.cutoff_eps, safety=cfg.safety_factor,
                                          psi_cache=cache)
            reports.append(r)
            print(f"q={q:3d} c={c:3d} rel_error={r.rel_error:.3e} terms={r.terms_used}")
    return _finish(reports, out / "voronoi-gl2.csv", GL2_TOL, "voronoi-gl2")


def cmd_jutila(args, cfg: Config, out: Path) -> int:
    ok = True
    lines = ["Q,members,L,eta,defect,defect_over_log2"]
    for Q in args.q:
        ms = circle.build_moduli_set(Q, args.r, Fraction(1, Q * Q))
        approx = circle.indicator_approx(ms)
        mass_ok = approx.mass() == 1
        ok &= mass_ok
        d = circle.l2_defect(approx)
        ratio = d / math.log(Q) ** 2
        lines.append(f"{Q},{len(ms.members)},{ms.L},1/{Q * Q},{d:.17e},{ratio:.17e}")
        print(f"Q={Q}: {len(ms.members)} primes, L={ms.L}, defect={d:.6f}, defect/log^2 Q={ratio:.6f}, "
              f"mass exact: {mass_ok}")
    (out / "jutila.csv").write_text("\n".join(lines) + "\n")
    return 0 if ok else 1


def cmd_poisson(args, cfg: Config, out: Path) -> int:
    phi = bump_eq1_on_unit2(1.0)
    W = simple_bump()
    lines = ["c,q,H,m,base,beta,direct_re,direct_im,dual_re,dual_im,error"]
    worst = 0.0
    for c, q, H, m, base, beta in circle.STANDARD_POISSON_CASES:
        res = circle.poisson_hsum_check(c, q, H, m, base, beta, W, phi)
        worst = max(worst, res.error)
        lines.append(",".join(map(repr, (c, q, H, m, base, beta))) + "," + ",".join(
            f"{v:.17e}" for v in (res.direct.real, res.direct.imag, res.dual.real, res.dual.imag, res.error)))
        print(f"c={c} q={q} H={H:g}: |direct - dual| = {res.error:.3e}")
    (out / "poisson.csv").write_text("\n".join(lines) + "\n")
    ok = worst <= POISSON_TOL
    print(f"poisson: worst error {worst:.3e} (tolerance {POISSON_TOL:g}) -> {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_sum(args, cfg: Config, out: Path) -> int:
    if args.H <= 0 or args.X <= 0 or args.H > args.X or args.r < 1:
        raise UsageError("need 0 < H <= X and r >= 1")
    nmax = int(2 * args.X)
    lam = _lambda_table(args.lam, nmax, cfg)
    g = coeffs.tau_table_cached(_pow2_at_least(args.r * nmax + int(2 * args.H) + 1), cfg.cache_dir, cfg.memory_budget)
    spec = sumlab.SumSpec(lam, g, args.r, args.X, args.H)
    val = sumlab.direct_sum(spec, cfg.threads, cfg.op_budget)
    triv = sumlab.direct_sum(spec, cfg.threads, cfg.op_budget, absolute=True)
    print(f"S(H={args.H:g}, X={args.X:g}, r={args.r}) = {val:.17e}")
    print(f"trivial majorant = {triv:.17e}, ratio = {abs(val) / triv:.6e}")
    return 0 if abs(val) <= triv else 1


def cmd_experiment(args, cfg: Config, out: Path) -> int:
    try:
        text = Path(args.grid).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read grid file: {exc}") from None
    try:
        points, lam_kind = sumlab.parse_grid_text(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if lam_kind not in ("d3", "one"):
        raise UsageError(f"unknown lambda {lam_kind!r}")
    nmax = int(2 * max(p.X for p in points))
    need = max(p.r * int(2 * p.X) + int(2 * p.H) + 1 for p in points)
    lam = _lambda_table(lam_kind, nmax, cfg)
    g = coeffs.tau_table_cached(_pow2_at_least(need), cfg.cache_dir, cfg.memory_budget)
    rep = sumlab.run_experiment(points, lam, g, out, cfg.threads, cfg.op_budget)
    for p in rep.points:
        print(f"X={p.X:g} H={p.H:g} r={p.r}: S={p.value:.6e} trivial={p.trivial:.6e} ratio={p.ratio:.3e}")
    for law, fit in rep.fits.items():
        print(f"H = X^{law}: fitted exponent {fit.slope:.4f} (rms residual {fit.residual:.3f})")
    print(f"csv: {rep.csv_path}\nsvg: {rep.svg_path}")
    return 0 if rep.majorant_holds else 1


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(cache_dir=args.cache_dir, threads=args.threads)
        out = Path(args.out)
        if args.command == "sieve":
            return cmd_sieve(args, cfg)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "verify":
            handler = {"voronoi-d3": cmd_voronoi_d3, "voronoi-gl2": cmd_voronoi_gl2,
                       "jutila": cmd_jutila, "poisson": cmd_poisson}[args.check]
            return handler(args, cfg, out)
        if args.command == "sum":
            return cmd_sum(args, cfg, out)
        return cmd_experiment(args, cfg, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except (CacheChecksumError, CacheVersionError) as exc:
        print(f"cache error: {exc}", file=sys.stderr)
        return 2
    except (BudgetError, RangeNotCoveredError) as exc:
        print(f"limit error: {exc}", file=sys.stderr)
        return 2
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return run_cli(argv)
