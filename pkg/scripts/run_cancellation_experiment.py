"""Measure |S(H, X)| for lambda = d3, g = tau over a grid of X and H = X^law, with fitted exponents."""

import argparse
from pathlib import Path

from shiftconv import arith, coeffs
from shiftconv.sumlab import exponent_fit, parse_grid_text, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", default=str(Path(__file__).with_name("cancellation_grid.txt")))
    ap.add_argument("--out", default="cancellation")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    points, lam_kind = parse_grid_text(Path(args.grid).read_text())
    if lam_kind != "d3":
        raise SystemExit("this script pairs d3 with tau; use the CLI for other choices")
    need = max(p.r * int(2 * p.X) + int(2 * p.H) + 1 for p in points)
    tau = coeffs.normalize(coeffs.build_tau_table(need), coeffs.TAU_EXPONENT)
    d3 = coeffs.from_sieve("d3", arith.sieve_d3(int(2 * max(p.X for p in points))).values)
    rep = run_experiment(points, d3, tau, args.out, args.threads)
    for p in rep.points:
        print(f"law {p.law}: X = {p.X:>8g} H = {p.H:>6g}  |S| = {abs(p.value):.4e}  trivial = {p.trivial:.4e}")
    for law, fit in rep.fits.items():
        triv = exponent_fit([(p.X, p.trivial) for p in rep.points if p.law == law]).slope
        print(f"H = X^{law}: exponent of |S| {fit.slope:+.3f}, trivial exponent {triv:+.3f}")
    print(f"majorant holds everywhere: {rep.majorant_holds}")
    print(f"csv: {rep.csv_path}\nsvg: {rep.svg_path}")


if __name__ == "__main__":
    main()
