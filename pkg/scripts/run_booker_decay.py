"""Fit the decay exponent of sum tau(n) n^{-11/2} F(n/X) and of the lambda = 1 control."""

import argparse

import numpy as np

from shiftconv import coeffs
from shiftconv.sumlab import booker_decay
from shiftconv.weights import plateau, simple_bump


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmin", type=int, default=10)
    ap.add_argument("--kmax", type=int, default=17)
    ap.add_argument("--plateau", type=float, default=None, help="use a plateau weight of this sharpness")
    args = ap.parse_args()
    Xs = [2.0**k for k in range(args.kmin, args.kmax + 1)]
    F = simple_bump() if args.plateau is None else plateau(args.plateau)
    tau = coeffs.normalize(coeffs.build_tau_table(int(2 * Xs[-1]) + 1), coeffs.TAU_EXPONENT)
    fit = booker_decay(tau, F, Xs)
    control = booker_decay(coeffs.synthetic_table("one", np.ones(tau.limit + 1)), F, Xs)
    print(f"{'X':>8} {'sum':>12} {'floor':>10}")
    for X, s, f in zip(Xs, fit.sums, fit.floors):
        print(f"{X:>8g} {s:>12.3e} {f:>10.1e}{'  (at floor)' if abs(s) <= f else ''}")
    print(f"tau: {fit.status}, slope {fit.slope if fit.slope is None else round(fit.slope, 3)}, passed {fit.passed}")
    print(f"control lambda = 1: slope {control.slope:.3f}")


if __name__ == "__main__":
    main()
