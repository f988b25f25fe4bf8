"""Run the d3 and GL(2) Voronoi checks over all reduced residues and write one CSV per family."""

import argparse
import math
import time
from pathlib import Path

from shiftconv import coeffs
from shiftconv.transforms import SpectralParams
from shiftconv.voronoi import _PsiCache, d3_voronoi_check, gl2_voronoi_check, write_reports_csv
from shiftconv.weights import plateau, simple_bump


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d3-qmax", type=int, default=12)
    ap.add_argument("--gl2-qmax", type=int, default=10)
    ap.add_argument("--d3-scale", type=float, default=2000.0)
    ap.add_argument("--gl2-scale", type=float, default=5000.0)
    ap.add_argument("--out", default="identity-checks")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    W = simple_bump(args.d3_scale)
    reports = [d3_voronoi_check(c, q, W) for q in range(1, args.d3_qmax + 1)
               for c in range(1, q + 1) if math.gcd(c, q) == 1]
    write_reports_csv(reports, out / "voronoi-d3.csv")
    print(f"d3: {len(reports)} checks, worst rel error {max(r.rel_error for r in reports):.2e} "
          f"({time.perf_counter() - t0:.0f} s)")

    t0 = time.perf_counter()
    W = plateau(8.0, args.gl2_scale)
    params = SpectralParams.holomorphic(12)
    table = coeffs.normalize(coeffs.build_tau_table(int(40 * args.gl2_scale)), coeffs.TAU_EXPONENT)
    reports = []
    for q in range(1, args.gl2_qmax + 1):
        cache = _PsiCache(q, params, W, False)
        reports += [gl2_voronoi_check(c, q, W, params, table, psi_cache=cache)
                    for c in range(1, q + 1) if math.gcd(c, q) == 1]
    write_reports_csv(reports, out / "voronoi-gl2.csv")
    print(f"GL(2): {len(reports)} checks, worst rel error {max(r.rel_error for r in reports):.2e} "
          f"({time.perf_counter() - t0:.0f} s)")


if __name__ == "__main__":
    main()
