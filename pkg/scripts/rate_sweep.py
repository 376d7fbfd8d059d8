"""Sweep the coefficient tail exponent and check the growth-rate ladder.

For b(r) ~ r^-l with l below the Bounded threshold 2k, every entire
solution grows like r^alpha with alpha = (2k - l)/(k - gamma).  This
script solves the Cauchy problem for a row of l values, fits the
exponents of (u, u', u'') over the last two decades, and, where the
closed-form power solution exists (0 <= l <= k - 1), compares the
observed amplitude u(r_max)/r_max^alpha against the exact coefficient.

Usage examples:
  python3 scripts/rate_sweep.py --n 4 --k 2 --gamma 1.0 --outdir out_rates
  python3 scripts/rate_sweep.py --n 3 --k 1 --gamma 0.5 --l-values 0 0.25 0.5 \
      --r-max 1e5 --outdir out_rates
"""

from __future__ import annotations

import argparse
import csv
import json
from pathlib import Path

import numpy as np

from hessianls import (ParameterError, ProblemParams, RadialGrid,
                       RadialProfile, exact_power_solution, expected_rate,
                       residual_max, solve_cauchy, verify_rates)


def sweep_row(params: ProblemParams, l: float, grid: RadialGrid) -> dict:
    profile = RadialProfile.power_tail(l)
    curve = solve_cauchy(params, profile, grid)
    report = verify_rates(curve, params, l)
    row = {
        "l": l,
        "alpha_expected": expected_rate(params, l),
        "status": report.status,
        "residual_max": residual_max(curve, params, profile),
        "amplitude_ratio": report.amplitude_ratio,
    }
    for name in ("u", "du", "d2u"):
        fit = report.fits.get(name)
        row[f"{name}_fit"] = fit.exponent if fit else float("nan")
        row[f"{name}_stderr"] = fit.stderr if fit else float("nan")
    try:
        exact = exact_power_solution(params, l)
        row["amplitude_exact"] = exact.amplitude
        row["amplitude_observed"] = float(curve.u[-1]) / grid.r_max ** exact.alpha
    except ParameterError:
        row["amplitude_exact"] = float("nan")
        row["amplitude_observed"] = float("nan")
    return row


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4, help="space dimension")
    ap.add_argument("--k", type=int, default=2, help="Hessian order")
    ap.add_argument("--gamma", type=float, default=1.0, help="sublinear exponent, 0 < gamma < k")
    ap.add_argument("--a", type=float, default=1.0, help="center value u(0)")
    ap.add_argument("--l-values", nargs="*", type=float, default=None,
                    help="tail exponents to sweep (default: 8 values in [0, 2k))")
    ap.add_argument("--r-max", type=float, default=1e5, help="domain radius")
    ap.add_argument("--nodes-per-decade", type=int, default=32)
    ap.add_argument("--outdir", default="out_rate_sweep")
    args = ap.parse_args()

    params = ProblemParams(n=args.n, k=args.k, gamma=args.gamma, a=args.a)
    if args.l_values is None:
        l_values = list(np.linspace(0.0, 2.0 * args.k, 9)[:-1])
    else:
        l_values = [float(v) for v in args.l_values]
    grid = RadialGrid.build(args.r_max, nodes_per_decade=args.nodes_per_decade)

    rows = [sweep_row(params, l, grid) for l in l_values]

    outp = Path(args.outdir)
    outp.mkdir(parents=True, exist_ok=True)
    fieldnames = list(rows[0].keys())
    with open(outp / "rate_sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    (outp / "rate_sweep.json").write_text(json.dumps(
        {"params": {"n": params.n, "k": params.k, "gamma": params.gamma, "a": params.a},
         "r_max": grid.r_max, "rows": rows}, indent=2, sort_keys=True),
        encoding="utf-8")

    header = f"{'l':>6} {'alpha':>8} {'u fit':>8} {'du fit':>8} {'d2u fit':>8} {'amp ratio':>10}  status"
    print(f"rate ladder for n={params.n}, k={params.k}, gamma={params.gamma}, "
          f"r_max={grid.r_max:g}")
    print(header)
    print("-" * len(header))
    for row in rows:
        print(f"{row['l']:6.2f} {row['alpha_expected']:8.4f} {row['u_fit']:8.4f} "
              f"{row['du_fit']:8.4f} {row['d2u_fit']:8.4f} {row['amplitude_ratio']:10.4f}  "
              f"{row['status']}")
    print("Wrote", outp / "rate_sweep.csv")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
