"""Write d(t) = u_x along one zero-background characteristic for each regime.

One representative (d0, rho0) per case of the regime taxonomy; the CSV is
plot-ready with columns case, d0, rho0, t, d, rho. Rows stop short of the
blow-up time when there is one.

    python3 scripts/regime_taxonomy.py --out regimes.csv
"""

import argparse
import csv
import math

import numpy as np

from euler_poisson_ct.thresholds_1d import ZeroBackground, classify_regime, indicator_1d

# (d0, rho0) with k = 1
SAMPLES = [(2.0, 1.0), (0.5, 1.0), (-0.5, 1.0), (-1.2, 1.0), (-1.5, 1.0), (-3.0, 1.0)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="regimes.csv")
    ap.add_argument("--t-end", type=float, default=6.0)
    ap.add_argument("--samples", type=int, default=301)
    args = ap.parse_args()

    model = ZeroBackground(1.0)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case", "d0", "rho0", "t", "d", "rho"])
        for d0, rho0 in SAMPLES:
            rc = classify_regime(d0, rho0, 1.0)
            t_c = rc.t_c_minus if rc.t_c_minus is not None else math.inf
            print(f"d0={d0:+.2f} rho0={rho0:.2f}: case {rc.case_id} ({rc.description})")
            for t in np.linspace(0.0, min(args.t_end, 0.999 * t_c), args.samples):
                g, gt = indicator_1d(model, rho0, d0, float(t))
                w.writerow([rc.case_id, d0, rho0, f"{t:.17g}", f"{gt / g:.17g}", f"{rho0 / g:.17g}"])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
