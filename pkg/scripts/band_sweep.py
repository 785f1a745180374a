"""Threshold band on u0'(alpha) for the isotropic model, nu = 0..3.

For each nu and alpha the script writes the lower (breakdown below) and
upper (global above) thresholds; they coincide for nu = 0 and nu = 3.

    python3 scripts/band_sweep.py --rho0 'exp(-x)' --u0 '1' --out band.csv
"""

import argparse
import csv

import numpy as np

from euler_poisson_ct.flowmap import IsotropicConfig
from euler_poisson_ct.profiles import InitialData
from euler_poisson_ct.thresholds_multid import band


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho0", default="exp(-x)")
    ap.add_argument("--u0", default="1")
    ap.add_argument("--k", type=float, default=1.0)
    ap.add_argument("--alpha-min", type=float, default=0.1)
    ap.add_argument("--alpha-max", type=float, default=4.0)
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--out", default="band.csv")
    args = ap.parse_args()

    data = InitialData.from_text(args.rho0, args.u0)
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.count)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nu", "alpha", "lower", "upper", "width"])
        for nu in range(4):
            cfg = IsotropicConfig(nu, args.k, data)
            widths = []
            for a in alphas:
                b = band(cfg, float(a))
                widths.append(b.upper - b.lower)
                w.writerow([nu, f"{a:.17g}", f"{b.lower:.17g}", f"{b.upper:.17g}", f"{widths[-1]:.17g}"])
            print(f"nu={nu}: band width in [{min(widths):.4g}, {max(widths):.4g}]")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
