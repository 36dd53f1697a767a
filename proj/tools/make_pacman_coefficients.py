"""Illustrative coefficients for the pacman series.

The outer coefficients are the scattered field of a plane wave hitting a rigid
circle of radius R (incidence angle theta0, time factor exp(i omega t)):
    a_n = -eps_n i^n J_n'(kR) / H_n^(2)'(kR) * (sin n theta0, cos n theta0)
The mouth coefficients are zero. These are not the benchmark's coefficients,
which come from a mode-matching solve; they only give the harness a smooth,
outgoing, decaying field to run against.
"""
import argparse

import numpy as np
from scipy import special


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/pacman_coefficients.csv")
    ap.add_argument("--terms", type=int, default=100)
    ap.add_argument("--k", type=float, default=9.0)
    ap.add_argument("--radius", type=float, default=1.0)
    ap.add_argument("--theta0", type=float, default=np.pi / 4)
    args = ap.parse_args()

    kr = args.k * args.radius
    rows = []
    for n in range(args.terms):
        eps = 1.0 if n == 0 else 2.0
        dh2 = special.jvp(n, kr) - 1j * special.yvp(n, kr)
        base = -eps * (1j**n) * special.jvp(n, kr) / dh2 if np.isfinite(dh2) else 0.0
        aA = base * np.sin(n * args.theta0)
        aS = base * np.cos(n * args.theta0)
        rows.append((n, aA, aS, 0j, 0j))

    with open(args.out, "w") as f:
        f.write("n,aA_re,aA_im,aS_re,aS_im,bA_re,bA_im,bS_re,bS_im\n")
        for n, *vals in rows:
            parts = [str(n)]
            for v in vals:
                parts += [repr(float(np.real(v))), repr(float(np.imag(v)))]
            f.write(",".join(parts) + "\n")


if __name__ == "__main__":
    main()
