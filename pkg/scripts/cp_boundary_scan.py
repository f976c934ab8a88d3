"""Scan lambda across lambda_max and report the smallest Choi eigenvalue.

The 9x9 Choi matrix of the meson map is sampled on a log grid below t_plus;
it should turn indefinite exactly when lambda crosses lambda_max.

Usage: python scripts/cp_boundary_scan.py [K0|B0]
"""
import sys

import numpy as np

from decaylab import bounds, meson
from decaylab.linalg import min_eigenvalue
from decaylab.presets import get_preset


def scan(name="K0", fractions=np.linspace(0.8, 1.2, 9), samples=200):
    p = get_preset(name).params
    rep = bounds.lambda_max(p)
    times = np.logspace(np.log10(rep.t_plus) - 4, np.log10(rep.t_plus), samples)
    print("lambda_over_max,min_choi_eigenvalue,worst_t")
    for f in fractions:
        q = p.with_lambda(f * rep.lambda_max)
        eigs = [min_eigenvalue(meson.meson_choi(q, t)) for t in times]
        k = int(np.argmin(eigs))
        print(f"{f:.3f},{eigs[k]:.4e},{times[k]:.4e}")


if __name__ == "__main__":
    scan(*sys.argv[1:2])
