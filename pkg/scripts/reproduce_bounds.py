"""Print t_plus, lambda_max and the necessary delta_L bound for the meson presets.

Usage: python scripts/reproduce_bounds.py
"""
import time

from decaylab import bounds
from decaylab.presets import b0, k0

# literature values the presets should reproduce
QUOTED = {"K0": (7.18517e-12, 1.3629e11), "B0": (1.53677e-15, 6.5039e14)}


def main():
    print("preset,t_plus,t_plus_quoted,lambda_max,lambda_max_quoted,necessary_bound,seconds")
    for pr in (k0(), b0()):
        start = time.perf_counter()
        rep = bounds.lambda_max(pr.params)
        nb = bounds.necessary_delta_bound(pr.params)
        secs = time.perf_counter() - start
        tq, lq = QUOTED[pr.name]
        print(f"{pr.name},{rep.t_plus:.6e},{tq:.6e},{rep.lambda_max:.6e},{lq:.6e},{nb.bound:.4g},{secs:.3f}")


if __name__ == "__main__":
    main()
