"""Write the discriminant and lambda-bound curves for both meson presets as CSV.

Usage: python scripts/figure_data.py [outdir]
"""
import sys
from pathlib import Path

from decaylab.cli import main as cli


def main(outdir="figures"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for preset in ("K0", "B0"):
        for which in ("fig1", "fig2"):
            path = out / f"{which}_{preset}.csv"
            code = cli(["figure", which, "--preset", preset, "--out", str(path)])
            print(f"{path}: exit {code}")


if __name__ == "__main__":
    main(*sys.argv[1:])
