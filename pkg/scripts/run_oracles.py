"""Run the verification suites at several lambda scales and time them.

Usage: python scripts/run_oracles.py
"""
import time

from decaylab import verify


def main(scales=(0.0, 0.5, 0.95, 1.05)):
    for s in scales:
        start = time.perf_counter()
        results = verify.run_all(verify.default_meson_presets(lam_scale=s))
        secs = time.perf_counter() - start
        failed = [r.name for r in results if not r.passed]
        print(f"lambda_scale={s}: {len(results) - len(failed)}/{len(results)} passed in {secs:.1f}s",
              f"failed={failed}" if failed else "")


if __name__ == "__main__":
    main()
