"""Run every guidance law on the lawnmower fixtures and print a comparison table.

Usage: python3 demos/compare_lawnmower.py [scenario_dir]
"""
import sys
from pathlib import Path

from pathfollow.harness import load_scenario_file, run

METHODS = ("method1", "method2", "method3", "method3_sat", "method4", "method6",
           "method5", "method7", "fully_actuated")


def main(root):
    print(f"{'method':<16}{'t_conv [s]':>12}{'rms xte [m]':>14}{'s1_ss [m]':>12}{'max|r|':>10}")
    for m in METHODS:
        f = root / f"lawnmower_{m}.json"
        if not f.exists():
            continue
        _, met = run(load_scenario_file(f))
        print(f"{m:<16}{met.convergence_time:>12.1f}{met.rms_cross_track:>14.4f}"
              f"{met.steady_state_s1:>12.3f}{met.max_abs_r:>10.3f}")


if __name__ == "__main__":
    default = Path(__file__).resolve().parent.parent / "scenarios"
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else default)
