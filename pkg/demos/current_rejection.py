"""Straight-line runs in a 0.2 m/s cross current.

Plain LOS settles with a lateral offset; the integral law and the
observer-compensated law remove it.  The observer estimate is printed as it
converges.
"""
from pathlib import Path

import numpy as np

from pathfollow.harness import load_scenario_file, run

ROOT = Path(__file__).resolve().parent.parent / "scenarios"


def main():
    for name in ("current_method3", "current_ilos", "current_method3_sat", "current_method3_comp",
                 "current_method6_comp"):
        trace, _ = run(load_scenario_file(ROOT / f"{name}.json"))
        t = trace["t"]
        last = t >= 0.8 * t[-1]
        print(f"{name:<24} mean |xte| over last 20%: {np.mean(np.abs(trace['xte'][last])):.4f} m")
    trace, _ = run(load_scenario_file(ROOT / "current_method3_comp.json"))
    print("\n t [s]   vc_hat")
    for k in range(0, len(trace), 250)[:9]:
        print(f"{trace['t'][k]:6.1f}   ({trace['vc_hat_x'][k]:+.4f}, {trace['vc_hat_y'][k]:+.4f})")


if __name__ == "__main__":
    main()
