"""Bound |<Y>| after the weak probe versus weak strength, ideal and calibrated.

    python scripts/fig3_bound.py [--shots N|exact] [--seed S] [--plot out.png]
"""

import argparse

import numpy as np

from weakmdr.config import SweepConfig
from weakmdr.cli import cmd_sweep_weak


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", default="30000")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--plot", help="write a PNG (needs matplotlib)")
    args = ap.parse_args()

    weak = [round(float(x), 10) for x in np.linspace(0, 0.95, 20)]
    cfg = SweepConfig(weak_strengths=weak, shots=args.shots, seed=args.seed,
                      bootstrap_resamples=300).validate()
    rows = cmd_sweep_weak(cfg)
    print(f"{'w':>6} {'ideal':>8} {'bound':>8} {'se':>8}")
    for r in rows:
        se = "" if r.bound_se is None else f"{r.bound_se:8.4f}"
        print(f"{r.strength:6.3f} {r.bound_ideal:8.4f} {r.bound:8.4f} {se:>8}")

    if args.plot:
        import matplotlib.pyplot as plt

        w = [r.strength for r in rows]
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.plot(w, [r.bound_ideal for r in rows], "k-", label="ideal")
        ax.errorbar(w, [r.bound for r in rows],
                    yerr=[r.bound_se or 0 for r in rows], fmt="o", ms=3, label="calibrated")
        ax.axhline(0.80, ls=":", c="grey")
        ax.set_xlabel("weak strength S")
        ax.set_ylabel("|<Y>|")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)


if __name__ == "__main__":
    main()
