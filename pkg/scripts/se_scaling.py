"""Bootstrap standard errors versus the number of pairs per setting."""

import argparse

from weakmdr import emulator as em


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ma-strength", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    noise = em.calibrate_noise()
    w = em.default_weak_strength(noise)
    sizes = (7500, 30000, 120000, 480000)
    print("pairs   " + " ".join(f"{q:>15}" for q in em.QUANTITIES))
    for n in sizes:
        res = em.run_point(w, args.ma_strength, noise, em.ShotConfig(n, args.seed))
        print(f"{n:<7} " + " ".join(f"{res.stderr(q):15.3e}" for q in em.QUANTITIES))


if __name__ == "__main__":
    main()
