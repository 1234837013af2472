"""Train tanh and relu networks (N=64, seed 0) on Poisson and print their errors.

    python3 scripts/poisson_demo.py [--epochs 25000] [--width 64]
"""

import argparse
import time

from slpinn.trainer import TrainConfig, train_run


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--epochs", type=int, default=25_000)
    ap.add_argument("--width", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = TrainConfig(epochs=args.epochs)
    for act in ("tanh", "relu"):
        start = time.perf_counter()
        rec = train_run("poisson", None, args.width, act, args.seed, cfg)
        print(f"{act:5s} N={args.width}: rel L2 = {rec.rel_l2_error:.3e}  "
              f"(L_pde {rec.loss_pde:.2e}, L_bc {rec.loss_bc:.2e}; {time.perf_counter() - start:.1f}s)")


if __name__ == "__main__":
    main()
