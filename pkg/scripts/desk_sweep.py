"""Desk-scale KdV/tanh sweep: train (resumably), then emit fits and panels.

    python3 scripts/desk_sweep.py [--config configs/desk.json] [--output-dir runs/desk]

Twelve 25k-epoch runs; the three N=1024 pairs dominate the cost.
"""

import argparse
from pathlib import Path

import numpy as np

from slpinn import harness, scaling_fit

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", default=str(ROOT / "configs" / "desk.json"))
    ap.add_argument("--output-dir")
    args = ap.parse_args()
    config = harness.SweepConfig.from_file(args.config)
    if args.output_dir:
        config.output_dir = args.output_dir

    def progress(rec, result):
        print(f"  {rec.pde} {rec.activation} N={rec.width} kappa={rec.kappa} seed={rec.seed}: "
              f"{rec.rel_l2_error if rec.ok else 'failed'} ({rec.wall_time:.0f}s)", flush=True)

    result = harness.run_sweep(config, progress=progress)
    print(f"executed {result.executed}, skipped {result.skipped}, failed {result.failed}")

    records = harness.Ledger(config.output_dir).records()
    out = Path(config.output_dir)
    for model in ("univariate", "separable", "interaction"):
        try:
            path, _ = harness.fit_tables(records, model, out / "fits")
            print(f"wrote {path}")
        except scaling_fit.InsufficientDataError as exc:
            print(f"{model}: {exc}")
    harness.report_panels(records, out / "report")

    ok = scaling_fit.successful(records, "kdv", "tanh")
    for kappa in sorted({r.kappa for r in ok}):
        fit = scaling_fit.fit_univariate_alpha(ok, "kdv", "tanh", kappa)
        means = {w: np.mean(v) for w, v in scaling_fit.mean_error_by_width(
            [r for r in ok if r.kappa == kappa]).items()}
        print(f"kappa={kappa:g}: alpha={fit.alpha:+.3f} +/- {fit.ci('log_N'):.3f}; "
              + ", ".join(f"N={w}: {m:.2e}" for w, m in means.items()))


if __name__ == "__main__":
    main()
