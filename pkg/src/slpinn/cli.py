"""Command-line entry point: ``slpinn {sweep,fit,report,verify,single-run}``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness, verify
from .errors import ConfigurationError, InsufficientDataError, SlpinnError
from .trainer import TrainConfig, train_run

log = logging.getLogger("slpinn")


def _ledger_dir(path):
    path = Path(path)
    return path.parent if path.suffix == ".jsonl" else path


def cmd_sweep(args):
    config = harness.SweepConfig.from_file(args.config) if args.config else harness.SweepConfig()
    if args.output_dir:
        config.output_dir = args.output_dir
    if args.workers:
        config.workers = args.workers
    total = len(config.cells())

    def progress(rec, result):
        err = "failed" if not rec.ok else f"{rec.rel_l2_error:.3e}"
        print(f"[{result.executed + result.skipped}/{total}] {rec.pde} {rec.activation} N={rec.width} "
              f"kappa={rec.kappa} seed={rec.seed}: {err} ({rec.wall_time:.1f}s)", flush=True)

    result = harness.run_sweep(config, progress=progress)
    print(f"executed {result.executed}, skipped {result.skipped}, failed {result.failed}; "
          f"ledger at {Path(config.output_dir) / 'ledger.jsonl'}")
    return 1 if result.failed else 0


def cmd_fit(args):
    ledger = harness.Ledger.open(args.ledger)
    if not ledger.path.exists():
        raise ConfigurationError(f"no ledger at {ledger.path}")
    records = ledger.records()
    out_dir = Path(args.out) if args.out else ledger.directory / "fits"
    models = list(harness.FIT_MODELS) if args.model == "all" else [args.model]
    status = 0
    for model in models:
        try:
            path, missing = harness.fit_tables(records, model, out_dir)
            print(f"{model}: wrote {path}")
        except InsufficientDataError as exc:
            path, missing = None, exc.missing
            print(f"{model}: {exc}", file=sys.stderr)
            status = 2
        for item in missing:
            print(f"  missing: {item}", file=sys.stderr)
    return status


def cmd_report(args):
    ledger = harness.Ledger.open(args.ledger)
    out_dir = Path(args.out) if args.out else ledger.directory / "report"
    paths = harness.report_panels(ledger.records(), out_dir)
    for p in paths:
        print(p)
    return 0


def cmd_verify(args):
    results = verify.run_all(include_allen_cahn=not args.skip_allen_cahn)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}")
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_single_run(args):
    config = TrainConfig(epochs=args.epochs, learning_rate=args.learning_rate, log_every=args.log_every)
    out = Path(args.output_dir) if args.output_dir else None
    record = train_run(args.pde, args.kappa, args.width, args.activation, args.seed, config,
                       history_dir=out / "history" if out and args.log_every else None,
                       cache_dir=out / "reference" if out else None)
    if out is not None:
        harness.Ledger(out).append(record)
    print(json.dumps(record.to_dict(), indent=2))
    return 0 if record.ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="slpinn", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run every missing cell of a sweep config")
    p.add_argument("config", nargs="?", help="JSON config file (defaults to the full grid)")
    p.add_argument("--output-dir")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="emit regression tables from a ledger")
    p.add_argument("ledger", help="ledger.jsonl or its directory")
    p.add_argument("--model", choices=[*harness.FIT_MODELS, "all"], default="all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="emit per-panel plot data from a ledger")
    p.add_argument("ledger")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify", help="run the oracle self-checks")
    p.add_argument("--skip-allen-cahn", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("single-run", help="train one cell and print its record")
    p.add_argument("pde")
    p.add_argument("--kappa", type=float)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--activation", default="tanh")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--learning-rate", type=float, default=TrainConfig.learning_rate)
    p.add_argument("--log-every", type=int, default=0)
    p.add_argument("--output-dir", help="also append the record to this directory's ledger")
    p.set_defaults(func=cmd_single_run)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SlpinnError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
