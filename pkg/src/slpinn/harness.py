"""Sweep orchestration, the append-only run ledger, and table/report output.

Output layout under ``output_dir``::

    ledger.jsonl        header line, then one RunRecord per line (append-only)
    ledger.csv          flat mirror of the same records
    reference/          cached Allen-Cahn reference fields (.npz)
    history/            optional per-run loss histories
    fits/               tab1_separable / tab3_univariate / tab4_interaction (.tsv + .json)
    report/             per-panel plot data (.tsv) and report_meta.json

Every text file starts with a ``# schema: <name> v<version>`` line.
"""

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import scaling_fit as sf
from .errors import ConfigurationError, InsufficientDataError
from .network import as_activation
from .pde import PdeKind, as_kind, kappa_grid
from .trainer import RunRecord, TrainConfig, cell_hash, train_run

log = logging.getLogger(__name__)

LEDGER_SCHEMA = "slpinn-ledger"
LEDGER_VERSION = 1
TABLE_VERSION = 1
OUTPUT_ENV = "SLPINN_OUTPUT_DIR"

DEFAULT_WIDTHS = (16, 32, 64, 128, 256, 512, 1024)
# reference decay rates drawn on the Poisson error-vs-width panel
REFERENCE_EXPONENTS = {"barron_rate": 0.5, "first_order_rate": 1.0}

CONFIG_KEYS = ("pdes", "widths", "kappas", "activations", "seeds", "epochs", "learning_rate",
               "weights", "output_dir", "workers", "log_every")


@dataclass(frozen=True)
class Cell:
    pde: str
    activation: str
    width: int
    kappa: object
    seed: int


@dataclass
class SweepConfig:
    pdes: tuple = tuple(k.value for k in PdeKind)
    widths: tuple = DEFAULT_WIDTHS
    kappas: dict = field(default_factory=dict)  # kind -> list; missing kinds use kappa_grid
    activations: tuple = ("tanh", "relu")
    seeds: int = 5
    train: TrainConfig = field(default_factory=TrainConfig)
    output_dir: str = "runs"
    workers: int = 1

    def __post_init__(self):
        self.pdes = tuple(as_kind(k).value for k in self.pdes)
        self.activations = tuple(as_activation(a).value for a in self.activations)
        self.widths = tuple(int(w) for w in self.widths)
        if any(w < 1 for w in self.widths) or not self.widths:
            raise ConfigurationError("widths must be a non-empty list of positive integers")
        if int(self.seeds) < 1:
            raise ConfigurationError("seeds must be >= 1")
        if int(self.workers) < 1:
            raise ConfigurationError("workers must be >= 1")
        env = os.environ.get(OUTPUT_ENV)
        if env:
            self.output_dir = env

    def kappas_for(self, kind):
        if kind == PdeKind.POISSON.value:
            return [None]
        values = self.kappas.get(kind, kappa_grid(kind))
        return [float(k) for k in values]

    def cells(self):
        out = []
        for kind in self.pdes:
            for act in self.activations:
                for kappa in self.kappas_for(kind):
                    for width in self.widths:
                        for seed in range(int(self.seeds)):
                            out.append(Cell(kind, act, width, kappa, seed))
        return out

    def cell_key(self, cell):
        return cell_hash(cell.pde, cell.activation, cell.width, cell.kappa, cell.seed, self.train)

    @classmethod
    def from_dict(cls, raw):
        unknown = sorted(set(raw) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigurationError(f"unknown config key(s): {', '.join(unknown)}")
        kw = {}
        train_kw = {}
        try:
            if "pdes" in raw:
                kw["pdes"] = tuple(raw["pdes"])
            if "widths" in raw:
                kw["widths"] = tuple(raw["widths"])
            if "activations" in raw:
                kw["activations"] = tuple(raw["activations"])
            if "seeds" in raw:
                kw["seeds"] = int(raw["seeds"])
            if "workers" in raw:
                kw["workers"] = int(raw["workers"])
            if "output_dir" in raw:
                kw["output_dir"] = str(raw["output_dir"])
            if "kappas" in raw:
                kappas = raw["kappas"]
                if isinstance(kappas, dict):
                    kw["kappas"] = {as_kind(k).value: [float(x) for x in v] for k, v in kappas.items()}
                else:
                    values = [float(x) for x in kappas]
                    kw["kappas"] = {k.value: values for k in PdeKind if k is not PdeKind.POISSON}
            if "epochs" in raw:
                train_kw["epochs"] = int(raw["epochs"])
            if "learning_rate" in raw:
                train_kw["learning_rate"] = float(raw["learning_rate"])
            if "log_every" in raw:
                train_kw["log_every"] = int(raw["log_every"])
            if "weights" in raw:
                w = raw["weights"]
                if isinstance(w, dict):
                    train_kw.update({f"w_{k}": float(v) for k, v in w.items() if k in ("pde", "bc", "ic")})
                    bad = set(w) - {"pde", "bc", "ic"}
                    if bad:
                        raise ConfigurationError(f"weights: unknown term(s) {sorted(bad)}")
                else:
                    train_kw["w_pde"], train_kw["w_bc"], train_kw["w_ic"] = (float(x) for x in w)
        except ConfigurationError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed config value: {exc}") from None
        if train_kw:
            kw["train"] = TrainConfig(**train_kw)
        return cls(**kw)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: not valid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{path}: top level must be an object")
        return cls.from_dict(raw)


# -- ledger ----------------------------------------------------------------------

CSV_COLUMNS = ("config_hash", "pde", "activation", "width", "kappa", "seed", "status", "rel_l2_error",
               "loss_pde", "loss_bc", "loss_ic", "epochs_run", "wall_time", "fail_epoch",
               "last_finite_loss", "epochs", "learning_rate", "protocol")


class Ledger:
    """Append-only record store; one writer, any number of snapshot readers."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.path = self.directory / "ledger.jsonl"
        self.csv_path = self.directory / "ledger.csv"

    @classmethod
    def open(cls, path):
        path = Path(path)
        return cls(path.parent if path.suffix == ".jsonl" else path)

    def _ensure(self):
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigurationError(f"cannot create output directory {self.directory}: {exc}") from None
        if not os.access(self.directory, os.W_OK):
            raise ConfigurationError(f"output directory {self.directory} is not writable")
        if not self.path.exists():
            with open(self.path, "w") as fh:
                fh.write(json.dumps({"schema": LEDGER_SCHEMA, "version": LEDGER_VERSION}) + "\n")
        if not self.csv_path.exists():
            with open(self.csv_path, "w", newline="") as fh:
                fh.write(f"# schema: {LEDGER_SCHEMA} v{LEDGER_VERSION}\n")
                csv.writer(fh).writerow(CSV_COLUMNS)

    def records(self):
        if not self.path.exists():
            return []
        out = []
        with open(self.path) as fh:
            header = json.loads(fh.readline() or "{}")
            if header.get("schema") != LEDGER_SCHEMA or header.get("version") != LEDGER_VERSION:
                raise ConfigurationError(f"{self.path}: unrecognised ledger header {header}")
            for line in fh:
                line = line.strip()
                if line:
                    out.append(RunRecord.from_dict(json.loads(line)))
        return out

    def keys(self):
        return {r.config_hash for r in self.records()}

    def append(self, record):
        self._ensure()
        with open(self.path, "a") as fh:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        row = record.to_dict()
        row["epochs"] = record.config["epochs"]
        row["learning_rate"] = record.config["learning_rate"]
        with open(self.csv_path, "a", newline="") as fh:
            csv.writer(fh).writerow(["" if row[c] is None else row[c] for c in CSV_COLUMNS])


# -- sweep -------------------------------------------------------------------------

@dataclass
class SweepResult:
    executed: int = 0
    skipped: int = 0
    failed: int = 0
    records: list = field(default_factory=list)


def _run_cell(cell, train, output_dir):
    out = Path(output_dir)
    history = out / "history" if train.log_every else None
    return train_run(cell.pde, cell.kappa, cell.width, cell.activation, cell.seed, train,
                     history_dir=history, cache_dir=out / "reference")


def run_sweep(config, progress=None):
    """Run every cell of ``config`` that is not already in the ledger."""
    ledger = Ledger(config.output_dir)
    ledger._ensure()
    done = ledger.keys()
    todo = [c for c in config.cells() if config.cell_key(c) not in done]
    result = SweepResult(skipped=len(config.cells()) - len(todo))
    log.info("sweep: %d cells, %d already in ledger", len(todo) + result.skipped, result.skipped)

    def accept(rec):
        ledger.append(rec)
        result.executed += 1
        result.records.append(rec)
        if not rec.ok:
            result.failed += 1
        if progress is not None:
            progress(rec, result)

    if config.workers == 1 or len(todo) <= 1:
        for cell in todo:
            accept(_run_cell(cell, config.train, config.output_dir))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_run_cell, cell, config.train, config.output_dir) for cell in todo]
            for fut in as_completed(futures):
                accept(fut.result())
    return result


# -- table files -----------------------------------------------------------------

def _fmt(value):
    if value is None:
        return "NA"
    if isinstance(value, str):
        return value
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return "NA"
        return f"{value:.4f}"
    return str(value)


def write_table(path, name, columns, rows, extra=None):
    """Write ``rows`` as TSV plus a JSON twin next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# schema: slpinn-{name} v{TABLE_VERSION}\n")
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(row.get(c)) for c in columns) + "\n")
    payload = {"schema": f"slpinn-{name}", "version": TABLE_VERSION, "columns": list(columns),
               "rows": [{c: row.get(c) for c in columns} for row in rows]}
    if extra:
        payload.update(extra)
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj))


FIT_MODELS = {
    "separable": ("tab1_separable", sf.TAB_SEPARABLE_COLUMNS, sf.separable_table),
    "univariate": ("tab3_univariate", sf.TAB_UNIVARIATE_COLUMNS, sf.univariate_table),
    "interaction": ("tab4_interaction", sf.TAB_INTERACTION_COLUMNS, sf.interaction_table),
}


def fit_tables(records, model, out_dir):
    """Emit the table for ``model``; raises InsufficientDataError when nothing fits."""
    if model not in FIT_MODELS:
        raise ConfigurationError(f"unknown model {model!r}; choose from {sorted(FIT_MODELS)}")
    name, columns, builder = FIT_MODELS[model]
    rows, fits, missing = builder(records)
    if not rows or all(all(row.get(c) is None for c in columns[2:]) for row in rows):
        raise InsufficientDataError(f"no {model} fit possible", missing=missing)
    extra = {"fits": [{"key": [None if k is None else k for k in key], **fit.to_dict()}
                      for key, fit in fits.items()],
             "missing": missing,
             "significance": {"***": "p < 0.001", "**": "p < 0.01"}}
    path = write_table(Path(out_dir) / f"{name}.tsv", name, columns, rows, extra)
    return path, missing


# -- report panels ------------------------------------------------------------------

def _seed_stats(errors):
    errors = np.asarray(errors, dtype=float)
    mean = float(errors.mean())
    stderr = float(errors.std(ddof=1) / np.sqrt(errors.size)) if errors.size > 1 else None
    return mean, stderr


def _median_kappa(kappas):
    # same rule as pde.median_kappa, applied to the hardness values actually present
    kappas = sorted(kappas)
    return kappas[len(kappas) // 2]


def report_panels(records, out_dir):
    """Write per-(pde, activation) panel files; return the list of paths."""
    out_dir = Path(out_dir)
    ok = sf.successful(records)
    if not records:
        raise InsufficientDataError("ledger is empty")
    paths = []
    meta = {"schema": "slpinn-report-meta", "version": TABLE_VERSION,
            "reference_exponents": REFERENCE_EXPONENTS, "panels": []}
    groups = sorted({(r.pde, r.activation) for r in ok})
    for kind, act in groups:
        recs = [r for r in ok if r.pde == kind and r.activation == act]
        kappas = sorted({r.kappa for r in recs}, key=lambda k: -np.inf if k is None else k)

        # (a) width exponent vs hardness
        rows = []
        for kappa in kappas:
            try:
                fit = sf.fit_univariate_alpha(recs, kind, act, kappa)
                rows.append({"kappa": kappa, "alpha": fit.alpha, "alpha_ci95": fit.ci("log_N"),
                             "n_widths": len(fit.meta["widths"])})
            except sf.InsufficientDataError:
                rows.append({"kappa": kappa, "alpha": None, "alpha_ci95": None, "n_widths": None})
        p = write_table(out_dir / f"{kind}_{act}_a_alpha_vs_kappa.tsv", "panel-alpha-vs-kappa",
                        ("kappa", "alpha", "alpha_ci95", "n_widths"), rows)
        paths.append(p)

        # (b) error vs hardness, one series per width
        rows = []
        for width in sorted({r.width for r in recs}):
            for kappa in kappas:
                errs = [r.rel_l2_error for r in recs if r.width == width and r.kappa == kappa]
                if errs:
                    mean, se = _seed_stats(errs)
                    rows.append({"width": width, "kappa": kappa, "mean_error": mean,
                                 "stderr": se, "n_seeds": len(errs)})
        p = write_table(out_dir / f"{kind}_{act}_b_error_vs_kappa.tsv", "panel-error-vs-kappa",
                        ("width", "kappa", "mean_error", "stderr", "n_seeds"), rows)
        paths.append(p)

        # (c) error vs width at the median hardness
        kappa_c = None if kappas == [None] else _median_kappa([k for k in kappas if k is not None])
        rows = []
        for width in sorted({r.width for r in recs}):
            errs = [r.rel_l2_error for r in recs if r.width == width and r.kappa == kappa_c]
            if errs:
                mean, se = _seed_stats(errs)
                rows.append({"width": width, "mean_error": mean, "stderr": se, "n_seeds": len(errs)})
        suffix = "" if kappa_c is None else f"_kappa{kappa_c:g}"
        p = write_table(out_dir / f"{kind}_{act}_c_error_vs_width{suffix}.tsv", "panel-error-vs-width",
                        ("width", "mean_error", "stderr", "n_seeds"), rows)
        paths.append(p)
        meta["panels"].append({"pde": kind, "activation": act, "median_kappa": kappa_c})
    with open(out_dir / "report_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    paths.append(out_dir / "report_meta.json")
    return paths
