"""Full-batch Adam training of one sweep cell."""

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import sampling
from .errors import ConfigurationError, NumericOverflowError
from .metrics import evaluate_run
from .network import NetworkParams, as_activation, init_params, loss_terms_and_grad
from .pde import make_problem

# Bump when anything that changes a run's numbers (sampling counts, grids,
# initialisation) changes, so old ledger entries no longer match new cells.
PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 25_000
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    w_pde: float = 1.0
    w_bc: float = 1.0
    w_ic: float = 1.0
    log_every: int = 0  # 0 disables the loss-history file

    def __post_init__(self):
        if int(self.epochs) < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate >= 0:
            raise ConfigurationError(f"learning_rate must be non-negative, got {self.learning_rate}")
        for name in ("beta1", "beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1)")
        if int(self.log_every) < 0:
            raise ConfigurationError("log_every must be >= 0")

    @property
    def weights(self):
        return (self.w_pde, self.w_bc, self.w_ic)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size):
        return cls(np.zeros(size), np.zeros(size), 0)


def adam_step(theta, grad, state, config):
    """One bias-corrected Adam update on flat parameter vectors.

    Returns ``(new_theta, new_state)``; inputs are not modified.
    """
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise NumericOverflowError("grad")
    b1, b2 = config.beta1, config.beta2
    t = state.t + 1
    m = b1 * state.m + (1.0 - b1) * grad
    v = b2 * state.v + (1.0 - b2) * (grad * grad)
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    new_theta = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return new_theta, AdamState(m, v, t)


@dataclass(frozen=True)
class RunRecord:
    pde: str
    activation: str
    width: int
    kappa: object
    seed: int
    config: dict
    status: str  # "ok" | "failed"
    rel_l2_error: object  # float, None when failed
    loss_pde: object
    loss_bc: object
    loss_ic: object
    epochs_run: int
    wall_time: float
    config_hash: str
    fail_epoch: object = None
    last_finite_loss: object = None
    protocol: int = PROTOCOL_VERSION

    @property
    def ok(self):
        return self.status == "ok"

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def numerics(self):
        """Everything except wall-clock time, which is the one non-reproducible field."""
        d = self.to_dict()
        d.pop("wall_time")
        return d


def cell_hash(pde, activation, width, kappa, seed, config, protocol=PROTOCOL_VERSION):
    """Stable key of a sweep cell: identity plus every numeric training setting."""
    cfg = asdict(config) if isinstance(config, TrainConfig) else dict(config)
    cfg.pop("log_every", None)
    payload = {
        "pde": str(getattr(pde, "value", pde)),
        "activation": str(getattr(activation, "value", activation)),
        "width": int(width),
        "kappa": None if kappa is None else float(kappa),
        "seed": int(seed),
        "config": {k: cfg[k] for k in sorted(cfg)},
        "protocol": int(protocol),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def record_hash(record):
    return cell_hash(record.pde, record.activation, record.width, record.kappa, record.seed,
                     record.config, record.protocol)


def _write_history(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("# schema: slpinn-loss-history v1\n")
        fh.write("epoch\tL_pde\tL_bc\tL_ic\ttotal\n")
        for epoch, terms in rows:
            fh.write(f"{epoch}\t{terms['pde']:.17g}\t{terms['bc']:.17g}\t{terms['ic']:.17g}\t{terms['total']:.17g}\n")


def train_run(kind, kappa, width, activation, seed, config=TrainConfig(), history_dir=None,
              cache_dir=None, on_epoch=None):
    """Train one (pde, kappa, width, activation, seed) cell and return its RunRecord.

    ``seed`` is the seed index within the sweep; the actual random streams are
    derived from a hash of the whole cell.  Divergence yields a record with
    ``status="failed"`` instead of raising.
    """
    activation = as_activation(activation)
    problem = make_problem(kind, kappa)
    stream = sampling.RngStream(sampling.run_seed(problem.kind, activation, width, problem.kappa, seed))
    colloc = sampling.make_collocation(problem, stream)
    params = init_params(width, problem.input_dim, activation, stream.substream_seed("init"))
    d = problem.input_dim
    theta = params.to_vector()
    state = AdamState.zeros(theta.size)
    key = cell_hash(problem.kind, activation, width, problem.kappa, seed, config)
    history = []
    last_total = None
    fail_epoch = None

    start = time.perf_counter()
    for epoch in range(int(config.epochs)):
        try:
            terms, grad = loss_terms_and_grad(NetworkParams.from_vector(theta, width, d), activation,
                                              problem, colloc, config.weights)
            theta, state = adam_step(theta, grad.to_vector(), state, config)
        except NumericOverflowError:
            fail_epoch = epoch
            break
        if not np.all(np.isfinite(theta)):
            fail_epoch = epoch
            break
        last_total = terms["total"]
        if config.log_every and epoch % config.log_every == 0:
            history.append((epoch, terms))
        if on_epoch is not None:
            on_epoch(epoch, terms)

    final = NetworkParams.from_vector(theta, width, d)
    err = None
    final_terms = None
    if fail_epoch is None:
        try:
            final_terms, _ = loss_terms_and_grad(final, activation, problem, colloc, config.weights)
            err = evaluate_run(final, activation, problem, cache_dir)
        except NumericOverflowError:
            fail_epoch = int(config.epochs)
        if err is not None and not np.isfinite(err):
            fail_epoch = int(config.epochs)
    wall = time.perf_counter() - start

    if history_dir is not None and history:
        _write_history(Path(history_dir) / f"{key}.tsv", history)

    failed = fail_epoch is not None
    return RunRecord(
        pde=problem.kind.value,
        activation=activation.value,
        width=int(width),
        kappa=problem.kappa,
        seed=int(seed),
        config=asdict(config),
        status="failed" if failed else "ok",
        rel_l2_error=None if failed else err,
        loss_pde=None if failed else final_terms["pde"],
        loss_bc=None if failed else final_terms["bc"],
        loss_ic=None if failed else final_terms["ic"],
        epochs_run=int(config.epochs) if not failed else int(fail_epoch),
        wall_time=wall,
        config_hash=key,
        fail_epoch=fail_epoch,
        last_finite_loss=last_total,
    )
