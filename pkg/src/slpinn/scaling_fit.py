"""Power-law regressions on the run ledger, with classical OLS inference.

Three models, all in natural logs:

* univariate, per hardness:  log err = log A - alpha log N  (seed-averaged errors)
* separable:                 log err = log A - alpha log N + gamma log kappa
* interaction:               log err = b0 + bN log N + bk log kappa + nu log N log kappa
"""

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .errors import InsufficientDataError, SingularDesignError

ERROR_FLOOR = 1e-16
CI_LEVEL = 0.95


# -- Student t ---------------------------------------------------------------

def t_two_sided_p(t, df):
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom.

    P(|T| >= t) = I_x(df/2, 1/2) with x = df/(df + t^2).  Near t = 0, x
    rounds towards 1, so there the complement 1 - I_y(1/2, df/2) with
    y = t^2/(df + t^2) is evaluated instead.
    """
    t = np.asarray(t, dtype=float)
    a = 0.5 * np.asarray(df, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t2 = t * t
        x = np.where(np.isinf(t), 0.0, 2 * a / (2 * a + t2))
        y = np.where(np.isinf(t), 1.0, t2 / (2 * a + t2))
    p = np.where(y < 0.5, special.betaincc(0.5, a, y), special.betainc(a, 0.5, x))
    return np.clip(p, 0.0, 1.0)


def t_cdf(t, df):
    t = np.asarray(t, dtype=float)
    a = 0.5 * np.asarray(df, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        t2 = t * t
        y = np.where(np.isinf(t), 1.0, t2 / (2 * a + t2))
        x = np.where(np.isinf(t), 0.0, 2 * a / (2 * a + t2))
    central = 0.5 * special.betainc(0.5, a, y)  # P(0 <= T <= |t|)
    tail = 0.5 * special.betainc(a, 0.5, x)  # P(T >= |t|)
    upper = np.where(y < 0.5, 0.5 + central, 1.0 - tail)
    lower = np.where(y < 0.5, 0.5 - central, tail)
    return np.where(t >= 0, upper, lower)


def t_quantile(q, df):
    return float(special.stdtrit(df, q))


# -- OLS -----------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    model: str
    names: tuple
    coef: np.ndarray
    stderr: np.ndarray
    ci_half: np.ndarray
    p_values: np.ndarray
    r2: float
    adj_r2: float
    n: int
    df: int
    residual_stderr: float
    meta: dict = field(default_factory=dict)

    def index(self, name):
        return self.names.index(name)

    def __getitem__(self, name):
        return float(self.coef[self.index(name)])

    def ci(self, name):
        return float(self.ci_half[self.index(name)])

    def p(self, name):
        return float(self.p_values[self.index(name)])

    @property
    def alpha(self):
        """Width exponent (minus the log N slope)."""
        return -self["log_N"]

    @property
    def gamma(self):
        return self["log_kappa"]

    @property
    def log_A(self):
        return self["log_A"]

    def to_dict(self):
        return {
            "model": self.model,
            "coefficients": {
                name: {"estimate": float(self.coef[i]), "stderr": float(self.stderr[i]),
                       "ci95_half_width": float(self.ci_half[i]), "p_value": float(self.p_values[i]),
                       "significant_05": bool(self.p_values[i] < 0.05)}
                for i, name in enumerate(self.names)
            },
            "r2": self.r2,
            "adj_r2": self.adj_r2,
            "n": self.n,
            "df": self.df,
            "residual_stderr": self.residual_stderr,
            "meta": self.meta,
        }


def ols_fit(X, y, names=None, model="ols", meta=None):
    """Least squares via QR with t-based standard errors, CIs and p-values."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
    n, k = X.shape
    if n <= k:
        raise InsufficientDataError(f"need more than {k} observations, got {n}")
    if np.linalg.matrix_rank(X) < k:
        raise SingularDesignError("design matrix is rank deficient")
    Q, R = np.linalg.qr(X)
    coef = linalg.solve_triangular(R, Q.T @ y)
    resid = y - X @ coef
    ssr = float(resid @ resid)
    df = n - k
    sigma2 = ssr / df
    Rinv = linalg.solve_triangular(R, np.eye(k))
    stderr = np.sqrt(sigma2 * np.sum(Rinv * Rinv, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = coef / stderr
    # 0/0 (exact zero coefficient with exact fit) carries no evidence against zero
    tstat = np.where(np.isnan(tstat), 0.0, tstat)
    p_values = t_two_sided_p(tstat, df)
    ci_half = t_quantile(0.5 + CI_LEVEL / 2, df) * stderr
    centered = y - y.mean()
    sst = float(centered @ centered)
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / (n - k)
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(k))
    return FitResult(model=model, names=names, coef=coef, stderr=stderr, ci_half=ci_half,
                     p_values=p_values, r2=r2, adj_r2=adj_r2, n=n, df=df,
                     residual_stderr=float(np.sqrt(sigma2)), meta=dict(meta or {}))


def significance_stars(p, include_05=False):
    """'***' for p < 0.001, '**' for p < 0.01, else ''.

    ``include_05`` adds a single '*' for p < 0.05, a level the standard
    tables omit.
    """
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if include_05 and p < 0.05:
        return "*"
    return ""


# -- ledger views ----------------------------------------------------------------

def _field(rec, name):
    return rec[name] if isinstance(rec, dict) else getattr(rec, name)


def successful(ledger, kind=None, activation=None):
    out = []
    for rec in ledger:
        if _field(rec, "status") != "ok":
            continue
        if kind is not None and _field(rec, "pde") != str(getattr(kind, "value", kind)):
            continue
        if activation is not None and _field(rec, "activation") != str(getattr(activation, "value", activation)):
            continue
        out.append(rec)
    return out


def _log_error(err):
    return np.log(np.maximum(np.asarray(err, dtype=float), ERROR_FLOOR))


def _same_kappa(a, b):
    if a is None or b is None:
        return a is b
    return np.isclose(float(a), float(b), rtol=1e-12, atol=0)


def mean_error_by_width(records):
    groups = defaultdict(list)
    for rec in records:
        groups[int(_field(rec, "width"))].append(float(_field(rec, "rel_l2_error")))
    return {w: groups[w] for w in sorted(groups)}


def fit_univariate_alpha(ledger, kind, activation, kappa=None):
    recs = [r for r in successful(ledger, kind, activation) if _same_kappa(_field(r, "kappa"), kappa)]
    by_width = mean_error_by_width(recs)
    if len(by_width) < 3:
        raise InsufficientDataError(
            f"univariate fit for {kind}/{activation}/kappa={kappa} needs >= 3 widths, has {len(by_width)}",
            missing=[(str(getattr(kind, "value", kind)), str(getattr(activation, "value", activation)), kappa)])
    widths = np.array(list(by_width), dtype=float)
    means = np.array([np.mean(v) for v in by_width.values()])
    X = np.column_stack([np.ones_like(widths), np.log(widths)])
    return ols_fit(X, _log_error(means), names=("log_A", "log_N"), model="univariate",
                   meta={"kappa": kappa, "widths": widths.tolist(),
                         "seeds_per_width": [len(v) for v in by_width.values()]})


def _multivariate_data(ledger, kind, activation, aggregate):
    recs = successful(ledger, kind, activation)
    if aggregate == "run":
        N = np.array([_field(r, "width") for r in recs], dtype=float)
        K = np.array([np.nan if _field(r, "kappa") is None else _field(r, "kappa") for r in recs], dtype=float)
        err = np.array([_field(r, "rel_l2_error") for r in recs], dtype=float)
    elif aggregate == "seed_mean":
        groups = defaultdict(list)
        for r in recs:
            groups[(int(_field(r, "width")), float(_field(r, "kappa")))].append(float(_field(r, "rel_l2_error")))
        keys = sorted(groups)
        N = np.array([k[0] for k in keys], dtype=float)
        K = np.array([k[1] for k in keys], dtype=float)
        err = np.array([np.mean(groups[k]) for k in keys])
    else:
        raise ValueError(f"aggregate must be 'run' or 'seed_mean', got {aggregate!r}")
    if np.any(np.isnan(K)):
        raise InsufficientDataError(f"{kind} has no hardness parameter")
    n_widths = len(np.unique(N))
    n_kappas = len(np.unique(K))
    if n_widths < 2 or n_kappas < 2:
        raise InsufficientDataError(
            f"{kind}/{activation}: need >= 2 widths and >= 2 kappas, have {n_widths} and {n_kappas}",
            missing=[(str(getattr(kind, "value", kind)), str(getattr(activation, "value", activation)))])
    return np.log(N), np.log(K), _log_error(err)


def fit_separable(ledger, kind, activation, aggregate="run"):
    logN, logK, y = _multivariate_data(ledger, kind, activation, aggregate)
    X = np.column_stack([np.ones_like(logN), logN, logK])
    return ols_fit(X, y, names=("log_A", "log_N", "log_kappa"), model="separable",
                   meta={"aggregate": aggregate})


def fit_interaction(ledger, kind, activation, aggregate="run"):
    logN, logK, y = _multivariate_data(ledger, kind, activation, aggregate)
    X = np.column_stack([np.ones_like(logN), logN, logK, logN * logK])
    fit = ols_fit(X, y, names=("beta_0", "beta_N", "beta_kappa", "nu"), model="interaction",
                  meta={"aggregate": aggregate})
    fit.meta["nu_significant_05"] = bool(fit.p("nu") < 0.05)
    return fit


# -- tables ------------------------------------------------------------------------

PDE_ORDER = ("poisson", "kdv", "sine_gordon", "allen_cahn")
ACTIVATIONS = ("relu", "tanh")

TAB_SEPARABLE_COLUMNS = ("pde", "activation", "alpha", "alpha_ci95", "alpha_stars",
                         "gamma", "gamma_ci95", "gamma_stars", "log_A", "adj_r2")
TAB_UNIVARIATE_COLUMNS = ("pde", "kappa", "relu_alpha", "relu_ci95", "tanh_alpha", "tanh_ci95")
TAB_INTERACTION_COLUMNS = ("pde", "activation", "beta_0", "beta_0_stars", "beta_N", "beta_N_stars",
                           "beta_kappa", "beta_kappa_stars", "nu", "nu_stars", "adj_r2")


def _present(ledger):
    kinds, acts = set(), set()
    for r in successful(ledger):
        kinds.add(_field(r, "pde"))
        acts.add(_field(r, "activation"))
    return [k for k in PDE_ORDER if k in kinds], [a for a in ACTIVATIONS if a in acts]


def separable_table(ledger):
    """Rows mirroring the separable-law table; returns (rows, fits, missing)."""
    kinds, acts = _present(ledger)
    rows, fits, missing = [], {}, []
    for kind in kinds:
        if kind == "poisson":
            continue
        for act in acts:
            if not successful(ledger, kind, act):
                continue
            try:
                fit = fit_separable(ledger, kind, act)
            except (InsufficientDataError, SingularDesignError) as exc:
                missing.append(f"{kind}/{act}: {exc}")
                continue
            fits[(kind, act)] = fit
            rows.append({
                "pde": kind, "activation": act,
                "alpha": fit.alpha, "alpha_ci95": fit.ci("log_N"),
                "alpha_stars": significance_stars(fit.p("log_N")),
                "gamma": fit.gamma, "gamma_ci95": fit.ci("log_kappa"),
                "gamma_stars": significance_stars(fit.p("log_kappa")),
                "log_A": fit.log_A, "adj_r2": fit.adj_r2,
            })
    return rows, fits, missing


def univariate_table(ledger):
    """Rows mirroring the per-hardness width-exponent table."""
    kinds, acts = _present(ledger)
    rows, fits, missing = [], {}, []
    for kind in kinds:
        kappas = sorted({_field(r, "kappa") for r in successful(ledger, kind)},
                        key=lambda k: -np.inf if k is None else k)
        for kappa in kappas:
            row = {"pde": kind, "kappa": kappa}
            for act in ACTIVATIONS:
                row[f"{act}_alpha"] = None
                row[f"{act}_ci95"] = None
                if act not in acts:
                    continue
                try:
                    fit = fit_univariate_alpha(ledger, kind, act, kappa)
                except (InsufficientDataError, SingularDesignError) as exc:
                    if successful(ledger, kind, act):
                        missing.append(f"{kind}/{act}/kappa={kappa}: {exc}")
                    continue
                fits[(kind, act, kappa)] = fit
                row[f"{act}_alpha"] = fit.alpha
                row[f"{act}_ci95"] = fit.ci("log_N")
            rows.append(row)
    return rows, fits, missing


def interaction_table(ledger):
    kinds, acts = _present(ledger)
    rows, fits, missing = [], {}, []
    for kind in kinds:
        if kind == "poisson":
            continue
        for act in acts:
            if not successful(ledger, kind, act):
                continue
            try:
                fit = fit_interaction(ledger, kind, act)
            except (InsufficientDataError, SingularDesignError) as exc:
                missing.append(f"{kind}/{act}: {exc}")
                continue
            fits[(kind, act)] = fit
            row = {"pde": kind, "activation": act}
            for name in ("beta_0", "beta_N", "beta_kappa", "nu"):
                row[name] = fit[name]
                row[f"{name}_stars"] = significance_stars(fit.p(name))
            row["adj_r2"] = fit.adj_r2
            rows.append(row)
    return rows, fits, missing
