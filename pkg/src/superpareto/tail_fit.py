"""Parameter estimation for heavy-tailed productivity samples.

* :func:`fit_gb2_mle` -- four-parameter GB2 maximum likelihood (optionally
  weighted, optionally on a truncation window),
* :func:`hill_estimator` -- order-statistics tail index, used as an
  independent cross-check of the fitted Pareto index,
* :func:`apply_cuts` -- outlier removal before fitting.

:class:`GB2Estimator` and :class:`HillEstimator` wrap the first two in the
scikit-learn estimator protocol.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import betaln
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils.validation import check_is_fitted

from ._special import betainc_reg
from ._validation import check_sample
from .exceptions import CutWarning, DegenerateTailError, DomainError, InsufficientDataError
from .gb2 import Gb2Params, gb2_logpdf, gb2_sample
from .records import Panel, as_panel

__all__ = [
    "MIN_FIT_SAMPLES",
    "FitResult",
    "CutPolicy",
    "fit_gb2_mle",
    "gb2_log_likelihood",
    "hill_estimator",
    "default_hill_k",
    "apply_cuts",
    "GB2Estimator",
    "HillEstimator",
]

MIN_FIT_SAMPLES = 50
N_STARTS = 8
_LOG_BOUND = 12.0  # |log parameter| beyond this counts as a runaway fit
_RUNAWAY = 1e300


@dataclass(frozen=True)
class FitResult:
    """Outcome of a GB2 maximum-likelihood fit.

    ``params`` is ``None`` only for degenerate input.  ``se`` holds the
    observed-information standard errors of ``(mu, nu, q, c1)``.
    """

    params: Gb2Params | None
    log_likelihood: float
    n_used: int
    converged: bool
    se_mu: float
    se: tuple = (math.nan,) * 4
    n_starts: int = 0
    message: str = ""

    @property
    def mu(self):
        return math.nan if self.params is None else self.params.mu


@dataclass(frozen=True)
class CutPolicy:
    """Outlier cut applied to one year of records before fitting."""

    mode: str = "top_k"
    k: int = 10
    c_max: float = 1e9

    def __post_init__(self):
        if self.mode not in ("top_k", "threshold", "none"):
            raise ValueError(f"unknown cut mode {self.mode!r}")
        if self.mode == "top_k" and self.k < 1:
            raise ValueError("top_k cut needs k >= 1")
        if self.mode == "threshold" and not self.c_max > 0:
            raise ValueError("threshold cut needs c_max > 0")

    @classmethod
    def parse(cls, text):
        """Parse the command-line forms ``top10``, ``threshold=1e9`` and ``none``."""
        text = text.strip().lower()
        if text == "none":
            return cls(mode="none")
        if text.startswith("top"):
            return cls(mode="top_k", k=int(text[3:] or 10))
        if text.startswith("threshold="):
            return cls(mode="threshold", c_max=float(text.split("=", 1)[1]))
        raise ValueError(f"cannot parse cut policy {text!r}")

    def __str__(self):
        if self.mode == "top_k":
            return f"top{self.k}"
        if self.mode == "threshold":
            return f"threshold={self.c_max:.6g}"
        return "none"


# --------------------------------------------------------------------------
# Hill estimator
# --------------------------------------------------------------------------

def default_hill_k(n):
    return max(1, int(math.isqrt(int(n))))


def hill_estimator(samples, k, weights=None):
    """Hill tail index ``k / sum_{i<=k} ln(X_(i) / X_(k+1))``.

    With ``weights`` each value counts as that many observations, so the
    result equals the estimate on the expanded sample without building it.
    """
    x, w = check_sample(samples, weights, min_samples=2)
    if w is None:
        n = len(x)
        k = int(k)
        if not 1 <= k < n:
            raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
        top = np.sort(x)[::-1][: k + 1]
        logs = np.log(top)
        denom = float(np.sum(logs[:k] - logs[k]))
    else:
        order = np.argsort(-x, kind="stable")
        xs, ws = x[order], w[order]
        cum = np.cumsum(ws)
        n = cum[-1]
        if not 1 <= k < n:
            raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
        logs = np.log(xs)
        # values strictly inside the top k, then a partial share of the boundary value
        i = int(np.searchsorted(cum, k, side="left"))
        before = cum[i - 1] if i > 0 else 0.0
        top_sum = float(np.dot(ws[:i], logs[:i]) + (k - before) * logs[i])
        j = int(np.searchsorted(cum, k + 1, side="left"))
        denom = top_sum - k * logs[j]
    if not denom > 0:
        raise DegenerateTailError("top order statistics are all equal; tail index undefined")
    return float(k / denom)


# --------------------------------------------------------------------------
# GB2 maximum likelihood
# --------------------------------------------------------------------------

class _Objective:
    """Mean negative log-likelihood in log-parameter space.

    The scale is measured relative to ``ref`` (the sample median) so all
    four coordinates are of order one.
    """

    def __init__(self, x, w, window=None):
        self.ref = float(np.exp(np.median(np.log(x))))
        self.lx = np.log(x)
        self.lr = self.lx - np.log(self.ref)
        self.w = np.ones_like(x) if w is None else w
        self.wsum = float(self.w.sum())
        self.window = window

    def params(self, theta):
        mu, nu, q, s = np.exp(theta)
        return Gb2Params(mu, nu, q, s * self.ref)

    def total(self, theta):
        """Weighted log-likelihood (sum over observations)."""
        if np.any(np.abs(theta) > _LOG_BOUND) or not np.all(np.isfinite(theta)):
            return -_RUNAWAY
        mu, nu, q = np.exp(theta[:3])
        ls = theta[3]
        a, b = mu / q, nu / q
        u = self.lr - ls
        lp = (math.log(q) - betaln(a, b) - self.lx + nu * u
              - (mu + nu) / q * np.logaddexp(0.0, q * u))
        val = float(np.dot(self.w, lp))
        if self.window is not None:
            lo, hi = self.window
            mass = self._mass(theta, lo, hi)
            if not mass > 0:
                return -_RUNAWAY
            val -= self.wsum * math.log(mass)
        return val if np.isfinite(val) else -_RUNAWAY

    def _mass(self, theta, lo, hi):
        mu, nu, q = np.exp(theta[:3])
        scale = math.exp(theta[3]) * self.ref

        def upper(c):
            if c <= 0:
                return 1.0
            if not np.isfinite(c):
                return 0.0
            t = q * (math.log(c) - math.log(scale))
            z = math.exp(-np.logaddexp(0.0, t))
            zc = math.exp(t - np.logaddexp(0.0, t))
            return betainc_reg(mu / q, nu / q, z, zc)

        return upper(lo) - upper(hi)

    def __call__(self, theta):
        return -self.total(theta) / self.wsum


def gb2_log_likelihood(params, samples, weights=None):
    """Weighted GB2 log-likelihood of ``samples`` at fixed ``params``."""
    x, w = check_sample(samples, weights)
    lp = gb2_logpdf(params, x)
    return float(np.sum(lp) if w is None else np.dot(w, lp))


def _weighted_quantile(x, w, p):
    order = np.argsort(x)
    cum = np.cumsum(w[order])
    return float(x[order][np.searchsorted(cum, p * cum[-1])])


def _lower_tail_index(x, w, k):
    # mirror image of the Hill estimator on the smallest k values
    return hill_estimator(1.0 / x, k, w)


def _initial_guess(x, w):
    wt = np.ones_like(x) if w is None else w
    c1 = _weighted_quantile(x, wt, 0.5)
    m = len(x)
    k_distinct = default_hill_k(m)
    if w is None:
        k_mu = k_nu = k_distinct
    else:
        k_mu = float(w[np.argsort(-x)][:k_distinct].sum())
        k_nu = float(w[np.argsort(x)][:k_distinct].sum())
    try:
        mu = hill_estimator(x, min(k_mu, wt.sum() - 1), w)
    except (DegenerateTailError, ValueError):
        mu = 2.0
    try:
        nu = _lower_tail_index(x, w, min(k_nu, wt.sum() - 1))
    except (DegenerateTailError, ValueError):
        nu = 1.0
    mu = float(np.clip(mu, 0.1, 20.0))
    nu = float(np.clip(nu, 0.1, 20.0))
    return np.array([mu, nu, 1.0, c1])


# multiplicative perturbations of (mu, nu, q, c1) for the multi-start search
_START_FACTORS = (
    (1.0, 1.0, 1.0, 1.0),
    (1.0, 1.0, 0.5, 1.0),
    (1.0, 1.0, 2.0, 1.0),
    (0.7, 0.7, 1.0, 0.5),
    (1.4, 1.4, 1.0, 2.0),
    (1.0, 2.0, 0.5, 1.0),
    (2.0, 1.0, 2.0, 1.0),
    (0.6, 1.5, 3.0, 1.5),
)


def _hessian(f, theta, h=1e-4):
    d = len(theta)
    H = np.empty((d, d))
    f0 = f(theta)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        H[i, i] = (f(theta + ei) - 2 * f0 + f(theta - ei)) / h**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            H[i, j] = H[j, i] = (
                f(theta + ei + ej) - f(theta + ei - ej) - f(theta - ei + ej) + f(theta - ei - ej)
            ) / (4 * h**2)
    return H


def fit_gb2_mle(samples, weights=None, *, n_starts=N_STARTS, window=None, tol=1e-10,
                min_samples=MIN_FIT_SAMPLES):
    """Maximum-likelihood GB2 fit.

    Multi-start Nelder-Mead in log-parameters, then a BFGS polish of the
    best start with finite-difference gradients.  ``weights`` are frequency
    weights (a value with weight 3 counts as three observations), which is
    how worker-level samples are fitted without replicating them.
    ``window=(lo, hi)`` fits the GB2 truncated to ``lo < c < hi``.

    Never raises on optimizer failure: the result carries
    ``converged=False`` instead.
    """
    x, w = check_sample(samples, weights, min_samples=min_samples)
    if window is not None:
        lo, hi = window
        keep = (x > lo) & (x < hi)
        x = x[keep]
        w = None if w is None else w[keep]
        if len(x) < min_samples:
            raise InsufficientDataError(f"only {len(x)} samples inside the fit window")
    n_used = int(round(w.sum())) if w is not None else len(x)
    if np.ptp(np.log(x)) == 0:
        return FitResult(None, math.nan, n_used, False, math.nan,
                         message="degenerate sample: all values equal")

    obj = _Objective(x, w, window)
    base = _initial_guess(x, w)
    best = None
    for i, factors in enumerate(_START_FACTORS[:n_starts]):
        start = np.log(base * np.array(factors))
        start[3] -= math.log(obj.ref)
        res = minimize(obj, start, method="Nelder-Mead",
                       options={"maxiter": 1500, "xatol": 1e-7, "fatol": 1e-12, "adaptive": True})
        # strict improvement keeps the lowest start index on ties
        if best is None or res.fun < best.fun:
            best = res
    theta = best.x
    f_prev = best.fun
    polished = minimize(obj, theta, method="BFGS", options={"gtol": 1e-9, "maxiter": 500})
    if polished.fun <= f_prev:
        theta = polished.x
    f_final = min(polished.fun, f_prev)
    # one more simplex/polish round if the polish still moved the optimum noticeably
    if abs(f_prev - f_final) > tol * max(1.0, abs(f_final)):
        res = minimize(obj, theta, method="Nelder-Mead",
                       options={"maxiter": 2000, "xatol": 1e-9, "fatol": 1e-14, "adaptive": True})
        pol = minimize(obj, res.x, method="BFGS", options={"gtol": 1e-10, "maxiter": 500})
        cand = min((res, pol), key=lambda r: r.fun)
        if cand.fun <= f_final:
            change = abs(f_final - cand.fun) / max(1.0, abs(cand.fun))
            theta, f_final = cand.x, cand.fun
        else:
            change = 0.0
    else:
        change = abs(f_prev - f_final) / max(1.0, abs(f_final))

    loglik = obj.total(theta)
    runaway = loglik <= -_RUNAWAY or np.any(np.abs(theta) > _LOG_BOUND - 1.0)
    if runaway:
        return FitResult(None, math.nan, n_used, False, math.nan, n_starts=n_starts,
                         message="parameters ran away to the boundary")
    params = obj.params(theta)
    H = _hessian(lambda t: -obj.total(t), theta)
    se = (math.nan,) * 4
    message = "ok"
    hess_ok = False
    try:
        cov = np.linalg.inv(H)
        var = np.diag(cov)
        if np.all(np.isfinite(var)) and np.all(var > 0) and np.all(np.linalg.eigvalsh(H) > 0):
            se = tuple(float(v) for v in params.as_array() * np.sqrt(var))
            hess_ok = True
    except np.linalg.LinAlgError:
        pass
    if not hess_ok:
        message = "observed information not positive definite"
    converged = hess_ok and change < 1e3 * tol and np.isfinite(loglik)
    if hess_ok and not converged:
        message = f"log-likelihood still changing by {change:.2e}"
    return FitResult(params, float(loglik), n_used, bool(converged), se[0] if hess_ok else math.nan,
                     se=se, n_starts=n_starts, message=message)


# --------------------------------------------------------------------------
# outlier cuts
# --------------------------------------------------------------------------

def apply_cuts(records, policy):
    """Remove outliers from one year of records.

    ``top_k`` drops every record of the ``k`` firms with the largest
    productivity (total sales over total employees); among equal values the
    firm appearing later in the input goes first.  ``threshold`` drops
    records with ``c > c_max``.  ``none`` returns the input unchanged.
    """
    if policy.mode == "none":
        return records
    panel = as_panel(records)
    if policy.mode == "threshold":
        return panel[panel.c <= policy.c_max]
    ids = panel.firm_id
    uniq, first, inv = np.unique(ids, return_index=True, return_inverse=True)
    if len(uniq) <= policy.k:
        warnings.warn(f"top-{policy.k} cut removes all {len(uniq)} firms", CutWarning, stacklevel=2)
        return Panel.empty()
    y = np.bincount(inv, weights=panel.sales_yen, minlength=len(uniq))
    l = np.bincount(inv, weights=panel.employees.astype(float), minlength=len(uniq))
    c = y / l
    ranked = np.lexsort((-first, -c))
    drop = np.zeros(len(uniq), dtype=bool)
    drop[ranked[: policy.k]] = True
    return panel[~drop[inv]]


# --------------------------------------------------------------------------
# scikit-learn style estimators
# --------------------------------------------------------------------------

class GB2Estimator(DensityMixin, BaseEstimator):
    """GB2 density estimator.

    Parameters
    ----------
    n_starts : int, default=8
        Number of Nelder-Mead starts around the heuristic initial point.
    fit_window : tuple of float, optional
        Fit the distribution truncated to ``lo < c < hi``.
    tol : float, default=1e-10
        Relative log-likelihood change regarded as converged.

    Attributes
    ----------
    params_ : Gb2Params
    mu_, se_mu_ : float
        Fitted Pareto index and its standard error.
    log_likelihood_ : float
    converged_ : bool
    result_ : FitResult
    """

    def __init__(self, n_starts=N_STARTS, fit_window=None, tol=1e-10):
        self.n_starts = n_starts
        self.fit_window = fit_window
        self.tol = tol

    def fit(self, X, y=None, sample_weight=None):
        result = fit_gb2_mle(X, sample_weight, n_starts=self.n_starts,
                             window=self.fit_window, tol=self.tol)
        self.result_ = result
        self.params_ = result.params
        self.mu_ = result.mu
        self.se_mu_ = result.se_mu
        self.log_likelihood_ = result.log_likelihood
        self.converged_ = result.converged
        return self

    def score_samples(self, X):
        check_is_fitted(self, "result_")
        if self.params_ is None:
            raise DomainError("fit did not produce parameters")
        x, _ = check_sample(X)
        return gb2_logpdf(self.params_, x)

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self, "result_")
        return gb2_sample(self.params_, random_state, n_samples)


class HillEstimator(BaseEstimator):
    """Hill tail-index estimator; ``k=None`` uses ``floor(sqrt(n))``."""

    def __init__(self, k=None):
        self.k = k

    def fit(self, X, y=None, sample_weight=None):
        x, w = check_sample(X, sample_weight, min_samples=2)
        n = len(x) if w is None else w.sum()
        k = default_hill_k(n) if self.k is None else self.k
        self.k_ = k
        self.tail_index_ = hill_estimator(x, k, w)
        return self
