"""Superstatistics: Boltzmann factors averaged over a fluctuating temperature.

When aggregate demand fluctuates, the inverse temperature beta is itself
random with weight ``f_beta``.  The worker density becomes
``p_F(c) B(c) / Z_B`` with the generalized Boltzmann factor
``B(c) = E_f[exp(-beta c)]``.  A small-beta power law
``f_beta ~ beta^-gamma`` turns into ``B(c) ~ c^(gamma-1)`` and raises the
worker Pareto index by ``1 - gamma``.  The last functions map between
the demand exponent delta, gamma and the Pareto indices at two adjoining
aggregation levels.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .equilibrium import invert_demand, partition_function, worker_pdf
from .exceptions import (
    DomainError,
    InconsistencyWarning,
    NormalizabilityError,
    OutOfTheoryError,
    QuadratureError,
)

__all__ = [
    "BetaWeight",
    "DemandLaw",
    "default_beta_max",
    "generalized_boltzmann",
    "boltzmann_asymptote",
    "superstat_partition",
    "worker_pdf_super",
    "worker_cdf_upper_super",
    "sample_demand",
    "sample_demand_gap",
    "gamma_from_delta",
    "predict_mu_w",
    "infer_delta",
    "infer_mu_f",
]


@dataclass(frozen=True, eq=False)
class BetaWeight:
    """Distribution ``f_beta`` of the inverse temperature.

    Use :meth:`point_mass`, :meth:`power_law` or :meth:`empirical`.
    """

    kind: str
    beta0: float | None = None
    gamma: float | None = None
    beta_max: float | None = None
    betas: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def point_mass(cls, beta0):
        if not beta0 > 0:
            raise DomainError("beta0 must be positive")
        return cls("point_mass", beta0=float(beta0))

    @classmethod
    def power_law(cls, gamma, beta_max):
        """Density proportional to ``beta^-gamma`` on ``(0, beta_max]``; needs ``gamma < 1``."""
        if not gamma < 1:
            raise NormalizabilityError(f"beta^-gamma is not integrable at 0 for gamma={gamma}")
        if not beta_max > 0:
            raise DomainError("beta_max must be positive")
        return cls("power_law", gamma=float(gamma), beta_max=float(beta_max))

    @classmethod
    def empirical(cls, betas):
        betas = np.asarray(betas, dtype=float).ravel()
        if len(betas) == 0 or np.any(betas <= 0):
            raise DomainError("empirical betas must be a non-empty set of positive reals")
        betas = betas.copy()
        betas.setflags(write=False)
        return cls("empirical", betas=betas)

    @property
    def normalization(self):
        """Constant ``A`` in ``f(beta) = A beta^-gamma``, i.e. ``(1-gamma) beta_max^(gamma-1)``."""
        if self.kind != "power_law":
            return 1.0
        return (1.0 - self.gamma) * self.beta_max ** (self.gamma - 1.0)


@dataclass(frozen=True)
class DemandLaw:
    """Demand density ``f_D(D) ~ (c_mean - D)^-delta`` on ``(d_min, c_mean)``."""

    delta: float
    c_mean: float
    d_min: float = 0.0

    def __post_init__(self):
        if not self.delta < 1:
            raise NormalizabilityError(f"(c_mean - D)^-delta is not normalizable for delta={self.delta}")
        if not self.c_mean > 0:
            raise DomainError("c_mean must be positive")
        if not 0 <= self.d_min < self.c_mean:
            raise DomainError("d_min must lie in [0, c_mean)")


def default_beta_max(firm, fraction=0.01):
    """Upper cutoff of a power-law weight: the beta at which demand falls to ``fraction * <c>_0``."""
    return invert_demand(firm, fraction * firm.mean)


# --------------------------------------------------------------------------
# generalized Boltzmann factor
# --------------------------------------------------------------------------

def _power_law_factor(gamma, beta_max, c):
    # t = (beta/beta_max)^(1-gamma) maps the normalized weight to dt on [0, 1]
    p = 1.0 / (1.0 - gamma)
    x = c * beta_max
    f = lambda t: math.exp(-x * t**p)  # noqa: E731
    # the integrand falls to e^-60 at t_s; beyond it the rest is negligible
    t_s = min(1.0, (60.0 / x) ** (1.0 - gamma)) if x > 0 else 1.0
    val, err = integrate.quad(f, 0.0, t_s, epsabs=0.0, epsrel=1e-12, limit=200)
    if t_s < 1.0:
        val += integrate.quad(f, t_s, 1.0, epsabs=1e-14 * val, epsrel=1e-10, limit=200)[0]
    if err > 1e-9 * max(val, 1e-300):
        raise QuadratureError("generalized Boltzmann factor did not converge", estimate=val, error=err)
    return val


def generalized_boltzmann(weight, c):
    """``B(c) = E_f[exp(-beta c)]`` for the normalized weight ``f``."""
    c_arr = np.asarray(c, dtype=float)
    if np.any(c_arr <= 0):
        raise DomainError("productivity must be positive")
    if weight.kind == "point_mass":
        out = np.exp(-weight.beta0 * c_arr)
    elif weight.kind == "empirical":
        out = np.exp(-np.multiply.outer(c_arr, weight.betas)).mean(axis=-1)
    else:
        flat = [_power_law_factor(weight.gamma, weight.beta_max, v) for v in c_arr.ravel()]
        out = np.asarray(flat).reshape(c_arr.shape)
    return float(out) if out.ndim == 0 else out


def boltzmann_asymptote(weight, c):
    """Large-c form ``A Gamma(1-gamma) c^(gamma-1)`` of a power-law weight (``A`` = normalization)."""
    if weight.kind != "power_law":
        raise DomainError("the power-law asymptote needs a power-law weight")
    c = np.asarray(c, dtype=float)
    log_b = gammaln(1.0 - weight.gamma) + (weight.gamma - 1.0) * np.log(c)
    out = np.exp(log_b) * weight.normalization
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# superstatistical worker density
# --------------------------------------------------------------------------

def superstat_partition(firm, weight):
    """``Z_B = integral of p_F(c) B(c) dc``, evaluated as ``E_f[Z(beta)]``."""
    if weight.kind == "point_mass":
        return partition_function(firm, weight.beta0)
    if weight.kind == "empirical":
        return float(np.mean([partition_function(firm, b) for b in weight.betas]))
    p = 1.0 / (1.0 - weight.gamma)
    f = lambda t: partition_function(firm, weight.beta_max * t**p)  # noqa: E731
    val, err = integrate.quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-11, limit=200)
    if err > 1e-9:
        raise QuadratureError("superstatistical partition function did not converge",
                              estimate=val, error=err)
    return val


def worker_pdf_super(firm, weight, c, *, z_b=None):
    """Worker density ``p_F(c) B(c) / Z_B``.

    ``z_b`` may be passed to reuse a partition value across many ``c``.
    A point-mass weight reproduces :func:`worker_pdf` exactly.
    """
    if weight.kind == "point_mass":
        return worker_pdf(firm, weight.beta0, c)
    if z_b is None:
        z_b = superstat_partition(firm, weight)
    out = np.asarray(firm.pdf(c)) * np.asarray(generalized_boltzmann(weight, c)) / z_b
    return float(out) if out.ndim == 0 else out


def worker_cdf_upper_super(firm, weight, c, *, z_b=None):
    """Upper cdf ``P_W(C > c)`` of the superstatistical worker density."""
    if z_b is None:
        z_b = superstat_partition(firm, weight)
    scale = firm.scale

    def integrand(u):
        if u > 700.0:
            return 0.0
        x = c * math.exp(u)
        return x * float(firm.pdf(x)) * float(generalized_boltzmann(weight, x))

    # u = ln(x / c), split where the Boltzmann cutoff of the weight sets in
    pieces = [0.0, max(1.0, math.log(max(scale, c) / c) + 1.0)]
    total = 0.0
    total += integrate.quad(integrand, pieces[0], pieces[1], epsabs=0.0, epsrel=1e-10, limit=200)[0]
    total += integrate.quad(integrand, pieces[1], np.inf, epsabs=0.0, epsrel=1e-10, limit=400)[0]
    return total / z_b


# --------------------------------------------------------------------------
# demand fluctuations
# --------------------------------------------------------------------------

def _open_uniform(rng, n, stratified):
    # uniform draws on the open interval (0, 1)
    u = (rng.integers(0, 2**53 - 1, size=n, dtype=np.int64) + 0.5) / 2.0**53
    if stratified:
        u = (rng.permutation(n) + u) / n
    return u


def sample_demand_gap(law, rng_seed, n, *, stratified=False):
    """Draws of ``c_mean - D``, which stay accurate when ``D`` is close to ``c_mean``.

    Inverse transform ``c_mean - D = (c_mean - d_min) U^(1/(1-delta))``.
    With ``stratified=True`` the uniforms are one per stratum
    ``((i + V_i)/n)``, in shuffled order.
    """
    if not law.delta < 1:
        raise NormalizabilityError("delta must be below 1")
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    u = _open_uniform(rng, int(n), stratified)
    width = law.c_mean - law.d_min
    gap = width * u ** (1.0 / (1.0 - law.delta))
    # keep the draws strictly inside the support after rounding
    return np.clip(gap, np.finfo(float).tiny, np.nextafter(width, 0.0))


def sample_demand(law, rng_seed, n, *, stratified=False):
    """Seeded draws of the aggregate demand from ``law``, all inside ``(d_min, c_mean)``."""
    gap = sample_demand_gap(law, rng_seed, n, stratified=stratified)
    d = law.c_mean - gap
    upper = np.nextafter(law.c_mean, 0.0)
    lower = np.nextafter(law.d_min, np.inf)
    return np.clip(d, lower, upper)


# --------------------------------------------------------------------------
# Pareto-index transfer between aggregation levels
# --------------------------------------------------------------------------

def _check_indices(mu_f, delta=None):
    if not mu_f > 1:
        raise OutOfTheoryError(f"the transfer relations need mu_F > 1, got {mu_f}")
    if delta is not None and not delta < 1:
        raise NormalizabilityError(f"delta must be below 1, got {delta}")


def gamma_from_delta(delta, mu_f):
    """Small-beta exponent ``gamma`` of ``f_beta`` implied by demand exponent ``delta``.

    ``gamma = delta`` for ``mu_F >= 2``; ``gamma - 1 = (mu_F - 1)(delta - 1)``
    below.  Both branches give ``delta`` at ``mu_F = 2``.
    """
    _check_indices(mu_f, delta)
    if mu_f >= 2:
        return float(delta)
    return 1.0 + (mu_f - 1.0) * (delta - 1.0)


def predict_mu_w(mu_f, delta):
    """Pareto index one aggregation level below (workers given firms).

    ``mu_W = mu_F - delta + 1`` for ``mu_F > 2`` and
    ``(mu_F - 1)(1 - delta) + mu_F`` for ``1 < mu_F <= 2``.  ``mu_F = 1``
    is the fixed point and maps to 1.
    """
    if mu_f == 1 and delta < 1:
        return 1.0
    _check_indices(mu_f, delta)
    if mu_f > 2:
        return mu_f - delta + 1.0
    return (mu_f - 1.0) * (1.0 - delta) + mu_f


def infer_delta(mu_f, mu_w):
    """Demand exponent reproducing the observed pair ``(mu_F, mu_W)``.

    Warns with :class:`InconsistencyWarning` (and returns ``delta >= 1``)
    when ``mu_W <= mu_F``, which the theory forbids.
    """
    _check_indices(mu_f)
    if mu_w <= mu_f:
        warnings.warn(f"mu_W={mu_w:.6g} does not exceed mu_F={mu_f:.6g}; implied delta >= 1",
                      InconsistencyWarning, stacklevel=2)
    if mu_f > 2:
        return mu_f - mu_w + 1.0
    return (mu_f - mu_w) / (mu_f - 1.0) + 1.0


def infer_mu_f(mu_w, delta):
    """Inverse of :func:`predict_mu_w` in its first argument: the index one level up.

    Iterating it moves the index toward 1 without crossing it.
    """
    if not delta < 1:
        raise NormalizabilityError(f"delta must be below 1, got {delta}")
    if not mu_w >= 1:
        raise OutOfTheoryError(f"mu_W must be at least 1, got {mu_w}")
    if mu_w > 3.0 - delta:
        return mu_w + delta - 1.0
    return (mu_w + 1.0 - delta) / (2.0 - delta)
