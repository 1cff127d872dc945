"""Generalized Beta distribution of the Second Kind (GB2).

Density, exact and asymptotic upper cdf, the log-normal approximation
around the peak, quantiles and seeded sampling.  Parameters follow the
productivity convention: ``mu`` is the upper (Pareto) index, ``nu`` the
small-c power exponent, ``q`` the sharpness of the transition between the
two power laws and ``c1`` the scale.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import betaincinv, betaln

from ._special import betainc_reg
from .exceptions import DomainError

__all__ = [
    "Gb2Params",
    "LogNormalApprox",
    "gb2_pdf",
    "gb2_logpdf",
    "gb2_cdf_upper",
    "gb2_cdf_lower",
    "gb2_tail_upper",
    "gb2_tail_prefactor",
    "gb2_lognormal_peak",
    "gb2_ppf",
    "gb2_sample",
    "gb2_raw_moment",
]


@dataclass(frozen=True)
class Gb2Params:
    """The four GB2 parameters; all must be strictly positive."""

    mu: float
    nu: float
    q: float
    c1: float

    def __post_init__(self):
        for name in ("mu", "nu", "q", "c1"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise DomainError(f"GB2 parameter {name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def a(self):
        """First Beta shape of the upper cdf, ``mu / q``."""
        return self.mu / self.q

    @property
    def b(self):
        """Second Beta shape of the upper cdf, ``nu / q``."""
        return self.nu / self.q

    def as_array(self):
        return np.array([self.mu, self.nu, self.q, self.c1])


@dataclass(frozen=True)
class LogNormalApprox:
    """Peak location (in units of ``c1``) and width of the log-normal approximation."""

    c_ln: float
    sigma: float


def _as_positive(c, allow_zero=False):
    arr = np.asarray(c, dtype=float)
    bad = arr < 0 if allow_zero else arr <= 0
    if np.any(bad) or np.any(np.isnan(arr)):
        bound = "non-negative" if allow_zero else "positive"
        raise DomainError(f"productivity must be {bound}")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def gb2_logpdf(params, c):
    """Log density, evaluated without forming ``(c/c1)**q`` explicitly."""
    c = _as_positive(c)
    log_ratio = np.log(c) - np.log(params.c1)
    out = (
        np.log(params.q)
        - betaln(params.a, params.b)
        - np.log(c)
        + params.nu * log_ratio
        - (params.mu + params.nu) / params.q * np.logaddexp(0.0, params.q * log_ratio)
    )
    return _out(out, c)


def gb2_pdf(params, c):
    """GB2 density at ``c > 0``; raises :class:`DomainError` for ``c <= 0``."""
    c = _as_positive(c)
    return _out(np.exp(gb2_logpdf(params, c)), c)


def _z_pair(params, c):
    # z = 1/(1+t), 1-z = t/(1+t), t = (c/c1)^q, both computed without cancellation
    with np.errstate(divide="ignore"):
        log_t = params.q * (np.log(c) - np.log(params.c1))
    z = np.exp(-np.logaddexp(0.0, log_t))
    zc = np.exp(log_t - np.logaddexp(0.0, log_t))
    return z, zc


def gb2_cdf_upper(params, c):
    """Exceedance probability ``P(C > c) = I_z(mu/q, nu/q)``, ``z = 1/(1+(c/c1)^q)``."""
    c = _as_positive(c, allow_zero=True)
    z, zc = _z_pair(params, c)
    out = betainc_reg(params.a, params.b, z, zc)
    return _out(np.asarray(out), c)


def gb2_cdf_lower(params, c):
    """``P(C <= c)``, accurate for small ``c`` where the upper cdf is near one."""
    c = _as_positive(c, allow_zero=True)
    z, zc = _z_pair(params, c)
    out = betainc_reg(params.b, params.a, zc, z)
    return _out(np.asarray(out), c)


def gb2_tail_prefactor(params):
    """Constant ``A`` in the asymptotic tail ``P(C > c) ~ A (c/c1)^-mu``."""
    return float(np.exp(np.log(params.q / params.mu) - betaln(params.a, params.b)))


def gb2_tail_upper(params, c):
    """Asymptotic power-law upper cdf ``(q/mu)/B(mu/q, nu/q) * (c/c1)^-mu``."""
    c = _as_positive(c)
    out = gb2_tail_prefactor(params) * np.exp(-params.mu * (np.log(c) - np.log(params.c1)))
    return _out(out, c)


def gb2_lognormal_peak(params):
    """Log-normal approximation around the peak.

    ``c_ln = (nu/mu)**(1/q)`` is reported in units of ``c1``; it is the mode
    of ``c * pdf(c)``, i.e. of the density of ``log c``.
    """
    c_ln = (params.nu / params.mu) ** (1.0 / params.q)
    sigma = (params.nu + params.mu) / (params.nu * params.mu) / params.q
    return LogNormalApprox(c_ln=c_ln, sigma=sigma)


def gb2_ppf(params, u):
    """Quantile function: the ``c`` with ``P(C <= c) = u``."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise DomainError("probabilities must lie in [0, 1]")
    v = betaincinv(params.b, params.a, u)
    with np.errstate(divide="ignore"):
        out = params.c1 * np.exp((np.log(v) - np.log1p(-v)) / params.q)
    return _out(out, u)


def gb2_sample(params, rng_seed, n):
    """Draw ``n`` i.i.d. GB2 variates.

    ``V ~ Beta(nu/q, mu/q)`` mapped through ``c1 * (V/(1-V))**(1/q)``.
    The same seed always yields the same draws.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = np.random.default_rng(rng_seed)
    v = rng.beta(params.b, params.a, size=int(n))
    # V == 1.0 or 0.0 only through rounding at extreme shapes
    v = np.clip(v, np.finfo(float).tiny, np.nextafter(1.0, 0.0))
    return params.c1 * np.exp((np.log(v) - np.log1p(-v)) / params.q)


def gb2_raw_moment(params, order):
    """``E[C**order]`` for ``-nu < order < mu``.

    Outside that strip the closed form continues analytically and is used
    as the finite part of a divergent moment; callers decide whether that
    is meaningful.
    """
    from scipy.special import gamma

    s = float(order)
    x = (params.nu + s) / params.q
    y = (params.mu - s) / params.q
    if -params.nu < s < params.mu:
        return float(params.c1**s * np.exp(betaln(x, y) - betaln(params.b, params.a)))
    # analytic continuation: Gamma of negative non-integer arguments
    num = gamma(x) * gamma(y) / gamma(x + y)
    return float(params.c1**s * num / np.exp(betaln(params.b, params.a)))
