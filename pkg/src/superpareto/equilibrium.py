"""Statistical equilibrium of workers over firm productivity levels.

Firms play the role of energy levels with density ``p_F(c)``; workers
occupy them with Boltzmann weight ``exp(-beta c)``.  This module evaluates
the partition function, beta-weighted productivity moments, the mean
demand ``D(beta)`` and its inverse, the worker density at fixed beta, and
the small-beta expansions of ``D`` in the three tail regimes.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import betaln, digamma, gammaln

from .exceptions import DivergentMomentError, DomainError, OutOfRangeError, QuadratureError
from .gb2 import Gb2Params, gb2_pdf, gb2_raw_moment, gb2_tail_prefactor

__all__ = [
    "FirmDistribution",
    "EquilibriumTable",
    "partition_function",
    "moment",
    "mean_demand",
    "demand_deficit",
    "invert_demand",
    "invert_demand_gap",
    "worker_pdf",
    "worker_probabilities",
    "demand_small_beta",
    "tabulate_equilibrium",
    "gamma_negative",
]

LOG_BRANCH_WIDTH = 1e-9
_EPSREL = 1e-12


@dataclass(frozen=True, eq=False)
class FirmDistribution:
    """Productivity density of firms with its declared power-law tail.

    Build instances with :meth:`from_gb2`, :meth:`exponential` or
    :meth:`empirical`.  ``tail_mu`` and ``tail_c0`` describe the tail
    ``P(C > c) ~ (c / c0)^-tail_mu``; light-tailed kinds carry
    ``tail_mu = inf``.
    """

    kind: str
    tail_mu: float
    tail_c0: float
    gb2: Gb2Params | None = None
    rate: float | None = None
    levels: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_gb2(cls, params):
        c0 = params.c1 * gb2_tail_prefactor(params) ** (1.0 / params.mu)
        return cls("gb2", params.mu, c0, gb2=params)

    @classmethod
    def exponential(cls, rate):
        if not rate > 0:
            raise DomainError("exponential rate must be positive")
        return cls("exponential", math.inf, 1.0 / rate, rate=float(rate))

    @classmethod
    def empirical(cls, levels, tail_mu=math.inf, tail_c0=None):
        """Uniform weight over the given productivity levels (a plain sum over firms)."""
        levels = np.asarray(levels, dtype=float).ravel()
        if len(levels) == 0 or np.any(levels <= 0) or not np.all(np.isfinite(levels)):
            raise DomainError("empirical levels must be a non-empty set of positive reals")
        levels = np.sort(levels)
        levels.setflags(write=False)
        c0 = float(levels.mean()) if tail_c0 is None else float(tail_c0)
        return cls("empirical", float(tail_mu), c0, levels=levels)

    @property
    def infinite_mean(self):
        return self.tail_mu <= 1

    @property
    def mean(self):
        """``<c>_0``; raises :class:`DivergentMomentError` when infinite."""
        return moment(self, 0.0, 1)

    @property
    def scale(self):
        """A characteristic productivity used to size brackets and tolerances."""
        if self.kind == "gb2":
            return self.gb2.c1
        if self.kind == "exponential":
            return 1.0 / self.rate
        return float(np.median(self.levels))

    def pdf(self, c):
        if self.kind == "gb2":
            return gb2_pdf(self.gb2, c)
        if self.kind == "exponential":
            c = np.asarray(c, dtype=float)
            if np.any(c <= 0):
                raise DomainError("productivity must be positive")
            out = self.rate * np.exp(-self.rate * c)
            return float(out) if out.ndim == 0 else out
        raise DomainError("an empirical firm distribution has no density")


@dataclass(frozen=True, eq=False)
class EquilibriumTable:
    """Cached ``(beta, Z, D)`` triples on an increasing beta grid."""

    betas: np.ndarray
    Z: np.ndarray
    D: np.ndarray
    _spline: CubicSpline = field(repr=False, compare=False, default=None)

    def invert(self, D):
        """Interpolated inverse temperature for demand ``D`` inside the table range."""
        D = np.asarray(D, dtype=float)
        if np.any(D <= self.D[-1]) or np.any(D >= self.D[0]):
            raise OutOfRangeError("demand outside the tabulated range")
        out = np.exp(self._spline(np.log(D)))
        return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# quadrature helpers
# --------------------------------------------------------------------------

def _quad(f, a, b, scale):
    val, err, *info = integrate.quad(f, a, b, epsabs=1e-15 * scale, epsrel=_EPSREL,
                                     limit=400, full_output=1)
    if len(info) > 2 and err > max(1e-10 * scale, 1e-8 * abs(val)):
        raise QuadratureError(f"quadrature did not converge on [{a}, {b}]: {info[2]}",
                              estimate=val, error=err, info=info[0])
    return val


def _gb2_expect(params, g, beta, scale=1.0):
    """``E[g(C)]`` for a GB2 variable, integrated in ``u = ln(c/c1)``.

    ``g`` receives productivity values; the domain is split at ``c = c1``
    and at ``c* = max(c1, 10/beta)``.
    """
    lognorm = math.log(params.q) - betaln(params.a, params.b)
    k = (params.mu + params.nu) / params.q

    def integrand(u):
        if u > 700.0:
            return 0.0
        dens = math.exp(lognorm + params.nu * u - k * np.logaddexp(0.0, params.q * u))
        return g(params.c1 * math.exp(u)) * dens

    c_star = params.c1 if beta <= 0 else max(params.c1, 10.0 / beta)
    u_star = math.log(c_star / params.c1)
    total = _quad(integrand, -np.inf, 0.0, scale)
    if u_star > 0:
        total += _quad(integrand, 0.0, u_star, scale)
    total += _quad(integrand, u_star, np.inf, scale)
    return total


def _check_beta(beta):
    if not beta >= 0 or not np.isfinite(beta):
        raise DomainError(f"beta must be a finite non-negative number, got {beta!r}")
    return float(beta)


def _empirical_weights(firm, beta):
    # Boltzmann weights shifted by the smallest level to avoid underflow
    w = np.exp(-beta * (firm.levels - firm.levels[0]))
    return w / w.sum()


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def partition_function(firm, beta):
    """``Z(beta) = E[exp(-beta C)]`` under the firm distribution; ``Z(0) = 1``."""
    beta = _check_beta(beta)
    if beta == 0:
        return 1.0
    if firm.kind == "exponential":
        return firm.rate / (firm.rate + beta)
    if firm.kind == "empirical":
        return float(np.mean(np.exp(-beta * firm.levels)))
    params = firm.gb2
    if beta * params.c1 < 1.0:
        # 1 + E[exp(-beta C) - 1] keeps 1 - Z accurate for small beta
        return 1.0 + _gb2_expect(params, lambda c: math.expm1(-beta * c), beta)
    return _gb2_expect(params, lambda c: math.exp(-beta * c), beta)


def moment(firm, beta, n):
    """``<c^n>_beta = E[C^n exp(-beta C)] / Z(beta)``."""
    beta = _check_beta(beta)
    if n < 0 or int(n) != n:
        raise DomainError("moment order must be a non-negative integer")
    n = int(n)
    if n == 0:
        return 1.0
    if beta == 0 and n >= firm.tail_mu:
        raise DivergentMomentError(f"moment of order {n} diverges for tail index {firm.tail_mu}")
    if firm.kind == "exponential":
        return math.exp(gammaln(n + 1) - n * math.log(firm.rate + beta))
    if firm.kind == "empirical":
        return float(np.dot(_empirical_weights(firm, beta), firm.levels**n))
    params = firm.gb2
    if beta == 0:
        return gb2_raw_moment(params, n)
    scale = params.c1**n
    # log form: c**n alone overflows deep in the tail
    num = _gb2_expect(params, lambda c: math.exp(n * math.log(c) - beta * c) if c > 0 else 0.0,
                      beta, scale)
    return num / partition_function(firm, beta)


def mean_demand(firm, beta):
    """Mean demand per worker ``D = -d ln Z / d beta = <c>_beta``."""
    return moment(firm, beta, 1)


def demand_deficit(firm, beta):
    """``<c>_0 - D(beta)`` computed without subtracting two nearly equal numbers.

    Uses ``E[(m - C)(exp(-beta C) - 1)] / Z`` with ``m = <c>_0``, which is
    accurate for small beta where ``D`` is close to ``m``.
    """
    beta = _check_beta(beta)
    m = firm.mean
    if beta == 0:
        return 0.0
    if firm.kind == "exponential":
        return 1.0 / firm.rate - 1.0 / (firm.rate + beta)
    if firm.kind == "empirical":
        w = np.exp(-beta * firm.levels)
        return float(np.mean((m - firm.levels) * np.expm1(-beta * firm.levels)) / np.mean(w))
    params = firm.gb2
    num = _gb2_expect(params, lambda c: (m - c) * math.expm1(-beta * c), beta, params.c1)
    return num / partition_function(firm, beta)


def invert_demand(firm, D, *, rtol=1e-12):
    """The unique ``beta >= 0`` with ``mean_demand(firm, beta) == D``.

    Raises :class:`DomainError` for ``D <= 0`` and :class:`OutOfRangeError`
    when ``D`` reaches the infinite-temperature limit ``<c>_0``.
    """
    if not D > 0:
        raise DomainError("demand must be positive")
    scale = firm.scale
    if firm.infinite_mean:
        f = lambda b: mean_demand(firm, b) - D  # noqa: E731
        lo = hi = 1.0 / scale
        while f(lo) < 0:
            lo /= 4.0
        while f(hi) > 0:
            hi *= 4.0
        return brentq(f, lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)
    m = firm.mean
    if D >= m:
        raise OutOfRangeError(f"demand {D!r} is not below the mean productivity {m!r}")
    return invert_demand_gap(firm, m - D, rtol=rtol)


def invert_demand_gap(firm, gap, *, rtol=1e-12):
    """The ``beta`` with ``<c>_0 - mean_demand(firm, beta) == gap``.

    Equivalent to :func:`invert_demand` at ``D = <c>_0 - gap`` but keeps full
    relative precision when the gap is many orders below ``<c>_0``.
    """
    if firm.infinite_mean:
        raise DivergentMomentError("the demand gap is undefined for an infinite-mean firm")
    m = firm.mean
    if not 0 < gap < m:
        raise OutOfRangeError(f"gap {gap!r} must lie in (0, {m!r})")
    if firm.kind == "exponential":
        return 1.0 / (m - gap) - firm.rate
    if gap < 0.5 * m:
        f = lambda b: gap - demand_deficit(firm, b)  # noqa: E731
    else:
        D = m - gap
        f = lambda b: mean_demand(firm, b) - D  # noqa: E731
    lo, hi = 0.0, 1.0 / m
    while f(hi) > 0:
        lo, hi = hi, hi * 4.0
    if f(hi) == 0:
        return hi
    return brentq(f, lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)


def worker_pdf(firm, beta, c):
    """Worker productivity density ``exp(-beta c) p_F(c) / Z(beta)``."""
    beta = _check_beta(beta)
    pf = np.asarray(firm.pdf(c))
    out = pf * np.exp(-beta * np.asarray(c, dtype=float)) / partition_function(firm, beta)
    return float(out) if out.ndim == 0 else out


def worker_probabilities(firm, beta):
    """Occupation probabilities ``p_k`` of the levels of an empirical firm distribution."""
    if firm.kind != "empirical":
        raise DomainError("occupation probabilities need an empirical firm distribution")
    return _empirical_weights(firm, _check_beta(beta))


def gamma_negative(mu):
    """``Gamma(-mu)`` through the reflection formula; ``mu`` must not be an integer."""
    if float(mu).is_integer():
        raise DomainError("Gamma(-mu) has poles at integer mu")
    return -math.pi / (math.sin(math.pi * mu) * math.exp(gammaln(mu + 1.0)))


def _log_branch_constant(params, c0, m):
    """Coefficient of the O(beta) term next to ``2 c0^2 beta ln(c0 beta)`` at ``mu = 2``.

    Follows from the finite part ``F`` of ``E[C^t]`` at its pole ``t = 2``
    (residue ``2 c0^2``) and the Laurent expansion of ``Gamma(s)`` at ``-2``.
    """
    h = 1e-4
    residue = 2.0 * c0**2
    below = gb2_raw_moment(params, 2.0 - h) - residue / h
    above = gb2_raw_moment(params, 2.0 + h) + residue / h
    finite = 0.5 * (below + above)
    k2 = finite + residue * (digamma(3.0) + math.log(c0))
    return c0**2 + m**2 - k2


def demand_small_beta(firm, beta, terms="full"):
    """Small-beta (high demand) expansion of ``D(beta)``.

    The regime follows ``firm.tail_mu``:

    * ``mu > 2``:  ``<c>_0 - (<c^2>_0 - <c>_0^2) beta``
    * ``mu = 2``:  ``<c>_0 + 2 c0^2 beta ln(c0 beta)``
    * ``1 < mu < 2``:  ``<c>_0 - mu^2 Gamma(-mu) c0^mu beta^(mu-1)``

    With ``terms="leading"`` exactly these are returned.  ``terms="full"``
    (GB2 firms only) adds the next correction of each regime: the
    ``beta^(mu-1)`` term for ``2 < mu < 3``, the analytic ``O(beta)`` term
    for ``1 < mu < 2`` (with ``<c^2>_0`` continued analytically) and the
    ``O(beta)`` constant of the logarithmic case.  The two power branches
    then join continuously at ``mu = 2``.
    """
    beta = _check_beta(beta)
    if terms not in ("full", "leading"):
        raise ValueError("terms must be 'full' or 'leading'")
    mu = firm.tail_mu
    if mu <= 1:
        raise DivergentMomentError("the mean demand diverges for tail index <= 1")
    m = firm.mean
    if beta == 0:
        return m
    c0 = firm.tail_c0
    full = terms == "full" and firm.kind == "gb2"
    if abs(mu - 2.0) < LOG_BRANCH_WIDTH:
        d = m + 2.0 * c0**2 * beta * math.log(c0 * beta)
        if full:
            d += _log_branch_constant(firm.gb2, c0, m) * beta
        return d
    singular = mu**2 * gamma_negative(mu) * c0**mu * beta ** (mu - 1.0) if mu < 3 else 0.0
    if mu > 2:
        d = m - (moment(firm, 0.0, 2) - m**2) * beta
        if full:
            d -= singular
        return d
    d = m - singular
    if full:
        second = gb2_raw_moment(firm.gb2, 2)  # analytic continuation, negative or finite part
        d -= (second - m**2) * beta
    return d


def tabulate_equilibrium(firm, beta_grid):
    """Evaluate ``Z`` and ``D`` on an increasing positive beta grid.

    The returned table also interpolates the inverse map ``D -> beta``
    (cubic spline in log-log coordinates).
    """
    betas = np.asarray(beta_grid, dtype=float)
    if betas.ndim != 1 or len(betas) < 4:
        raise DomainError("beta grid needs at least four points")
    if np.any(betas <= 0) or np.any(np.diff(betas) <= 0):
        raise DomainError("beta grid must be positive and strictly increasing")
    Z = np.array([partition_function(firm, b) for b in betas])
    D = np.array([mean_demand(firm, b) for b in betas])
    if np.any(np.diff(D) >= 0):
        raise QuadratureError("tabulated demand is not strictly decreasing in beta")
    spline = CubicSpline(np.log(D[::-1]), np.log(betas[::-1]))
    for arr in (betas, Z, D):
        arr.setflags(write=False)
    return EquilibriumTable(betas, Z, D, spline)
