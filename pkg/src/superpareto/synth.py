"""Synthetic productivity panels from Boltzmann allocation under fluctuating demand.

Each period draws an aggregate demand ``D`` from a :class:`DemandLaw`,
solves ``<c>_beta = D`` on the empirical firm distribution and allocates
the workforce multinomially with ``p_k ~ exp(-beta c_k)``.  Pooling many
periods realizes the superstatistical average over ``beta``.
"""
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import FirmDistribution, invert_demand_gap
from .exceptions import DomainError, NormalizabilityError
from .gb2 import Gb2Params, gb2_ppf
from .records import Panel
from .superstat import DemandLaw, infer_mu_f, sample_demand_gap

__all__ = [
    "DEFAULT_FIRM_PARAMS",
    "SynthConfig",
    "PeriodAllocation",
    "draw_levels",
    "allocate_periods",
    "synth_periods",
    "synth_generate",
    "TwoStageSample",
    "synth_two_stage",
]

# c1 in yen/person; the shape parameters follow listed-firm fits
DEFAULT_FIRM_PARAMS = Gb2Params(mu=1.8, nu=1.0, q=1.5, c1=5.0e7)


@dataclass(frozen=True)
class SynthConfig:
    """Inputs of :func:`synth_generate`.

    ``stratified`` draws the firm quantiles and the demand uniforms one
    per stratum, which removes most of the sampling noise of the pooled
    tail without changing the target distributions.
    """

    K: int = 10_000
    N: int = 1_000_000
    firm_params: Gb2Params = field(default=DEFAULT_FIRM_PARAMS)
    delta: float = 0.5
    periods: int = 200
    seed: int = 0
    n_sectors: int = 20
    year: int = 2000
    stratified: bool = True

    def __post_init__(self):
        if not self.delta < 1:
            raise NormalizabilityError(f"delta must be below 1, got {self.delta}")
        if self.K < 50:
            raise DomainError("K must be at least 50")
        if self.N < self.K:
            raise DomainError("N must be at least K")
        if self.periods < 1 or self.n_sectors < 1:
            raise DomainError("periods and n_sectors must be positive")


@dataclass(frozen=True)
class PeriodAllocation:
    """One period: the drawn demand, its inverse temperature and the head counts."""

    demand: float
    beta: float
    counts: np.ndarray = field(repr=False)


def _uniforms(rng, n, stratified):
    u = rng.random(n)
    # rng.random is on [0, 1); move an exact 0 inside the open interval
    u = np.where(u == 0.0, 0.5 / 2.0**53, u)
    if stratified:
        u = (np.arange(n) + u) / n
        u = rng.permutation(u)
    return u


def draw_levels(params, rng, n, *, stratified=True):
    """``n`` productivity levels from a GB2 law, in random order."""
    return gb2_ppf(params, _uniforms(rng, n, stratified))


def allocate_periods(levels, n_units, delta, periods, rng, *, stratified=True):
    """Boltzmann allocation of ``n_units`` over ``levels`` in each of ``periods`` periods.

    Yields :class:`PeriodAllocation` records.  The demand gap ``<c>_0 - D``
    is sampled directly so that periods close to ``<c>_0`` keep their
    precision.
    """
    levels = np.asarray(levels, dtype=float)
    firm = FirmDistribution.empirical(levels)
    m = firm.mean
    law = DemandLaw(delta=delta, c_mean=m)
    gaps = sample_demand_gap(law, rng, periods, stratified=stratified)
    shifted = levels - levels.min()
    for gap in gaps:
        beta = invert_demand_gap(firm, float(gap))
        w = np.exp(-beta * shifted)
        p = w / w.sum()
        counts = rng.multinomial(n_units, p)
        yield PeriodAllocation(demand=m - float(gap), beta=beta, counts=counts)


def _round_for_counts(levels, n_max):
    # keep 53 - bitlength(n_max) significant bits so that n * c is exact
    # for every head count n <= n_max, and (n * c) / n gives c back
    bits = 53 - int(n_max).bit_length()
    mant, expo = np.frexp(levels)
    return np.ldexp(np.round(np.ldexp(mant, bits)), expo - bits)


def _seeds(seed):
    ss = np.random.SeedSequence(seed)
    a, b = ss.spawn(2)
    return np.random.default_rng(a), np.random.default_rng(b)


def synth_periods(config):
    """Firm levels and the per-period allocations behind :func:`synth_generate`."""
    rng_firms, rng_alloc = _seeds(config.seed)
    levels = draw_levels(config.firm_params, rng_firms, config.K, stratified=config.stratified)
    levels = _round_for_counts(levels, config.N)
    allocs = list(allocate_periods(levels, config.N, config.delta, config.periods, rng_alloc,
                                   stratified=config.stratified))
    return levels, allocs


def synth_generate(config=None, **kwargs):
    """Synthetic :class:`Panel` with one record per firm and period with workers.

    All periods share ``config.year``: the pooled sample is the averaged
    distribution.  ``sales_yen / employees`` reproduces each firm's level
    exactly (levels are rounded to ``53 - bitlength(N)`` significant bits
    for this); sectors are contiguous blocks of the firm productivity ranking.
    """
    if config is None:
        config = SynthConfig(**kwargs)
    elif kwargs:
        raise TypeError("pass either a SynthConfig or keyword arguments")
    levels, allocs = synth_periods(config)
    width = len(str(config.K - 1))
    ids = np.array([f"F{i:0{width}d}" for i in range(config.K)])
    rank = np.empty(config.K, dtype=np.int64)
    rank[np.argsort(levels, kind="stable")] = np.arange(config.K)
    n_sec = min(config.n_sectors, config.K)
    sec_width = len(str(n_sec - 1))
    sectors = np.array([f"S{j:0{sec_width}d}" for j in range(n_sec)])[rank * n_sec // config.K]

    firm_idx, emp = [], []
    for a in allocs:
        k = np.flatnonzero(a.counts)
        firm_idx.append(k)
        emp.append(a.counts[k])
    firm_idx = np.concatenate(firm_idx)
    emp = np.concatenate(emp)
    c = levels[firm_idx]
    return Panel(
        ids[firm_idx],
        np.full(len(firm_idx), config.year, dtype=np.int64),
        sectors[firm_idx],
        c * emp,
        emp,
    )


@dataclass(frozen=True)
class TwoStageSample:
    """Unit levels at the upper stage and the pooled counts of lower-stage members."""

    levels: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    mu_upper: float
    delta: float


def synth_two_stage(mu_lower=1.8, delta=0.8, *, n_upper=2000, n_lower=100_000, periods=200,
                    nu=1.0, q=1.5, c1=5.0e7, seed=0, stratified=True):
    """Allocate ``n_lower`` members over ``n_upper`` units with demand exponent ``delta``.

    Used for the firm-to-sector transition: units are sectors and members
    are firms.  Sector levels follow a GB2 whose index is the one that
    the transition maps onto ``mu_lower``.
    """
    mu_upper = infer_mu_f(mu_lower, delta)
    params = Gb2Params(mu=mu_upper, nu=nu, q=q, c1=c1)
    rng_levels, rng_alloc = _seeds(seed)
    levels = draw_levels(params, rng_levels, n_upper, stratified=stratified)
    counts = np.zeros(n_upper, dtype=np.int64)
    for a in allocate_periods(levels, n_lower, delta, periods, rng_alloc, stratified=stratified):
        counts += a.counts
    return TwoStageSample(levels=levels, counts=counts, mu_upper=mu_upper, delta=delta)
