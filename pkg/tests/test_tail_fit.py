import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from superpareto.exceptions import CutWarning, DegenerateTailError, DomainError, InsufficientDataError
from superpareto.gb2 import Gb2Params, gb2_sample
from superpareto.records import Panel, ProductivityRecord
from superpareto.tail_fit import (
    CutPolicy,
    GB2Estimator,
    HillEstimator,
    apply_cuts,
    fit_gb2_mle,
    gb2_log_likelihood,
    hill_estimator,
)

P = Gb2Params(mu=2.2, nu=1.0, q=1.5, c1=50.0)


def pareto_sample(mu, n, seed):
    # inverse transform of P(X > x) = x^-mu on x >= 1
    u = np.random.default_rng(seed).random(n)
    return (1.0 - u) ** (-1.0 / mu)


class TestHill:
    def test_hand_example(self):
        x = np.exp([3.0, 2.0, 1.0, 0.0])
        assert hill_estimator(x, 3) == pytest.approx(0.5, rel=1e-14)

    def test_exact_pareto(self):
        x = pareto_sample(1.5, 100_000, 1)
        assert hill_estimator(x, math.isqrt(len(x))) == pytest.approx(1.5, rel=0.10)

    def test_degenerate(self):
        with pytest.raises(DegenerateTailError):
            hill_estimator(np.full(100, 3.0), 10)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            hill_estimator([1.0, 2.0, 3.0], 3)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(1.0, 1e6), min_size=5, max_size=40, unique=True),
           st.lists(st.integers(1, 6), min_size=40, max_size=40), st.integers(1, 4))
    def test_weights_equal_replication(self, xs, ws, k):
        x = np.array(xs)
        w = np.array(ws[: len(xs)], dtype=float)
        full = np.repeat(x, w.astype(int))
        try:
            want = hill_estimator(full, k)
        except DegenerateTailError:
            with pytest.raises(DegenerateTailError):
                hill_estimator(x, k, w)
            return
        assert hill_estimator(x, k, w) == pytest.approx(want, rel=1e-12)

    def test_estimator_api(self):
        x = pareto_sample(2.0, 10_000, 2)
        est = HillEstimator().fit(x.reshape(-1, 1))
        assert est.k_ == 100
        assert est.tail_index_ == pytest.approx(hill_estimator(x, 100))
        assert clone(est).get_params() == {"k": None}


@pytest.fixture(scope="module")
def sample():
    return gb2_sample(P, 7, 20_000)


@pytest.fixture(scope="module")
def result(sample):
    return fit_gb2_mle(sample)


class TestMle:
    def test_round_trip(self, result):
        assert result.converged
        assert result.mu == pytest.approx(2.2, abs=0.15)
        assert result.params.nu == pytest.approx(1.0, abs=0.2)
        assert 0 < result.se_mu < 0.5
        assert result.n_used == 20_000

    def test_beats_truth(self, sample, result):
        assert result.log_likelihood >= gb2_log_likelihood(P, sample)

    def test_permutation_invariant(self, sample, result):
        perm = np.random.default_rng(0).permutation(sample)
        assert fit_gb2_mle(perm).mu == pytest.approx(result.mu, rel=1e-6)

    def test_weights_equal_replication(self):
        x = np.round(gb2_sample(P, 3, 3000), 0) + 1.0
        v, w = np.unique(x, return_counts=True)
        a = fit_gb2_mle(x)
        b = fit_gb2_mle(v, w.astype(float))
        assert b.mu == pytest.approx(a.mu, rel=1e-4)
        assert b.log_likelihood == pytest.approx(a.log_likelihood, rel=1e-8)

    def test_constant_sample(self):
        res = fit_gb2_mle(np.full(100, 4.2))
        assert not res.converged
        assert res.params is None or not math.isfinite(res.se_mu)

    def test_too_few(self):
        with pytest.raises(InsufficientDataError):
            fit_gb2_mle(np.arange(1.0, 40.0))

    def test_non_positive(self):
        with pytest.raises(DomainError):
            fit_gb2_mle(np.r_[np.arange(1.0, 100.0), -1.0])

    def test_window(self, sample):
        res = fit_gb2_mle(sample, window=(5.0, 3000.0), n_starts=4)
        assert res.params is not None
        assert res.n_used == int(np.sum((sample > 5) & (sample < 3000)))
        assert res.mu == pytest.approx(2.2, abs=0.4)

    def test_estimator_api(self, sample):
        est = GB2Estimator(n_starts=4).fit(sample.reshape(-1, 1))
        assert est.converged_
        assert est.mu_ == pytest.approx(2.2, abs=0.15)
        assert est.score(sample) == pytest.approx(est.log_likelihood_ / len(sample), rel=1e-9)
        assert est.sample(10, random_state=1).shape == (10,)
        assert clone(est).get_params()["n_starts"] == 4


@pytest.mark.slow
@pytest.mark.parametrize("mu", [1.5, 2.5])
def test_hill_mle_agreement(mu):
    x = gb2_sample(Gb2Params(mu, 1.0, 1.0, 1.0), 21, 100_000)
    h = hill_estimator(x, math.isqrt(len(x)))
    m = fit_gb2_mle(x, n_starts=4).mu
    assert abs(h - m) <= 0.2


@pytest.mark.slow
def test_mle_error_shrinks_with_n():
    def mae(n):
        errs = [abs(fit_gb2_mle(gb2_sample(P, 100 + s, n), n_starts=2).mu - P.mu) for s in range(20)]
        return float(np.mean(errs))

    assert mae(40_000) < mae(20_000)


def year_panel(cs, employees=None):
    n = len(cs)
    l = np.ones(n, dtype=int) if employees is None else np.asarray(employees)
    return Panel([f"f{i:05d}" for i in range(n)], [2000] * n, ["s"] * n, np.asarray(cs) * l, l)


class TestCuts:
    def test_top_k(self):
        panel = year_panel(np.random.default_rng(1).random(3000) * 1e7 + 1)
        out = apply_cuts(panel, CutPolicy())
        assert len(out) == 2990
        assert out.c.max() <= np.sort(panel.c)[-11]

    def test_threshold(self):
        out = apply_cuts(year_panel([2e9, 5e8]), CutPolicy("threshold", c_max=1e9))
        assert out.c.tolist() == [5e8]

    def test_none_identity(self):
        panel = year_panel([1.0, 2.0])
        assert apply_cuts(panel, CutPolicy("none")) is panel

    def test_ties_remove_later_first(self):
        panel = year_panel([5.0, 9.0, 9.0, 1.0])
        out = apply_cuts(panel, CutPolicy("top_k", k=1))
        assert list(out.firm_id) == ["f00000", "f00001", "f00003"]

    def test_too_few_firms(self):
        with pytest.warns(CutWarning):
            out = apply_cuts(year_panel([1.0, 2.0]), CutPolicy("top_k", k=5))
        assert len(out) == 0

    def test_threshold_idempotent_and_top_k_twice(self):
        panel = year_panel(np.geomspace(1e6, 1e10, 100))
        pol = CutPolicy("threshold", c_max=1e9)
        once = apply_cuts(panel, pol)
        assert apply_cuts(once, pol) == once
        twice = apply_cuts(apply_cuts(panel, CutPolicy()), CutPolicy())
        assert len(twice) == 80

    def test_accepts_record_lists(self):
        recs = [ProductivityRecord(f"f{i}", 2000, "s", float(i + 1), 1) for i in range(20)]
        assert len(apply_cuts(recs, CutPolicy())) == 10

    @pytest.mark.parametrize("text,want", [("top10", CutPolicy()), ("threshold=1e9", CutPolicy("threshold")),
                                           ("none", CutPolicy("none")), ("top3", CutPolicy(k=3))])
    def test_parse(self, text, want):
        assert CutPolicy.parse(text) == want
        assert CutPolicy.parse(str(want)) == want

    @pytest.mark.parametrize("kw", [dict(mode="top_k", k=0), dict(mode="threshold", c_max=0), dict(mode="x")])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            CutPolicy(**kw)
