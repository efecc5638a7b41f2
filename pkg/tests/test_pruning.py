import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cnp_sample
from rankprune.classifier import FitConfig, fit, predict
from rankprune.data import Dataset, NoiseRates, complete_rates, rates_from_pi1_rho1
from rankprune.errors import OverPrune, RankOutOfRange
from rankprune.pruning import prune, rank_prune_fit, removal_count, select_kth
from rankprune.synthetic import evaluate


class TestSelect:
    def test_examples(self):
        v = [5, 1, 4, 1, 3]
        assert select_kth(v, 1) == 1
        assert select_kth(v, 2) == 1
        assert select_kth(v, 3) == 3
        assert select_kth(v, 1, "largest") == 5
        assert select_kth(v, 5, "largest") == 1

    def test_bounds(self):
        with pytest.raises(RankOutOfRange):
            select_kth([1.0, 2.0], 0)
        with pytest.raises(RankOutOfRange):
            select_kth([1.0, 2.0], 3)
        with pytest.raises(RankOutOfRange):
            select_kth([], 1)

    def test_rejects_nan_and_bad_direction(self):
        with pytest.raises(ValueError):
            select_kth([1.0, np.nan], 1)
        with pytest.raises(ValueError):
            select_kth([1.0], 1, "middle")

    def test_sort_oracle(self):
        rng = np.random.default_rng(0)
        for i in range(1000):
            n = int(rng.integers(1, 300))
            v = rng.integers(0, 10, n).astype(float) if i % 2 else rng.normal(size=n)
            k = int(rng.integers(1, n + 1))
            srt = np.sort(v)
            assert select_kth(v, k) == srt[k - 1]
            assert select_kth(v, k, "largest") == srt[n - k]

    def test_all_equal_large(self):
        assert select_kth(np.full(10_000, 0.25), 5000) == 0.25

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200), st.data())
    def test_property(self, values, data):
        k = data.draw(st.integers(1, len(values)))
        assert select_kth(values, k) == sorted(values)[k - 1]


def test_removal_count_slack():
    assert removal_count(0.3, 10) == 3
    assert removal_count(0.1 + 0.2, 10) == 3
    assert removal_count(0.29, 10) == 2


class TestPrune:
    def test_example(self):
        g = np.array([0.9, 0.8, 0.3, 0.7, 0.2, 0.1])
        s = np.array([1, 1, 1, 1, 0, 0])
        rates = complete_rates(0.0, 0.5, 4 / 6)
        # pi1 = 0.5 * (1 - p_y1) / p_s1 with p_y1 = (2/3 - 0.5) / 0.5 = 1/3
        assert rates.pi1 == pytest.approx(0.5)
        pr = prune(g, s, rates)
        assert pr.removed_pos == 2
        assert pr.k1_threshold == 0.8
        assert pr.kept_indices.tolist() == [0, 1, 4, 5]

    def test_single_removal(self):
        g = np.array([0.9, 0.3, 0.8, 0.7, 0.2, 0.1, 0.4, 0.6, 0.5, 0.35])
        s = np.ones(10, dtype=int)
        s[[5, 9]] = 0
        rates = rates_from_pi1_rho1(1 / 8, 0.0, 0.5)
        assert removal_count(rates.pi1, 8) == 1
        pr = prune(g, s, rates)
        assert pr.k1_threshold == 0.3
        assert 4 not in pr.kept_indices.tolist()
        assert pr.removed_pos == 1

    def test_zero_noise_keeps_all(self, six_point):
        g, s = six_point
        pr = prune(g, s, complete_rates(0.0, 0.0, 0.5))
        assert pr.kept_indices.tolist() == list(range(6))
        assert np.all(pr.weights == 1.0)

    def test_weights(self, six_point):
        g, s = six_point
        rates = complete_rates(0.2, 0.1, 0.5)
        pr = prune(g, s, rates)
        kept_s = s[pr.kept_indices]
        np.testing.assert_allclose(pr.weights[kept_s == 1], 1 / 0.8)
        np.testing.assert_allclose(pr.weights[kept_s == 0], 1 / 0.9)

    def test_ties_at_cut_are_kept(self):
        g = np.array([0.5, 0.5, 0.5, 0.9, 0.1, 0.1])
        s = np.array([1, 1, 1, 1, 0, 0])
        rates = rates_from_pi1_rho1(0.25, 0.0, 0.5)
        pr = prune(g, s, rates)
        assert pr.target_removed_pos == 1
        assert pr.removed_pos == 0

    def test_overprune(self):
        g = np.array([0.9, 0.1, 0.2])
        s = np.array([1, 0, 0])
        # a pi1 within rounding of 1 would drop the only observed positive
        rates = NoiseRates(0.0, 0.5, 1 - 1e-12, 0.0, 1 / 3, 0.5, clamped=True)
        with pytest.raises(OverPrune):
            prune(g, s, rates)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(3)
        g = rng.random(300)
        s = (rng.random(300) < 0.4).astype(int)
        rates = complete_rates(0.2, 0.1, s.mean())
        a = prune(g, s, rates).kept_indices
        b = prune(g**3, s, rates).kept_indices
        assert np.array_equal(a, b)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.integers(50, 600),
    st.floats(0.15, 0.85),
    st.floats(0.0, 0.45),
    st.floats(0.0, 0.45),
)
def test_range_separable_g_prunes_exactly_the_noise(seed, n, p_y1, rho1, rho0):
    rng = np.random.default_rng(seed)
    y, s = cnp_sample(rng, n, p_y1, rho1, rho0)
    if s.min() == s.max() or y.min() == y.max():
        return
    g = np.where(y == 1, 0.5 + 0.5 * rng.random(n), 0.5 * rng.random(n))
    r1 = np.count_nonzero((y == 1) & (s == 0)) / np.count_nonzero(y == 1)
    r0 = np.count_nonzero((y == 0) & (s == 1)) / np.count_nonzero(y == 0)
    if r1 + r0 >= 1 - 1e-6:
        return
    rates = complete_rates(r1, r0, s.mean())
    try:
        pr = prune(g, s, rates)
    except OverPrune:
        # every observed example in one class is mislabeled
        assert np.all(s[s == 1] != y[s == 1]) or np.all(s[s == 0] != y[s == 0])
        return
    assert pr.kept_indices.tolist() == np.flatnonzero(s == y).tolist()


def test_rank_prune_without_noise_matches_plain_fit(blobs):
    rng = np.random.default_rng(1)
    test_X = np.vstack([rng.normal(2.0, 1.0, (300, 2)), rng.normal(-1.0, 1.0, (700, 2))])
    test_y = np.r_[np.ones(300), np.zeros(700)].astype(int)
    res = rank_prune_fit(blobs)
    plain = fit(blobs, blobs.observed_labels)
    f_rp = evaluate(predict(res.model, test_X), test_y).f1
    f_plain = evaluate(predict(plain, test_X), test_y).f1
    assert abs(f_rp - f_plain) <= 0.01
    assert res.estimate.rho1_conf is not None


def test_rank_prune_override_skips_counts(blobs):
    rates = complete_rates(0.0, 0.0, blobs.observed_labels.mean())
    res = rank_prune_fit(blobs, rates_override=rates)
    assert res.rates is rates
    assert res.estimate.counts is None
    assert res.prune.kept_indices.size == blobs.n


def test_rank_prune_recovers_from_flips():
    rng = np.random.default_rng(5)
    n = 2000
    y = (rng.random(n) < 0.4).astype(int)
    X = np.where(y[:, None] == 1, 1.5, -1.5) + rng.normal(size=(n, 2))
    s = np.where(rng.random(n) < np.where(y == 1, 0.3, 0.1), 1 - y, y)
    res = rank_prune_fit(Dataset(X, s, y), cfg=FitConfig())
    assert abs(res.rates.rho1 - 0.3) < 0.1
    assert abs(res.rates.rho0 - 0.1) < 0.1
    assert evaluate(predict(res.model, X), y).error < 0.05
