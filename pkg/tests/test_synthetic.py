import math

import numpy as np
import pytest

from rankprune.classifier import FitConfig
from rankprune.data import Dataset
from rankprune.errors import InfeasibleConfig, InvalidRates, LengthMismatch, MissingHiddenLabels
from rankprune.synthetic import (
    POS_VARIANCE,
    SynthConfig,
    average_precision,
    bayes_overlap,
    corrupt,
    evaluate,
    generate,
    ideal_g,
    plan_sweep,
    run_sweep,
    trial_rng,
)


class TestGenerate:
    def test_empty(self):
        d = generate(SynthConfig(n=0), np.random.default_rng(0))
        assert d.features.shape == (0, 2)

    def test_class_moments(self):
        cfg = SynthConfig(d=3.0, dim=3, n=20000, p_y1=0.3)
        d = generate(cfg, np.random.default_rng(1))
        y = d.hidden_labels
        assert int(y.sum()) == 6000
        Xp, Xn = d.features[y == 1], d.features[y == 0]
        # 5 standard errors on every coordinate
        assert np.all(np.abs(Xp.mean(0) - 3.0) < 5 * math.sqrt(POS_VARIANCE / Xp.shape[0]))
        assert np.all(np.abs(Xn.mean(0)) < 5 * math.sqrt(1 / Xn.shape[0]))
        np.testing.assert_allclose(np.cov(Xp.T), POS_VARIANCE * np.eye(3), atol=0.06)
        np.testing.assert_allclose(np.cov(Xn.T), np.eye(3), atol=0.06)

    def test_added_noise(self):
        cfg = SynthConfig(n=1001, noise_frac=0.5)
        d = generate(cfg, np.random.default_rng(2))
        assert int(d.noise_origin.sum()) == 500
        noise = d.features[d.noise_origin]
        assert noise.min() >= -10 and noise.max() <= 10
        assert np.array_equal(d.observed_labels, d.hidden_labels)

    def test_infeasible_pair(self):
        with pytest.raises(InfeasibleConfig):
            SynthConfig(pi1=0.9, rho1=0.0, p_y1=0.2)


class TestCorrupt:
    def test_identity(self):
        y = np.array([0, 1, 1, 0])
        c = corrupt(y, 0.0, 0.0, np.random.default_rng(0))
        assert np.array_equal(c.s, y)
        assert c.realized_rho1 == 0 and c.realized_rho0 == 0

    def test_rates_within_binomial_interval(self):
        y = np.r_[np.ones(10000), np.zeros(10000)].astype(int)
        c = corrupt(y, 0.3, 0.1, np.random.default_rng(4))
        assert abs(c.realized_rho1 - 0.3) < 4 * math.sqrt(0.3 * 0.7 / 10000)
        assert abs(c.realized_rho0 - 0.1) < 4 * math.sqrt(0.1 * 0.9 / 10000)
        assert c.flips_pos == np.count_nonzero((y == 1) & (c.s == 0))

    @pytest.mark.parametrize("r", [(0.6, 0.5), (-0.1, 0.0), (1.0, 0.0)])
    def test_invalid(self, r):
        with pytest.raises(InvalidRates):
            corrupt([0, 1], *r, np.random.default_rng(0))


def test_ideal_g():
    d = Dataset(np.zeros((3, 1)), [0, 1, 1], [1, 0, 1])
    assert ideal_g(d, 0.3, 0.1).g.tolist() == [0.7, 0.1, 0.7]
    with pytest.raises(MissingHiddenLabels):
        ideal_g(Dataset(np.zeros((1, 1)), [0]), 0.1, 0.1)


def test_bayes_overlap_vanishes_with_separation():
    cfg = SynthConfig(d=12.0, n=2000)
    d = generate(cfg, np.random.default_rng(0))
    assert bayes_overlap(d.features, d.hidden_labels, cfg) < 1e-6
    near = cfg.replace(d=0.5)
    d2 = generate(near, np.random.default_rng(0))
    assert bayes_overlap(d2.features, d2.hidden_labels, near) > 0.01


class TestEvaluate:
    def test_example(self):
        m = evaluate([1, 1, 0, 1, 0, 0], [1, 0, 1, 1, 0, 1])
        # TP=2 FP=1 FN=2
        assert m.f1 == pytest.approx(2 * (2 / 3) * 0.5 / (2 / 3 + 0.5))
        assert m.error == 0.5
        assert m.auc_pr is None

    def test_small_counts(self):
        m = evaluate([1, 1, 1, 0], [1, 1, 0, 1])
        assert m.f1 == pytest.approx(2 / 3)
        assert m.error == 0.5

    def test_no_positives(self):
        assert evaluate([0, 0], [0, 0]).f1 == 0.0

    def test_length(self):
        with pytest.raises(LengthMismatch):
            evaluate([0, 1], [0])


class TestAveragePrecision:
    def test_perfect(self):
        assert average_precision([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0

    def test_hand_value(self):
        # ranks: 1 (pos) 0 (neg) 1 (pos): AP = (1/1 + 2/3) / 2
        assert average_precision([0.9, 0.5, 0.2], [1, 0, 1]) == pytest.approx(5 / 6)

    def test_ties_form_one_step(self):
        assert average_precision([0.5, 0.5], [1, 0]) == pytest.approx(0.5)

    def test_matches_reference(self):
        from sklearn.metrics import average_precision_score

        rng = np.random.default_rng(0)
        for _ in range(20):
            t = rng.integers(0, 2, 200)
            if t.sum() == 0:
                continue
            sc = np.round(rng.random(200), 2)
            assert average_precision(sc, t) == pytest.approx(average_precision_score(t, sc), abs=1e-12)

    def test_random_scores_near_prevalence(self):
        rng = np.random.default_rng(1)
        t = (rng.random(20000) < 0.3).astype(int)
        assert abs(average_precision(rng.random(20000), t) - t.mean()) < 0.02


def test_trial_rng_independent_streams():
    a, ta = trial_rng(7, (0, 0, 0))
    b, tb = trial_rng(7, (0, 0, 1))
    a2, ta2 = trial_rng(7, (0, 0, 0))
    assert ta == ta2 and ta != tb
    assert a.random() == a2.random()


class TestSweep:
    cfg = SynthConfig(n=300, trials=2, seed=3)
    fit_cfg = FitConfig(max_iters=100)

    def test_plan_validation(self):
        with pytest.raises(InfeasibleConfig):
            plan_sweep("d", [], [(0, 0)], self.cfg)
        with pytest.raises(InfeasibleConfig):
            plan_sweep("d", [1], [], self.cfg)
        with pytest.raises(InfeasibleConfig):
            plan_sweep("colour", [1], [(0, 0)], self.cfg)
        with pytest.raises(InfeasibleConfig):
            plan_sweep("d", [1], [(0, 0)], self.cfg, methods=["magic"])
        with pytest.raises(InfeasibleConfig):
            plan_sweep("n", [10.5], [(0, 0)], self.cfg)
        with pytest.raises(InfeasibleConfig):
            plan_sweep("d", [1], [(0.95, 0.0)], self.cfg)

    def test_order_and_determinism(self):
        kw = dict(axis="d", values=[2.0, 4.0], pairs=[(0.0, 0.0), (0.25, 0.25)], cfg=self.cfg,
                  fit_cfg=self.fit_cfg)
        a = run_sweep(**kw)
        assert len(a) == 2 * 2 * 2 * 4
        keys = [(r.axis_value, r.pi1, r.trial) for r in a[::4]]
        assert keys == sorted(keys)
        strip = lambda rs: [r.to_row() for r in rs]  # noqa: E731
        assert strip(a) == strip(run_sweep(**kw))
        assert strip(a) == strip(run_sweep(**kw, workers=2))

    def test_noise_free_pair_naive_equals_truth(self):
        recs = run_sweep("d", [3.0], [(0.0, 0.0)], self.cfg, methods=("naive", "truth"),
                         fit_cfg=self.fit_cfg)
        for naive, truth in zip(recs[::2], recs[1::2]):
            assert naive.f1 == truth.f1 and naive.error == truth.error
