import numpy as np
import pytest

from conftest import fast_pipeline
from mpec.data import SynthConfig, split, synth_dataset
from mpec.ensemble import (
    PipelineConfig,
    _fit_experts,
    cross_val_accuracy,
    derive_seed,
    evaluate,
    expert_scores,
    mpec_fit,
    mpec_predict,
    weak_predictions,
)
from mpec.errors import ConfigError, DegenerateLabels, EmptyInput, LengthMismatch
from mpec.features import Trial
from mpec.learners import LearnerParams, WEAK_KINDS


def accuracy(model, trials):
    return float(np.mean(mpec_predict(model, trials) == [t.label for t in trials]))


class TestEvaluate:
    def test_perfect(self):
        r = evaluate([0, 1, 2, 1], [0, 1, 2, 1])
        assert (r.precision, r.recall, r.f1, r.accuracy) == (1.0, 1.0, 1.0, 1.0)

    def test_hand_confusion(self):
        r = evaluate([0, 1, 0, 1], [0, 0, 1, 1])
        assert (r.precision, r.recall, r.f1, r.accuracy) == (0.5, 0.5, 0.5, 0.5)
        np.testing.assert_array_equal(r.confusion, [[1, 1], [1, 1]])

    def test_one_class_predicted(self):
        truth = np.repeat(np.arange(4), 5)
        r = evaluate(np.zeros(20, dtype=int), truth)
        assert r.accuracy == 0.25
        assert r.recall == pytest.approx(0.25)
        assert r.precision == pytest.approx(0.0625)

    def test_absent_classes_excluded_from_macro(self):
        r = evaluate([0, 0], [0, 0], n_classes=3)
        assert r.precision == 1.0 and len(r.per_class) == 3

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            evaluate([0, 1], [0])
        with pytest.raises(EmptyInput):
            evaluate([], [])

    def test_to_dict_is_plain(self):
        d = evaluate([0, 1], [1, 1]).to_dict()
        assert isinstance(d["confusion"], list)


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(w_cov=0.9, w_rbf=0.9), dict(w1=0.9), dict(k=0), dict(n_folds=1), dict(n_channels=0), dict(sigma=-1)],
    )
    def test_rejected(self, kwargs):
        with pytest.raises(ConfigError):
            PipelineConfig(**kwargs)

    def test_seed_derivation(self):
        assert derive_seed(1, 2) == derive_seed(1, 2)
        assert len({derive_seed(0, i) for i in range(50)}) == 50


class TestFit:
    def test_structure(self, small_model, small_corpus):
        train, _ = small_corpus
        m = small_model
        assert sum(m.cluster_sizes) == len(train)
        assert len(m.experts) == m.cluster_model.k
        assert m.meta_model.state["n_features"] == len(WEAK_KINDS) * m.class_count
        assert all(len(e.learners) == len(WEAK_KINDS) for e in m.experts)
        assert set(m.timings) == {"features", "clustering", "experts", "meta"}

    def test_learns(self, small_model, small_corpus):
        train, test = small_corpus
        assert accuracy(small_model, train) >= 0.95
        assert accuracy(small_model, test) >= 0.8

    def test_scores_and_weak_predictions(self, small_model, small_corpus):
        _, test = small_corpus
        rows, clusters = expert_scores(small_model, test)
        assert rows.shape == (len(test), 4 * small_model.class_count)
        assert set(clusters) <= set(range(small_model.cluster_model.k))
        weak = weak_predictions(small_model, test)
        assert list(weak) == [k.value for k in WEAK_KINDS]
        assert all(v.shape == (len(test),) for v in weak.values())

    def test_deterministic(self, small_corpus):
        train, test = small_corpus
        a = mpec_fit(train, fast_pipeline(), seed=8)
        b = mpec_fit(train, fast_pipeline(), seed=8)
        np.testing.assert_array_equal(expert_scores(a, test)[0], expert_scores(b, test)[0])

    def test_single_cluster(self, small_corpus):
        train, test = small_corpus
        model = mpec_fit(train, fast_pipeline(k=1), seed=0)
        assert model.cluster_model.k == 1
        assert accuracy(model, test) > 1 / 3 + 0.1

    def test_channel_subset(self, small_corpus):
        train, test = small_corpus
        model = mpec_fit(train, fast_pipeline(n_channels=3), seed=0)
        assert model.dim == 3
        assert len(model.feature_config.selected_channels) == 3
        assert mpec_predict(model, test).shape == (len(test),)

    def test_duplicate_trials_agree(self, small_model, small_corpus):
        t = small_corpus[1][0]
        pred = mpec_predict(small_model, [t, t, Trial(t.data.copy(), t.label)])
        assert len(set(pred.tolist())) == 1

    def test_trial_at_centroid(self, small_model, small_corpus, monkeypatch):
        # force the fused feature to be exactly a centroid: zero tangent vector
        import mpec.ensemble as ens

        C = small_model.cluster_model.centroids[0]
        monkeypatch.setattr(ens, "extract", lambda trials, cfg: np.stack([C] * len(trials)))
        rows, clusters = expert_scores(small_model, small_corpus[1][:2])
        assert clusters.tolist() == [0, 0]
        pred = mpec_predict(small_model, small_corpus[1][:2])
        assert pred[0] == pred[1] and 0 <= pred[0] < small_model.class_count

    def test_needs_two_classes(self, small_corpus):
        train, _ = small_corpus
        with pytest.raises(DegenerateLabels):
            mpec_fit([t for t in train if t.label == 0], fast_pipeline())
        with pytest.raises(EmptyInput):
            mpec_fit([], fast_pipeline())

    def test_single_class_cluster_gets_constant_experts(self, rng):
        X = rng.normal(size=(6, 3))
        experts = _fit_experts(X, np.full(6, 2), 3, LearnerParams(), 0)
        assert all(m.state["constant"] == 2 for m in experts)

    def test_shuffled_labels_near_chance(self):
        trials = synth_dataset(SynthConfig(4, 100, 6, 200, 1.5, 0.5, 5))
        labels = np.random.default_rng(0).permutation([t.label for t in trials])
        shuffled = [Trial(t.data, int(y)) for t, y in zip(trials, labels)]
        train, test = split(shuffled, 0.5, 1)
        model = mpec_fit(train, fast_pipeline(k=3), seed=0)
        assert abs(accuracy(model, test) - 0.25) <= 0.10


class TestCrossVal:
    def test_folds_and_range(self, small_corpus):
        mean, folds = cross_val_accuracy(small_corpus[0], fast_pipeline(), seed=0, n_folds=3)
        assert len(folds) == 3
        assert 0.0 <= mean <= 1.0
        assert mean == pytest.approx(np.mean(folds))
        assert mean >= 0.7
