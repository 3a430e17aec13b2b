import numpy as np
import pytest
from scipy import stats

import spectramap as sm
from spectramap.errors import ConfigurationError, OptimizationError
from spectramap.optim import EdgeSampler, _build_alias_table


class TestAliasTable:
    def test_single_edge_always_drawn(self, k2_graph):
        sampler = EdgeSampler(k2_graph)
        rng = np.random.default_rng(0)
        idx = sampler.sample_edges(rng, 1000)
        assert np.all(idx == 0)

    def test_two_to_one_ratio(self):
        dense = np.zeros((3, 3))
        dense[0, 1] = dense[1, 0] = 2.0 / 3.0
        dense[1, 2] = dense[2, 1] = 1.0 / 3.0
        V = sm.SimilarityGraph.from_dense(dense)
        sampler = EdgeSampler(V)
        rng = np.random.default_rng(1)
        idx = sampler.sample_edges(rng, 1_000_000)
        frac = (idx == 0).mean()
        assert abs(frac - 2.0 / 3.0) < 0.01

    def test_chi_square_on_pipeline_graph(self, two_blob_graph):
        sampler = EdgeSampler(two_blob_graph)
        rng = np.random.default_rng(2)
        draws = sampler.sample_edges(rng, 1_000_000)
        counts = np.bincount(draws, minlength=sampler.weights.size)
        expected = sampler.weights / sampler.weights.sum() * draws.size
        _, pvalue = stats.chisquare(counts, expected)
        assert pvalue > 0.001

    def test_orientations_balanced(self, k2_graph):
        sampler = EdgeSampler(k2_graph)
        rng = np.random.default_rng(3)
        pairs = sampler.sample_ordered_pairs(rng, 100_000)
        frac = (pairs[:, 0] == 0).mean()
        assert abs(frac - 0.5) < 0.01

    def test_alias_table_probabilities_normalized(self):
        rng = np.random.default_rng(4)
        w = rng.uniform(0.01, 1.0, size=37)
        prob, alias = _build_alias_table(w)
        assert prob.shape == alias.shape == (37,)
        assert np.all((0.0 <= prob) & (prob <= 1.0 + 1e-12))


class TestNegativeSampling:
    def test_uniform_frequencies(self):
        rng = np.random.default_rng(5)
        draws = sm.sample_negatives(4, 1_000_000, rng)
        freq = np.bincount(draws, minlength=4) / draws.size
        assert np.all(np.abs(freq - 0.25) < 0.01 * 0.25 + 0.005)


class TestInitEmbedding:
    def test_spectral_path_three(self, p3_graph):
        emb = sm.init_embedding(p3_graph, 1, "spectral", 0)
        sol = sm.spectral_init(p3_graph, 1)
        expected = sol.vectors * (10.0 / np.abs(sol.vectors).max())
        np.testing.assert_allclose(emb.coords, expected)
        assert np.abs(emb.coords).max() == pytest.approx(10.0)
        assert emb.provenance == "spectral"

    def test_random_deterministic(self, p3_graph):
        a = sm.init_embedding(p3_graph, 2, "random", 7)
        b = sm.init_embedding(p3_graph, 2, "random", 7)
        assert np.array_equal(a.coords, b.coords)
        assert np.abs(a.coords).max() <= 10.0

    def test_unknown_mode_rejected(self, p3_graph):
        with pytest.raises(ConfigurationError):
            sm.init_embedding(p3_graph, 1, "pca", 0)


def small_config(**kw):
    base = dict(n_epochs=5, n_neg=2, initial_lr=0.5, seed=1)
    base.update(kw)
    return sm.OptimizerConfig(**base)


class TestOptimize:
    def test_zero_samples_is_identity(self, two_blob_graph):
        Y0 = sm.init_embedding(two_blob_graph, 2, "random", 3)
        cfg = small_config(n_epochs=1, samples_per_epoch=0)
        res = sm.optimize(two_blob_graph, Y0, sm.KernelParams.cauchy(), cfg)
        assert np.array_equal(res.embedding.coords, Y0.coords)

    def test_two_point_attraction_contracts(self, k2_graph):
        Y0 = sm.Embedding(np.array([[0.0, 0.0], [3.0, 0.0]]), "external")
        cfg = sm.OptimizerConfig(n_epochs=10, n_neg=0, initial_lr=0.1, seed=0)
        res = sm.optimize(k2_graph, Y0, sm.KernelParams.gaussian(1.0), cfg,
                          track_loss=False)
        # distance strictly decreases every epoch under pure attraction
        assert np.linalg.norm(np.diff(res.embedding.coords, axis=0)) < 3.0

    def test_deterministic_end_to_end(self, two_blob_graph):
        Y0 = sm.init_embedding(two_blob_graph, 2, "spectral", 9)
        cfg = small_config(n_epochs=3)
        p = sm.KernelParams.cauchy(1.5, 0.9)
        a = sm.optimize(two_blob_graph, Y0, p, cfg)
        b = sm.optimize(two_blob_graph, Y0, p, cfg)
        assert np.array_equal(a.embedding.coords, b.embedding.coords)
        assert a.self_collisions == b.self_collisions

    def test_learning_rate_schedule_exact(self, two_blob_graph):
        Y0 = sm.init_embedding(two_blob_graph, 2, "random", 5)
        cfg = small_config(n_epochs=4, initial_lr=0.8, samples_per_epoch=5)
        res = sm.optimize(two_blob_graph, Y0, sm.KernelParams.cauchy(), cfg)
        alphas = [rec.alpha for rec in res.trace]
        expected = [0.8 * (1.0 - e / 4) for e in range(5)]
        assert alphas == expected

    def test_loss_recorded_every_epoch(self, two_blob_graph):
        Y0 = sm.init_embedding(two_blob_graph, 2, "spectral", 5)
        cfg = small_config(n_epochs=3)
        res = sm.optimize(two_blob_graph, Y0, sm.KernelParams.cauchy(), cfg)
        assert len(res.trace) == 4
        assert all(rec.loss is not None for rec in res.trace)

    def test_move_other_mirrors_attraction(self, k2_graph):
        Y0 = sm.Embedding(np.array([[0.0, 0.0], [2.0, 0.0]]), "external")
        p = sm.KernelParams.gaussian(1.0)
        cfg = sm.OptimizerConfig(
            n_epochs=1, n_neg=0, initial_lr=0.1, seed=0, move_other=True,
            samples_per_epoch=1,
        )
        res = sm.optimize(k2_graph, Y0, p, cfg, track_loss=False)
        moved = res.embedding.coords
        # both endpoints moved toward each other by the same amount
        np.testing.assert_allclose(moved[0] + moved[1], Y0.coords[0] + Y0.coords[1])
        assert moved[0, 0] > 0.0 and moved[1, 0] < 2.0

    def test_nan_aborts_with_epoch(self, k2_graph):
        Y0 = sm.Embedding(np.array([[0.0, 0.0], [1.0, 0.0]]), "external")
        cfg = sm.OptimizerConfig(
            n_epochs=1, n_neg=0, initial_lr=1e308, seed=0, samples_per_epoch=5
        )
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(OptimizationError, match="epoch 0"):
                sm.optimize(k2_graph, Y0, sm.KernelParams.gaussian(1.0), cfg,
                            track_loss=False)

    def test_self_collisions_counted(self, k2_graph):
        Y0 = sm.Embedding(np.array([[0.0, 0.0], [1.0, 0.0]]), "external")
        cfg = sm.OptimizerConfig(
            n_epochs=1, n_neg=5, initial_lr=0.01, seed=0, samples_per_epoch=200
        )
        res = sm.optimize(k2_graph, Y0, sm.KernelParams.cauchy(), cfg,
                          track_loss=False)
        # with n = 2 roughly half of 1000 negative draws hit the anchor
        assert 350 <= res.self_collisions <= 650

    def test_loss_decreases_on_two_blobs(self, two_blob_graph):
        Y0 = sm.init_embedding(two_blob_graph, 2, "spectral", 42)
        fit = sm.fit_ab(0.1)
        p = sm.KernelParams.cauchy(fit.fitted_a, fit.fitted_b)
        cfg = sm.OptimizerConfig(n_epochs=30, n_neg=5, seed=42)
        res = sm.optimize(two_blob_graph, Y0, p, cfg)
        assert res.trace[-1].loss.total < res.trace[0].loss.total

    def test_trace_jsonl_round_trip(self, two_blob_graph, tmp_path):
        import json

        Y0 = sm.init_embedding(two_blob_graph, 2, "spectral", 1)
        cfg = small_config(n_epochs=2)
        res = sm.optimize(two_blob_graph, Y0, sm.KernelParams.cauchy(), cfg)
        path = tmp_path / "trace.jsonl"
        res.write_trace_jsonl(path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 3
        first = json.loads(lines[0])
        assert {"epoch", "alpha", "total", "attract", "repel"} <= set(first)


class TestExpectationLink:
    def test_epoch_mean_matches_expected_loss(self, two_blob_graph):
        """Average sampled step loss (updates disabled) scales to the
        closed-form epoch expectation within Monte Carlo error."""
        rng = np.random.default_rng(30)
        V = two_blob_graph
        Y = rng.uniform(-1.0, 1.0, size=(V.n, 2))
        p = sm.KernelParams.cauchy(1.5, 1.0)
        n_neg = 5
        sampler = EdgeSampler(V)
        n_samples = 20_000
        pairs = sampler.sample_ordered_pairs(rng, n_samples)
        negs = sm.sample_negatives(V.n, n_samples * n_neg, rng).reshape(
            n_samples, n_neg
        )
        losses = np.array(
            [
                sm.stochastic_step_loss(pairs[s, 0], pairs[s, 1], negs[s], Y, p)
                for s in range(n_samples)
            ]
        )
        scale = V.total_weight()
        mc = scale * losses.mean()
        se = scale * losses.std(ddof=1) / np.sqrt(n_samples)
        expected = sm.expected_sgd_loss(V, Y, p, n_neg)
        assert abs(mc - expected) <= 3.0 * se
