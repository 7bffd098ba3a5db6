"""Belief tracker tests: exact filtering, censoring, capacity, forecasts."""

import numpy as np
import pytest

from fugrant.belief import (
    MAX_PROCESSES,
    OBSERVED_ACTIVE,
    OBSERVED_SILENT,
    UNOBSERVED,
    BeliefState,
    CapacityError,
    EvidenceContradictionError,
    _activation_table,
    _emission_vector,
    _predict,
    _prediction_table,
    device_forecast,
    emission_likelihood,
    entropy,
    forward_update,
    init_belief,
    most_likely_pattern,
    most_likely_state,
    unnormalized_joint,
)
from fugrant.model import (
    activation_probs,
    predict_activation_probs,
    sample_activations,
    sample_scenario,
    state_bits,
    state_index,
    stationary_on_probs,
    step_processes,
)
from fugrant.oracle import dense_transition_matrix
from fugrant.policies import observe_feedback, observe_limited


def make_scenario(n=3, k=4, seed=0, **kwargs):
    return sample_scenario(
        n, k, max(1, k // 2), 10, 0.5, np.random.default_rng(seed), **kwargs
    )


def all_unobserved(k):
    return np.full(k, UNOBSERVED, dtype=np.int8)


class TestInitBelief:
    def test_matches_stationary_product(self):
        cfg = make_scenario()
        belief = init_belief(cfg)
        pi = stationary_on_probs(cfg)
        for idx in range(cfg.n_states):
            bits = state_bits(idx, cfg.n_processes)
            expected = np.prod(np.where(bits, pi, 1.0 - pi))
            assert belief.weights[idx] == pytest.approx(expected)
        assert belief.weights.sum() == pytest.approx(1.0)
        assert belief.log_scale == 0.0

    def test_capacity_guard(self):
        cfg = make_scenario(n=MAX_PROCESSES + 1, k=2)
        with pytest.raises(CapacityError):
            init_belief(cfg)


class TestPredictStep:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_matches_dense_transition_matrix(self, n):
        cfg = make_scenario(n=n, k=2, seed=n)
        rng = np.random.default_rng(n + 10)
        transition = dense_transition_matrix(cfg)
        for _ in range(5):
            w = rng.random(cfg.n_states)
            w /= w.sum()
            np.testing.assert_allclose(
                _predict(w, cfg), transition @ w, atol=1e-12
            )

    def test_preserves_mass(self):
        cfg = make_scenario(n=4, k=2)
        w = np.random.default_rng(3).random(cfg.n_states)
        assert _predict(w, cfg).sum() == pytest.approx(w.sum())

    def test_does_not_mutate_input(self):
        cfg = make_scenario(n=3, k=2)
        w = init_belief(cfg).weights
        snapshot = w.copy()
        _predict(w, cfg)
        np.testing.assert_array_equal(w, snapshot)

    def test_stationary_is_fixed_point(self):
        cfg = make_scenario(n=4, k=2)
        w = init_belief(cfg).weights
        np.testing.assert_allclose(_predict(w, cfg), w, atol=1e-12)


class TestEmission:
    def test_scalar_matches_direct_product(self):
        cfg = make_scenario(n=3, k=5, seed=2)
        rng = np.random.default_rng(4)
        for _ in range(20):
            obs = rng.integers(-1, 2, size=cfg.n_devices).astype(np.int8)
            for idx in range(cfg.n_states):
                state = state_bits(idx, cfg.n_processes)
                probs = activation_probs(state, cfg)
                expected = 1.0
                for k in range(cfg.n_devices):
                    if obs[k] == OBSERVED_ACTIVE:
                        expected *= probs[k]
                    elif obs[k] == OBSERVED_SILENT:
                        expected *= 1.0 - probs[k]
                assert emission_likelihood(idx, obs, cfg) == pytest.approx(
                    expected, abs=1e-12
                )

    def test_vector_matches_scalar(self):
        cfg = make_scenario(n=3, k=5, seed=2)
        obs = np.array([1, 0, -1, 1, -1], dtype=np.int8)
        vec = _emission_vector(obs, cfg)
        expected = [
            emission_likelihood(i, obs, cfg) for i in range(cfg.n_states)
        ]
        np.testing.assert_allclose(vec, expected, atol=1e-12)

    def test_no_evidence_returns_none(self):
        cfg = make_scenario()
        assert _emission_vector(all_unobserved(cfg.n_devices), cfg) is None

    def test_table_and_fallback_agree(self, monkeypatch):
        cfg = make_scenario(n=4, k=6, seed=5)
        obs = np.array([1, 0, -1, 1, 0, -1], dtype=np.int8)
        with_table = _emission_vector(obs, cfg)
        monkeypatch.setattr("fugrant.belief._TABLE_MAX_ENTRIES", 0)
        cfg2 = make_scenario(n=4, k=6, seed=5)
        assert _activation_table(cfg2) is None
        without_table = _emission_vector(obs, cfg2)
        np.testing.assert_allclose(with_table, without_table, atol=1e-14)


class TestForwardUpdate:
    def test_normalized_after_evidence(self):
        cfg = make_scenario(n=3, k=4, seed=1)
        belief = init_belief(cfg)
        obs = np.array([1, 0, -1, -1], dtype=np.int8)
        updated = forward_update(belief, obs, cfg)
        assert updated.weights.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(updated.weights >= 0)

    def test_censoring_consistency_exact(self):
        # an all-unobserved update must equal the bare prediction step
        cfg = make_scenario(n=4, k=5, seed=3)
        belief = init_belief(cfg)
        obs = np.array([1, 0, 1, -1, -1], dtype=np.int8)
        belief = forward_update(belief, obs, cfg)
        blind = forward_update(belief, all_unobserved(cfg.n_devices), cfg)
        np.testing.assert_array_equal(blind.weights, _predict(belief.weights, cfg))
        assert blind.log_scale == belief.log_scale

    def test_log_scale_tracks_evidence_mass(self):
        cfg = make_scenario(n=2, k=3, seed=6)
        belief = init_belief(cfg)
        obs = np.array([1, 1, 0], dtype=np.int8)
        predicted = _predict(belief.weights, cfg)
        emission = _emission_vector(obs, cfg)
        updated = forward_update(belief, obs, cfg)
        np.testing.assert_allclose(
            unnormalized_joint(updated), predicted * emission, atol=1e-12
        )

    def test_contradiction_raises(self):
        # device 0 can only activate when process 0 is On, and process 0 is
        # frozen Off, so seeing it active is impossible
        cfg = make_scenario(n=2, k=2, seed=0).replace(
            eps0=[1.0, 0.2], eps1=[0.0, 0.3], q=[[1.0, 0.0], [0.0, 0.5]]
        )
        belief = BeliefState(np.array([1.0, 0.0, 0.0, 0.0]), 0.0)
        obs = np.array([OBSERVED_ACTIVE, UNOBSERVED], dtype=np.int8)
        with pytest.raises(EvidenceContradictionError):
            forward_update(belief, obs, cfg)

    def test_feedback_sharpens_on_average(self):
        # conditioning can raise entropy on individual draws; the guarantee
        # is in expectation, so compare means over randomized trials
        rng = np.random.default_rng(11)
        diffs_unobs, diffs_limited = [], []
        for trial in range(300):
            cfg = make_scenario(
                n=int(rng.integers(1, 5)), k=int(rng.integers(2, 7)), seed=trial
            )
            belief = init_belief(cfg)
            state = (rng.random(cfg.n_processes) < stationary_on_probs(cfg)).astype(
                np.uint8
            )
            for _ in range(3):
                state = step_processes(state, cfg, rng)
                acts = sample_activations(state, cfg, rng)
                grants = np.zeros(cfg.n_devices, dtype=np.uint8)
                grants[rng.permutation(cfg.n_devices)[: cfg.n_slots]] = 1
                fb = forward_update(belief, observe_feedback(acts), cfg)
                lim = forward_update(belief, observe_limited(grants, acts), cfg)
                blind = forward_update(belief, all_unobserved(cfg.n_devices), cfg)
                diffs_unobs.append(entropy(fb) - entropy(blind))
                diffs_limited.append(entropy(fb) - entropy(lim))
                belief = fb
        assert np.mean(diffs_unobs) < 0
        assert np.mean(diffs_limited) < 0


class TestMapState:
    def test_argmax_and_tie_break(self):
        mode = most_likely_state(BeliefState(np.array([0.1, 0.5, 0.3, 0.1])))
        assert state_index(mode) == 1
        # equal maxima resolve to the lowest state index
        tied = most_likely_state(BeliefState(np.array([0.3, 0.3, 0.3, 0.1])))
        assert state_index(tied) == 0

    def test_pattern_thresholds_predictor(self):
        cfg = make_scenario(n=2, k=4, seed=8)
        state = np.array([1, 0], dtype=np.uint8)
        pattern = most_likely_pattern(state, cfg)
        np.testing.assert_array_equal(
            pattern, (predict_activation_probs(state, cfg) > 0.5).astype(np.uint8)
        )


class TestDeviceForecast:
    def test_map_state_mode(self):
        cfg = make_scenario(n=3, k=4, seed=9)
        belief = init_belief(cfg)
        map_bits = most_likely_state(belief)
        np.testing.assert_allclose(
            device_forecast(belief, cfg, "map_state"),
            predict_activation_probs(map_bits, cfg),
        )

    def test_marginal_mode_weights_all_states(self):
        cfg = make_scenario(n=3, k=4, seed=10)
        belief = forward_update(
            init_belief(cfg), np.array([1, -1, 0, -1], dtype=np.int8), cfg
        )
        expected = np.zeros(cfg.n_devices)
        for idx in range(cfg.n_states):
            expected += belief.weights[idx] * predict_activation_probs(
                state_bits(idx, cfg.n_processes), cfg
            )
        np.testing.assert_allclose(
            device_forecast(belief, cfg, "marginal"), expected, atol=1e-12
        )

    def test_marginal_fallback_matches_table(self, monkeypatch):
        cfg = make_scenario(n=3, k=4, seed=10)
        belief = init_belief(cfg)
        with_table = device_forecast(belief, cfg, "marginal")
        monkeypatch.setattr("fugrant.belief._TABLE_MAX_ENTRIES", 0)
        cfg2 = make_scenario(n=3, k=4, seed=10)
        assert _prediction_table(cfg2) is None
        np.testing.assert_allclose(
            device_forecast(init_belief(cfg2), cfg2, "marginal"),
            with_table,
            atol=1e-14,
        )

    def test_unknown_mode_rejected(self):
        cfg = make_scenario()
        with pytest.raises(ValueError, match="forecast mode"):
            device_forecast(init_belief(cfg), cfg, "bogus")


class TestEntropy:
    def test_point_mass_zero(self):
        assert entropy(BeliefState(np.array([0.0, 1.0]))) == pytest.approx(0.0)

    def test_uniform_is_log_n(self):
        b = BeliefState(np.full(8, 1 / 8))
        assert entropy(b) == pytest.approx(np.log(8))
