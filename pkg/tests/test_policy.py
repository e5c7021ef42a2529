import numpy as np
import pytest

from bittetris.engine import PieceGenerator, reset
from bittetris.features import AfterstateBatch, afterstate_batch
from bittetris.pieces import O, T
from bittetris.policy import (
    LinearCritic,
    LinearPolicy,
    actor_distribution,
    greedy_action,
    log_prob,
    masked_softmax,
    temperature,
)

from conftest import DT10, PRE_COLUMNS


def random_batch(rng, feasible=None):
    feats = rng.normal(size=(34, 9))
    mask = np.zeros(34, dtype=np.uint8)
    n = feasible if feasible is not None else int(rng.integers(2, 35))
    mask[:n] = 1
    feats[n:] = 0.0
    return AfterstateBatch(feats, mask)


def fixture_batch(piece=T):
    gen = PieceGenerator("random", 0)
    state = reset(gen, 10)
    state.slots[:10] = PRE_COLUMNS
    state.slots[12] = piece
    return afterstate_batch(state)


class TestMaskedSoftmax:
    def test_zero_weights_uniform_over_o(self):
        probs = actor_distribution(LinearPolicy(), fixture_batch(O), tau=0.5)
        assert np.allclose(probs[:9], 1 / 9)
        assert not probs[9:].any()

    def test_masked_slots_exactly_zero_and_sum_one(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            batch = random_batch(rng)
            logits = rng.normal(scale=rng.choice([1.0, 50.0, 1e4]), size=34)
            probs = masked_softmax(logits, batch.mask)
            assert (probs[batch.mask == 0] == 0).all()
            assert abs(probs.sum() - 1.0) <= 1e-12

    def test_shift_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            batch = random_batch(rng)
            logits = rng.normal(size=34)
            for c in (-1e3, -2.5, 7.0, 1e4):
                a = masked_softmax(logits, batch.mask)
                b = masked_softmax(logits + c, batch.mask)
                assert np.allclose(a, b, atol=1e-12)

    def test_all_masked_rejected(self):
        with pytest.raises(ValueError):
            masked_softmax(np.zeros(34), np.zeros(34, dtype=np.uint8))


class TestArgmaxInvariance:
    def test_positive_scaling_preserves_argmax(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            batch = random_batch(rng)
            theta = rng.normal(size=9)
            base = np.argmax(actor_distribution(LinearPolicy(theta), batch))
            for c in (1e-3, 7.0, 1e3):
                scaled = np.argmax(actor_distribution(LinearPolicy(theta * c), batch))
                assert scaled == base

    def test_lower_temperature_preserves_argmax(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            batch = random_batch(rng)
            theta = rng.normal(size=9)
            policy = LinearPolicy(theta)
            base = np.argmax(actor_distribution(policy, batch, tau=1.0))
            assert np.argmax(actor_distribution(policy, batch, tau=0.01)) == base


class TestActorGreedyAgreement:
    def test_dt10_on_fixture_batch(self):
        batch = fixture_batch(T)
        probs = actor_distribution(LinearPolicy(DT10), batch, tau=0.5)
        scores = np.where(batch.mask != 0, batch.features @ DT10, -np.inf)
        assert np.argmax(probs) == np.argmax(scores) == greedy_action(DT10, batch)


class TestGreedyAction:
    def test_zero_weights_tie_breaks_to_lowest(self):
        assert greedy_action(np.zeros(9), fixture_batch(O)) == 0

    def test_matches_exhaustive_argmax(self):
        batch = fixture_batch(T)
        scores = batch.features @ DT10
        feasible = np.flatnonzero(batch.mask)
        assert greedy_action(DT10, batch) == feasible[np.argmax(scores[feasible])]

    def test_joint_negation_preserves_argmax(self):
        batch = fixture_batch(T)
        flipped = AfterstateBatch(-batch.features, batch.mask)
        assert greedy_action(DT10, batch) == greedy_action(-DT10, flipped)

    def test_all_masked_rejected(self):
        batch = AfterstateBatch(np.zeros((34, 9)), np.zeros(34, dtype=np.uint8))
        with pytest.raises(ValueError):
            greedy_action(np.zeros(9), batch)


class TestTemperature:
    def test_values(self):
        assert temperature(0, 0.5, 0.00025) == 0.5
        assert temperature(4000, 0.5, 0.00025) == 0.25

    def test_monotone_nonincreasing(self):
        taus = [temperature(i, 0.5, 0.00025) for i in range(0, 20000, 500)]
        assert all(a >= b for a, b in zip(taus, taus[1:]))

    def test_nonpositive_tau_rejected(self):
        with pytest.raises(ValueError):
            actor_distribution(LinearPolicy(), fixture_batch(O), tau=0.0)


class TestLogProb:
    def test_matches_distribution(self):
        rng = np.random.default_rng(4)
        batch = random_batch(rng, feasible=12)
        policy = LinearPolicy(rng.normal(size=9))
        probs = actor_distribution(policy, batch, tau=0.7)
        for a in range(12):
            assert np.isclose(log_prob(policy, batch, a, tau=0.7), np.log(probs[a]))

    def test_masked_action_rejected(self):
        batch = fixture_batch(O)
        with pytest.raises(ValueError):
            log_prob(LinearPolicy(), batch, 20)


class TestCritic:
    def test_value_is_affine(self):
        critic = LinearCritic(np.arange(9, dtype=np.float64), bias=2.0)
        feats = np.ones(9)
        assert critic.value(feats) == sum(range(9)) + 2.0
        stacked = np.stack([feats, 2 * feats])
        assert np.allclose(critic.values(stacked), [38.0, 74.0])
