"""Tests for named random streams."""

import numpy as np

from suzuki_lab.seeding import label_words, rng_for, seed_sequence, trial_rngs


class TestLabels:
    """label_words hashes a label path to four 32-bit words."""

    def test_shape(self):
        words = label_words("girth", 3)
        assert len(words) == 4
        assert all(0 <= w < 2**32 for w in words)

    def test_stable(self):
        assert label_words("walk", "pair", 7) == label_words("walk", "pair", 7)

    def test_order_matters(self):
        assert label_words("a", "b") != label_words("b", "a")

    def test_spawn_key(self):
        assert seed_sequence(5, "x").spawn_key == label_words("x")


class TestStreams:
    """rng_for depends only on (seed, labels)."""

    def test_same_name_same_stream(self):
        a = rng_for(42, "nonconc", 0).integers(0, 2**32, size=8)
        b = rng_for(42, "nonconc", 0).integers(0, 2**32, size=8)
        np.testing.assert_array_equal(a, b)

    def test_independent_of_draw_order(self):
        first = rng_for(1, "s", 1)
        rng_for(1, "s", 0).random(1000)
        second = rng_for(1, "s", 1)
        assert first.random() == second.random()

    def test_seed_changes_stream(self):
        assert rng_for(1, "s").random() != rng_for(2, "s").random()

    def test_label_changes_stream(self):
        assert rng_for(1, "s", 0).random() != rng_for(1, "s", 1).random()

    def test_philox(self):
        assert isinstance(rng_for(0, "x").bit_generator, np.random.Philox)

    def test_trial_rngs(self):
        rngs = trial_rngs(9, 3, "walk")
        assert len(rngs) == 3
        assert rngs[2].random() == rng_for(9, "walk", 2).random()
