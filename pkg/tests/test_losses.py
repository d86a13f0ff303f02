import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simgrasp.losses import (
    LossError,
    LossWeights,
    bce_with_logits,
    sample_top_directions,
    select_seeds,
    smooth_l1,
    smooth_l1_grad,
    total_loss,
)


def test_smooth_l1_examples():
    assert smooth_l1([0.3, -2.0], [0.3, -2.0]) == 0.0
    assert smooth_l1([0.5], [0.0]) == pytest.approx(0.125, abs=1e-12)
    assert smooth_l1([3.0], [0.0]) == pytest.approx(2.5, abs=1e-12)


def test_smooth_l1_scalar_oracle(rng):
    p, t = rng.normal(size=50) * 2, rng.normal(size=50)
    per = [0.5 * (a - b) ** 2 if abs(a - b) < 1 else abs(a - b) - 0.5 for a, b in zip(p, t)]
    assert smooth_l1(p, t) == pytest.approx(sum(per) / 50, abs=1e-12)


def test_smooth_l1_gradient_matches_central_differences(rng):
    p, t = rng.normal(size=20) * 2, rng.normal(size=20)
    g = smooth_l1_grad(p, t)
    h = 1e-6
    for i in range(20):
        e = np.zeros(20)
        e[i] = h
        fd = (smooth_l1(p + e, t) - smooth_l1(p - e, t)) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=1e-4)


def test_bce_examples():
    assert bce_with_logits([0.0], [0.5]) == pytest.approx(math.log(2), abs=1e-12)
    assert bce_with_logits([1000.0], [1.0]) == pytest.approx(0.0, abs=1e-12)
    assert bce_with_logits([-1000.0], [0.0]) == pytest.approx(0.0, abs=1e-12)


def test_bce_stable_at_huge_logits():
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        assert bce_with_logits([1e6, -1e6], [1.0, 0.0]) == 0.0
        assert bce_with_logits([1e6], [0.0]) == pytest.approx(1e6)


def test_bce_matches_naive_form_in_safe_range(rng):
    z = rng.uniform(-20, 20, size=100)
    t = rng.uniform(0, 1, size=100)
    s = 1 / (1 + np.exp(-z))
    naive = -np.mean(t * np.log(s) + (1 - t) * np.log(1 - s))
    assert bce_with_logits(z, t) == pytest.approx(naive, rel=1e-9)


def test_bce_rejects_bad_targets():
    with pytest.raises(LossError):
        bce_with_logits([0.0], [1.5])


def test_length_mismatch():
    with pytest.raises(LossError):
        smooth_l1([1, 2], [1])


def test_total_loss():
    assert total_loss(1, 1, 1, LossWeights(1, 1, 1)) == 3.0
    assert total_loss(0.2, 0.7, 1.3, LossWeights(0, 0, 1)) == 1.3


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 100), min_size=3, max_size=3), st.lists(st.floats(0, 10), min_size=3, max_size=3))
def test_total_loss_oracle(parts, weights):
    if not any(weights):
        weights[0] = 1.0
    expected = sum(w * p for w, p in zip(weights, parts))
    assert total_loss(*parts, LossWeights(*weights)) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_weights_validation():
    with pytest.raises(LossError):
        LossWeights(0, 0, 0)
    with pytest.raises(LossError):
        LossWeights(-1, 1, 1)
    with pytest.raises(LossError):
        total_loss(float("nan"), 0, 0)


def test_select_seeds():
    assert select_seeds([0.1, 0.2], 0.5).size == 0
    assert select_seeds([0.5, 0.6, 0.4], 0.5).tolist() == [1]


def test_select_seeds_oracle(rng):
    a = rng.uniform(size=300)
    assert select_seeds(a, 0.37).tolist() == [i for i, x in enumerate(a) if x > 0.37]


@pytest.mark.parametrize("seed", range(5))
def test_one_hot_draw(seed):
    assert sample_top_directions([0, 0, 1, 0], 1, seed).tolist() == [2]


def test_uniform_draw_is_a_permutation():
    assert sorted(sample_top_directions([0.5] * 4, 4, 11).tolist()) == [0, 1, 2, 3]


def test_draw_needs_positive_mass():
    with pytest.raises(LossError):
        sample_top_directions([0, 1, 0], 2, 0)


def test_first_draw_frequency():
    s = np.array([0.1, 0.4, 0.2, 1.0, 0.3])
    p = s / s.sum()
    n = 100_000
    counts = np.bincount([sample_top_directions(s, 1, seed)[0] for seed in range(n)], minlength=5)
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 3 * sigma)
