"""Reference loss terms and inference-side selection helpers.

Plain numpy, meant as parity oracles for external training code.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LossError(ValueError):
    pass


@dataclass(frozen=True)
class LossWeights:
    lambda_aff: float = 1.0
    lambda_dir: float = 1.0
    lambda_score: float = 1.0

    def __post_init__(self):
        w = (self.lambda_aff, self.lambda_dir, self.lambda_score)
        if min(w) < 0:
            raise LossError("loss weights must be >= 0")
        if not any(w):
            raise LossError("at least one loss weight must be non-zero")


def _pair(pred, target):
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(target, dtype=np.float64).reshape(-1)
    if p.shape != t.shape:
        raise LossError(f"length mismatch: {p.size} vs {t.size}")
    if p.size == 0:
        raise LossError("empty input")
    return p, t


def smooth_l1(pred, target, beta: float = 1.0) -> float:
    """Mean Huber-style loss: quadratic below ``beta``, linear above."""
    if not beta > 0:
        raise LossError("beta must be > 0")
    p, t = _pair(pred, target)
    x = np.abs(p - t)
    return float(np.mean(np.where(x < beta, 0.5 * x * x / beta, x - 0.5 * beta)))


def smooth_l1_grad(pred, target, beta: float = 1.0) -> np.ndarray:
    """Gradient of :func:`smooth_l1` with respect to ``pred``."""
    p, t = _pair(pred, target)
    x = p - t
    return np.where(np.abs(x) < beta, x / beta, np.sign(x)) / p.size


def bce_with_logits(logits, targets) -> float:
    """Mean binary cross-entropy on logits, in the overflow-free form."""
    z, t = _pair(logits, targets)
    if np.any((t < 0) | (t > 1)):
        raise LossError("targets must lie in [0, 1]")
    return float(np.mean(np.maximum(z, 0.0) - z * t + np.log1p(np.exp(-np.abs(z)))))


def total_loss(l_aff: float, l_dir: float, l_score: float, w: LossWeights = LossWeights()) -> float:
    parts = np.array([l_aff, l_dir, l_score], dtype=np.float64)
    if not np.all(np.isfinite(parts)):
        raise LossError("loss components must be finite")
    return float(w.lambda_aff * l_aff + w.lambda_dir * l_dir + w.lambda_score * l_score)


def select_seeds(affordance, threshold: float) -> np.ndarray:
    """Indices whose affordance is strictly above ``threshold``."""
    return np.flatnonzero(np.asarray(affordance, dtype=np.float64) > threshold)


def sample_top_directions(scores, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` distinct classes with probability proportional to ``scores``."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    if np.any(s < 0) or np.any(s > 1):
        raise LossError("scores must be normalized to [0, 1]")
    positive = np.count_nonzero(s > 0)
    if count > positive:
        raise LossError(f"asked for {count} directions but only {positive} have positive mass")
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    rng = np.random.default_rng(seed)
    return rng.choice(s.size, size=count, replace=False, p=s / s.sum())
