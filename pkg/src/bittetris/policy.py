"""Linear afterstate policy and critic over the nine board features.

The actor scores each of the 34 afterstate slots with a single shared
weight vector, masks infeasible slots to probability zero, and softmaxes
with an optional temperature. A common bias would cancel in the softmax,
so the policy carries none; the critic keeps one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import N_FEATURES, AfterstateBatch


@dataclass
class LinearPolicy:
    weights: np.ndarray = field(default_factory=lambda: np.zeros(N_FEATURES))

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (N_FEATURES,):
            raise ValueError(f"policy weights must have shape ({N_FEATURES},)")

    def copy(self) -> "LinearPolicy":
        return LinearPolicy(self.weights.copy())


@dataclass
class LinearCritic:
    weights: np.ndarray = field(default_factory=lambda: np.zeros(N_FEATURES))
    bias: float = 0.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (N_FEATURES,):
            raise ValueError(f"critic weights must have shape ({N_FEATURES},)")

    def value(self, features: np.ndarray) -> float:
        return float(features @ self.weights + self.bias)

    def values(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights + self.bias

    def copy(self) -> "LinearCritic":
        return LinearCritic(self.weights.copy(), self.bias)


def temperature(episode: int, tau0: float, tau_k: float) -> float:
    """Annealed softmax temperature for the given episode index."""
    return tau0 / (1.0 + tau_k * episode)


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Probabilities over the 34 slots; masked slots are exactly zero."""
    feasible = mask != 0
    if not feasible.any():
        raise ValueError("at least one slot must be feasible")
    out = np.zeros_like(logits, dtype=np.float64)
    z = logits[feasible]
    z = np.exp(z - z.max())
    out[feasible] = z / z.sum()
    return out


def actor_logits(policy: LinearPolicy, batch: AfterstateBatch, tau: float) -> np.ndarray:
    if tau <= 0:
        raise ValueError("temperature must be positive")
    return (batch.features @ policy.weights) / tau


def actor_distribution(policy: LinearPolicy, batch: AfterstateBatch, tau: float = 1.0) -> np.ndarray:
    """Action probabilities of the masked softmax actor."""
    return masked_softmax(actor_logits(policy, batch, tau), batch.mask)


def log_prob(policy: LinearPolicy, batch: AfterstateBatch, action: int, tau: float = 1.0) -> float:
    logits = actor_logits(policy, batch, tau)
    feasible = batch.mask != 0
    if not feasible[action]:
        raise ValueError(f"action {action} is masked")
    z = logits[feasible]
    m = z.max()
    return float(logits[action] - m - np.log(np.exp(z - m).sum()))


def greedy_action(weights: np.ndarray, batch: AfterstateBatch) -> int:
    """Argmax of weights . features over feasible slots, lowest index on ties."""
    weights = np.asarray(weights, dtype=np.float64)
    scores = batch.features @ weights
    feasible = np.flatnonzero(batch.mask)
    if feasible.size == 0:
        raise ValueError("at least one slot must be feasible")
    return int(feasible[np.argmax(scores[feasible])])
