"""Minibatch sampling without replacement and minibatch gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BatchTooLarge
from .problems import Problem, sample_gradient


@dataclass(frozen=True)
class Minibatch:
    node: int
    iteration: int
    indices: np.ndarray


def subsample(D: int, gamma_hat: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``gamma_hat`` distinct indices from ``range(D)`` by partial Fisher-Yates.

    Each size-``gamma_hat`` subset is equally likely. The returned order is the
    draw order.
    """
    if gamma_hat < 1:
        raise ValueError("gamma_hat must be >= 1")
    if gamma_hat > D:
        raise BatchTooLarge(f"cannot draw {gamma_hat} samples from a dataset of {D}")
    pool = np.arange(D)
    # position l swaps with a uniform choice from [l, D)
    picks = rng.integers(np.arange(gamma_hat), D)
    for l, j in enumerate(picks):
        pool[l], pool[j] = pool[j], pool[l]
    return pool[:gamma_hat].copy()


def minibatch_gradient(p: Problem, i: int, x, batch) -> np.ndarray:
    """Mean of per-sample gradients over the batch indices."""
    indices = batch.indices if isinstance(batch, Minibatch) else np.asarray(batch)
    return sample_gradient(p, i, x, indices).mean(axis=0)


class SampleCounter:
    """Running tally of sampled gradients consumed per node."""

    def __init__(self, n: int):
        self.per_node = np.zeros(n, dtype=np.int64)

    def add(self, node: int, count: int) -> None:
        self.per_node[node] += count

    @property
    def total(self) -> int:
        return int(self.per_node.sum())
