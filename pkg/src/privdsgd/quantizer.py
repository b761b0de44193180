"""Unbiased probabilistic quantizer on a uniform grid of step ``delta``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuantizerSpec:
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"quantization step must be positive and finite, got {self.delta!r}")


def quantizer_distribution(x: float, spec: QuantizerSpec) -> list[tuple[float, float]]:
    """Exact two-point law of ``Q(x)``: ``[(lower, p_lower), (upper, p_upper)]``.

    The upper point is chosen with probability equal to the fractional
    position of ``x`` inside its grid cell, so ``E[Q(x)] = x``.
    """
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    d = spec.delta
    cell = math.floor(x / d)
    p_up = x / d - cell
    p_up = min(max(p_up, 0.0), 1.0)
    return [(d * cell, 1.0 - p_up), (d * (cell + 1), p_up)]


def quantize(x, spec: QuantizerSpec, rng: np.random.Generator) -> np.ndarray:
    """Quantize each entry of ``x`` independently.

    One uniform draw is consumed per entry, in entry order.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("all entries must be finite")
    d = spec.delta
    scaled = x / d
    cell = np.floor(scaled)
    p_up = np.clip(scaled - cell, 0.0, 1.0)
    u = rng.random(x.shape)
    return d * (cell + (u < p_up))


def quantization_variance(x, spec: QuantizerSpec) -> np.ndarray:
    """Exact per-entry variance ``f (1 - f) delta**2`` with ``f`` the fractional part."""
    x = np.asarray(x, dtype=float)
    scaled = x / spec.delta
    f = np.clip(scaled - np.floor(scaled), 0.0, 1.0)
    return f * (1.0 - f) * spec.delta**2
