"""Synthetic empirical-risk problems with known smoothness and PL constants.

Both families depend on the sample *additively* through the gradient, so
swapping one sample changes a per-sample gradient by exactly the sample
difference, independently of ``x``. That makes the adjacency bound ``C``
exact rather than estimated.

``quadratic``
    ``l(x, xi) = 0.5 ||x - xi||^2`` with ``xi`` uniform in a box. The global
    cost is ``0.5 ||x - b||^2 + const`` with ``b`` the grand sample mean, so
    ``L = mu = 1``.

``sine-quadratic``
    ``l(x, xi) = x^2 + 3 sin^2 x + xi x`` in one dimension, with samples
    re-centred to zero mean on every node. Every local cost is then exactly
    ``x^2 + 3 sin^2 x``, a nonconvex function with ``F* = 0`` at ``x = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDim

KINDS = ("quadratic", "sine-quadratic")

SINE_QUADRATIC_L = 8.0
SINE_QUADRATIC_MU = 0.29


@dataclass(frozen=True)
class Problem:
    kind: str
    dim: int
    samples: np.ndarray  # (n, D, d)
    L: float
    mu: float
    F_star: float
    sigma_g: float
    C: float
    sample_bound: float

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def D(self) -> int:
        return self.samples.shape[1]

    @property
    def node_means(self) -> np.ndarray:
        return self.samples.mean(axis=1)

    @property
    def minimizer(self) -> np.ndarray:
        if self.kind == "quadratic":
            return self.samples.reshape(-1, self.dim).mean(axis=0)
        return np.zeros(self.dim)

    def local_value(self, i: int, x) -> float:
        x = np.asarray(x, dtype=float)
        xi = self.samples[i]
        if self.kind == "quadratic":
            return float(0.5 * np.mean(np.sum((x - xi) ** 2, axis=1)))
        return float(np.sum(x**2 + 3.0 * np.sin(x) ** 2) + np.mean(xi @ x))

    def local_grad(self, i: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "quadratic":
            return x - self.node_means[i]
        return 2.0 * x + 3.0 * np.sin(2.0 * x) + self.node_means[i]

    def value(self, x) -> float:
        """Global cost ``F(x) = mean_i f_i(x)``."""
        return float(np.mean([self.local_value(i, x) for i in range(self.n)]))

    def grad(self, x) -> np.ndarray:
        return np.mean([self.local_grad(i, x) for i in range(self.n)], axis=0)

    def gap(self, x) -> float:
        """``F(x) - F*`` evaluated in a cancellation-free form."""
        x = np.asarray(x, dtype=float)
        if self.kind == "quadratic":
            return float(0.5 * np.sum((x - self.minimizer) ** 2))
        return float(np.sum(x**2 + 3.0 * np.sin(x) ** 2))

    def gaps(self, xs: np.ndarray) -> np.ndarray:
        """Row-wise :meth:`gap` for a stack of points ``(m, d)``."""
        xs = np.asarray(xs, dtype=float)
        if self.kind == "quadratic":
            return 0.5 * np.sum((xs - self.minimizer) ** 2, axis=1)
        return np.sum(xs**2 + 3.0 * np.sin(xs) ** 2, axis=1)


def make_problem(
    kind: str, d: int, n: int, D: int, sample_bound: float, rng: np.random.Generator
) -> Problem:
    """Draw per-node datasets of ``D`` samples uniform in ``[-sample_bound, sample_bound]^d``."""
    if kind not in KINDS:
        raise ValueError(f"unknown problem kind {kind!r}; expected one of {KINDS}")
    if n < 1 or D < 1 or d < 1:
        raise ValueError("n, D and d must all be >= 1")
    if not sample_bound > 0:
        raise ValueError("sample_bound must be > 0")
    if kind == "sine-quadratic" and d != 1:
        raise UnsupportedDim("sine-quadratic is defined for d = 1 only")

    samples = rng.uniform(-sample_bound, sample_bound, size=(n, D, d))

    if kind == "quadratic":
        b = samples.mean(axis=1, keepdims=True)
        spread = np.sum((samples - b) ** 2, axis=2)  # (n, D)
        b_bar = samples.reshape(-1, d).mean(axis=0)
        # F(x) = 0.5||x - b_bar||^2 + F_star
        f_star = float(
            np.mean(0.5 * np.sum((b[:, 0, :] - b_bar) ** 2, axis=1) + 0.5 * spread.mean(axis=1))
        )
        return Problem(
            kind=kind,
            dim=d,
            samples=samples,
            L=1.0,
            mu=1.0,
            F_star=f_star,
            sigma_g=float(math.sqrt(spread.mean(axis=1).max())),
            C=2.0 * sample_bound * math.sqrt(d),
            sample_bound=sample_bound,
        )

    samples = samples - samples.mean(axis=1, keepdims=True)
    return Problem(
        kind=kind,
        dim=1,
        samples=samples,
        L=SINE_QUADRATIC_L,
        mu=SINE_QUADRATIC_MU,
        F_star=0.0,
        sigma_g=float(sample_bound),
        C=2.0 * sample_bound,
        sample_bound=sample_bound,
    )


def sample_gradient(p: Problem, i: int, x, sample_index) -> np.ndarray:
    """Per-sample gradient ``grad_x l_i(x, xi_{i, sample_index})``.

    ``sample_index`` may be an integer array, in which case one gradient per
    index is returned (stacked along axis 0).
    """
    idx = np.asarray(sample_index)
    if np.any(idx < 0) or np.any(idx >= p.D):
        raise IndexError(f"sample index out of range [0, {p.D})")
    x = np.asarray(x, dtype=float)
    xi = p.samples[i, idx]
    if p.kind == "quadratic":
        return x - xi
    return 2.0 * x + 3.0 * np.sin(2.0 * x) + xi
