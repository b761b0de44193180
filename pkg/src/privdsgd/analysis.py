"""Post-hoc metrics: consensus error, optimality gap, rate fits, tail and complexity checks.

The rate and tail checks are statistical verifications, not proofs. The
slope thresholds used by callers are empirical calibration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NegativeGap, NonPositiveGap

GAP_TOL = 1e-9


def consensus_error(states) -> float:
    """``sum_i ||x_i - mean(x)||^2`` for a stack of node iterates ``(n, d)``."""
    x = np.asarray(states, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return float(np.sum((x - x.mean(axis=0)) ** 2))


def optimality_gap(p, x) -> float:
    """``F(x) - F*``; a value below ``-1e-9`` means ``F*`` is wrong."""
    g = p.value(x) - p.F_star
    if g < -GAP_TOL:
        raise NegativeGap(f"F(x) - F* = {g:.3e} < 0")
    return float(g)


@dataclass
class RateFit:
    k0: int
    k1: int
    slope: float
    intercept: float
    residual_rms: float
    n_points: int


def fit_rate(gaps, window: tuple[int, int] | None = None, ks=None) -> RateFit:
    """Least-squares slope of ``log(gap)`` against ``log(k)`` over ``window``.

    ``gaps`` is either a sequence indexed by iteration or an object with
    ``k`` and ``mean_gap`` attributes (a trajectory). The default window is
    the last half of the iterations. ``k = 0`` is never used.
    """
    if hasattr(gaps, "mean_gap"):
        ks = np.asarray(gaps.k) if ks is None else np.asarray(ks)
        gaps = np.asarray(gaps.mean_gap, dtype=float)
    else:
        gaps = np.asarray(gaps, dtype=float)
        ks = np.arange(len(gaps)) if ks is None else np.asarray(ks)
    if window is None:
        last = int(ks[-1])
        window = (max(1, last // 2), last)
    k0, k1 = window
    mask = (ks >= max(k0, 1)) & (ks <= k1)
    if mask.sum() < 10:
        raise ValueError("rate window must contain at least 10 points")
    y = gaps[mask]
    if np.any(y <= 0):
        raise NonPositiveGap("gaps must be positive inside the fit window")
    lx = np.log(ks[mask].astype(float))
    ly = np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return RateFit(int(k0), int(k1), float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))), int(mask.sum()))


@dataclass
class HighProbReport:
    threshold: float
    exceed_fraction: float
    allowed_fraction: float
    delta_star: float
    M: int
    passed: bool


def high_prob_check(gaps: Sequence[float], delta_star: float) -> HighProbReport:
    """Markov-inequality check: ``P(gap > mean/delta*) <= delta*`` up to sampling error.

    The allowance is ``delta* + 2 sqrt(delta* (1 - delta*) / M)``.
    """
    g = np.asarray(gaps, dtype=float)
    M = g.size
    if M < 20:
        raise ValueError("need at least 20 runs for the high-probability check")
    if np.any(g < 0):
        raise ValueError("gaps must be nonnegative")
    if not 0 < delta_star < 1:
        raise ValueError("delta_star must be in (0, 1)")
    a = float(g.mean() / delta_star)
    frac = float(np.mean(g > a))
    allowed = delta_star + 2.0 * math.sqrt(delta_star * (1.0 - delta_star) / M)
    return HighProbReport(a, frac, allowed, delta_star, M, frac <= allowed)


@dataclass
class ComplexityProbe:
    eta: float
    N_eta: int | None
    total_samples: int | None

    @property
    def reached(self) -> bool:
        return self.N_eta is not None


def oracle_complexity(trajectories, eta: float) -> ComplexityProbe:
    """First iteration whose ensemble-mean gap is below ``eta`` and the samples spent.

    ``total_samples = n * gamma_hat * (N_eta + 1)``; both fields are ``None``
    when the target is never reached.
    """
    if not eta > 0:
        raise ValueError("eta must be > 0")
    trajs = [trajectories] if hasattr(trajectories, "mean_gap") else list(trajectories)
    gaps = np.mean([t.mean_gap for t in trajs], axis=0)
    hit = np.nonzero(gaps < eta)[0]
    if hit.size == 0:
        return ComplexityProbe(eta, None, None)
    N = int(trajs[0].k[hit[0]])
    return ComplexityProbe(eta, N, int(trajs[0].n * trajs[0].gamma_hat * (N + 1)))


def theoretical_rate_exponent(alpha: float, beta: float, sigma: float) -> float:
    """Exponent ``r`` in the ``O(K^-r)`` mean-gap rate."""
    return min(2 * beta - 2 * max(sigma, 0.0) - 1, 2 * alpha - beta - 1)
