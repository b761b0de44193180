"""Privacy noise and the analytic (epsilon, delta) accountant.

The accountant is purely analytic: it never looks at realized noise. Per
step it bounds the sensitivity of a node's iterate to one swapped sample,
converts that into a Gaussian-mechanism epsilon using the noise scale of the
*next* iterate, and composes the per-step guarantees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDelta


@dataclass(frozen=True)
class PrivacySchedule:
    """Noise and failure-probability schedules.

    Noise standard deviation at iteration ``k`` is ``(k + noise_offset) ** sigma_exp``
    and the per-step failure probability is ``1 / (k + 1) ** delta_exp``.
    ``C`` bounds the per-sample gradient change between adjacent datasets.
    """

    sigma_exp: float = 0.0
    noise_offset: int = 1
    delta_exp: float = 3.0
    C: float = 1.0

    def __post_init__(self):
        if int(self.noise_offset) != self.noise_offset or self.noise_offset < 1:
            raise ValueError("noise_offset must be an integer >= 1")
        if not self.delta_exp > 0:
            raise ValueError("delta_exp must be > 0")
        if not self.C >= 0:
            raise ValueError("C must be nonnegative")

    def delta_k(self, k) -> np.ndarray | float:
        return 1.0 / (np.asarray(k, dtype=float) + 1.0) ** self.delta_exp


@dataclass(frozen=True)
class StepSizes:
    """The three derived quantities the accountant needs from a schedule."""

    alpha_hat: float
    beta_hat: float
    gamma_hat: int


@dataclass
class PrivacyLedger:
    k: np.ndarray
    delta_k: np.ndarray
    sensitivity: np.ndarray
    c_k: np.ndarray
    epsilon_k: np.ndarray
    cum_epsilon: np.ndarray
    delta_hat: float
    cum_delta: float
    delta_sum_start: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def total_epsilon(self) -> float:
        return float(self.cum_epsilon[-1])

    def summary(self) -> dict:
        return {
            "cum_epsilon": self.total_epsilon,
            "delta_hat": self.delta_hat,
            "cum_delta": self.cum_delta,
        }


def noise_std(k, sched: PrivacySchedule):
    """Noise standard deviation ``(k + offset) ** sigma_exp`` (vectorized in ``k``)."""
    out = (np.asarray(k, dtype=float) + sched.noise_offset) ** sched.sigma_exp
    return float(out) if np.ndim(out) == 0 else out


def sample_noise(dim: int, std: float, rng: np.random.Generator) -> np.ndarray:
    """``dim`` i.i.d. N(0, std**2) draws (numpy's ziggurat sampler)."""
    if std < 0:
        raise ValueError("std must be nonnegative")
    z = rng.standard_normal(dim)
    return std * z


def sensitivity_bound(k, alpha_hat: float, beta_hat: float, gamma_hat: int, sched: PrivacySchedule):
    """Worst-case sensitivity after ``k + 1`` updates, in closed form.

    Geometric sum ``(alpha_hat C / gamma_hat) * sum_{m<=k} |1 - beta_hat|**m``.
    """
    if gamma_hat < 1:
        raise ValueError("gamma_hat must be >= 1")
    if not alpha_hat > 0:
        raise ValueError("alpha_hat must be > 0")
    k = np.asarray(k, dtype=float)
    r = abs(1.0 - beta_hat)
    base = alpha_hat * sched.C / gamma_hat
    if r == 1.0:
        s = k + 1.0
    else:
        # -expm1((k+1) log r) / (1 - r), stable for r close to 1
        s = -np.expm1((k + 1.0) * math.log(r)) / (1.0 - r) if r > 0 else np.ones_like(k)
    out = base * s
    return float(out) if np.ndim(out) == 0 else out


def c_coefficient(k, sched: PrivacySchedule):
    """Gaussian-mechanism multiplier ``c_k = 2 sqrt(ln(1.25 / delta_k))``."""
    k = np.asarray(k, dtype=float)
    log_ratio = math.log(1.25) + sched.delta_exp * np.log(k + 1.0)
    if np.any(log_ratio <= 0):
        raise InvalidDelta("1.25 / delta_k must exceed 1")
    out = 2.0 * np.sqrt(log_ratio)
    return float(out) if np.ndim(out) == 0 else out


def per_step_epsilon(k, steps: StepSizes, sched: PrivacySchedule):
    """``epsilon_k = c_k * Delta_k / sigma_{k+1}``."""
    c = c_coefficient(k, sched)
    sens = sensitivity_bound(k, steps.alpha_hat, steps.beta_hat, steps.gamma_hat, sched)
    sig = noise_std(np.asarray(k) + 1, sched)
    out = c * sens / sig
    return float(out) if np.ndim(out) == 0 else out


def epsilon_upper_bound(
    k, a1: float, a2: float, a3: float, alpha: float, beta: float, gamma: float, K: int, sched: PrivacySchedule
):
    """Closed-form upper bound on ``epsilon_k`` in terms of schedule coefficients.

    Obtained from ``sum |1-b|^m <= 1/b`` (valid for ``0 < b <= 1``) and
    ``gamma_hat >= a3 K**gamma``; the step-size coefficients enter as
    ``a1 / a2`` since ``alpha_hat / beta_hat = (a1/a2) (ln K)^2 K^(beta-alpha)``.
    Uses the unit noise offset, i.e. ``sigma_{k+1} = (k + 2) ** sigma_exp``.
    """
    k = np.asarray(k, dtype=float)
    num = 2.0 * sched.C * a1 * math.log(K) ** 2 * np.sqrt(math.log(1.25) + sched.delta_exp * np.log(k + 1.0))
    den = a2 * a3 * K ** (alpha + gamma - beta) * (k + 2.0) ** sched.sigma_exp
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def geometric_epsilon_bound(k, steps: StepSizes, sched: PrivacySchedule):
    """Intermediate bound ``2 C a_hat sqrt(ln(1.25/d_k)) (1 - (1-b)^(k+1)) / (b g sigma_{k+1})``."""
    k = np.asarray(k, dtype=float)
    b = steps.beta_hat
    geo = -np.expm1((k + 1.0) * np.log1p(-b)) if b < 1 else np.ones_like(k)
    out = (
        c_coefficient(k, sched)
        * sched.C
        * steps.alpha_hat
        * geo
        / (b * steps.gamma_hat * noise_std(k + 1, sched))
    )
    return float(out) if np.ndim(out) == 0 else out


def cumulative_budget(K: int, steps: StepSizes, sched: PrivacySchedule, delta_sum_start: int = 0) -> PrivacyLedger:
    """Compose per-step guarantees over iterations ``0..K``.

    ``delta_hat = exp(sum eps_k) * (prod_{k>=start} (1 + delta_k) - 1)``, with
    the product evaluated as ``expm1(sum log1p(delta_k))``.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if delta_sum_start not in (0, 1):
        raise ValueError("delta_sum_start must be 0 or 1")
    k = np.arange(K + 1)
    dk = sched.delta_k(k)
    c = np.atleast_1d(c_coefficient(k, sched))
    sens = np.atleast_1d(sensitivity_bound(k, steps.alpha_hat, steps.beta_hat, steps.gamma_hat, sched))
    eps = c * sens / np.atleast_1d(noise_std(k + 1, sched))
    cum = np.cumsum(eps)
    total = float(cum[-1])
    prod_m1 = float(np.expm1(np.sum(np.log1p(dk[delta_sum_start:]))))
    if total > 709.0:  # exp overflows float64
        delta_hat = math.inf if prod_m1 > 0 else 0.0
    else:
        delta_hat = math.exp(total) * prod_m1
    return PrivacyLedger(
        k=k,
        delta_k=dk,
        sensitivity=sens,
        c_k=c,
        epsilon_k=eps,
        cum_epsilon=cum,
        delta_hat=delta_hat,
        cum_delta=float(np.sum(dk[delta_sum_start:])),
        delta_sum_start=delta_sum_start,
    )
