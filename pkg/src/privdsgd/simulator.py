"""Step-size schedules, parameter validation, and the synchronous iteration loop.

One round of the method, for every node ``i`` at iteration ``k``:

1. perturb the local iterate with Gaussian noise of std ``sigma_k`` and
   quantize it, ``z_i = Q(x_i + n_i)``;
2. broadcast ``z_i``; all ``z`` of a round exist before any node updates;
3. draw ``gamma_hat`` samples without replacement and average their gradients;
4. ``x_i <- (1 - beta_hat) x_i + beta_hat sum_j a_ij z_j - alpha_hat g_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng as rngmod
from .analysis import consensus_error
from .errors import BadHorizon, GammaUndefined, NumericalDivergence
from .network import Network
from .oracle import SampleCounter, minibatch_gradient, subsample
from .privacy import PrivacyLedger, PrivacySchedule, cumulative_budget, noise_std, sample_noise
from .problems import Problem
from .quantizer import QuantizerSpec, quantize

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class Schedules:
    a1: float
    a2: float
    a3: float
    alpha: float
    beta: float
    gamma: float
    K: int

    @property
    def alpha_hat(self) -> float:
        return self.a1 * math.log(self.K) ** 2 / self.K**self.alpha

    @property
    def beta_hat(self) -> float:
        return self.a2 / self.K**self.beta

    @property
    def gamma_hat(self) -> int:
        return int(math.floor(self.a3 * self.K**self.gamma)) + 1

    def derived(self) -> dict:
        return {"alpha_hat": self.alpha_hat, "beta_hat": self.beta_hat, "gamma_hat": self.gamma_hat}


def make_schedules(a1: float, a2: float, a3: float, alpha: float, beta: float, gamma: float, K: int) -> Schedules:
    if K < 2:
        raise BadHorizon(f"horizon K must be >= 2, got {K}")
    if min(a1, a2, a3) <= 0:
        raise ValueError("schedule coefficients a1, a2, a3 must be > 0")
    return Schedules(a1, a2, a3, alpha, beta, gamma, int(K))


@dataclass
class Condition:
    name: str
    holds: bool
    slack: float
    parts: dict = field(default_factory=dict)


@dataclass
class Assumption4Report:
    Gamma: float
    conditions: list[Condition]
    feasible_a1_interval: tuple[float, float] | None
    feasible_a2_interval: tuple[float, float] | None
    a1_in_window: bool
    a2_in_window: bool

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.conditions)

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "Gamma": self.Gamma,
            "all_hold": self.all_hold,
            "conditions": {
                c.name: {"holds": c.holds, "slack": c.slack, "parts": c.parts} for c in self.conditions
            },
            "feasible_a1_interval": list(self.feasible_a1_interval) if self.feasible_a1_interval else None,
            "feasible_a2_interval": list(self.feasible_a2_interval) if self.feasible_a2_interval else None,
            "a1_in_window": self.a1_in_window,
            "a2_in_window": self.a2_in_window,
        }


def gamma_constant(rho_L: float, a2: float, beta: float, K: int) -> float:
    """The consensus contraction constant built from ``rho_L``, ``a2`` and ``K``."""
    kb = K**beta
    den = (kb - rho_L * a2) ** 2
    if den == 0.0:
        raise GammaUndefined("K**beta equals rho_L * a2")
    return (2.0 * rho_L * a2 * kb - rho_L**2 * a2**2 - K ** (2 * beta - 1) * math.log(K)) / den


def validate_assumption4(
    s: Schedules, net: Network, p: Problem, sigma: float, L: float | None = None, mu: float | None = None
) -> Assumption4Report:
    """Evaluate every step-size / sample-size / noise condition and report slacks.

    Nothing is enforced; callers decide whether to run when a condition fails.
    ``L`` and ``mu`` default to the problem's constants.
    """
    if net.rho_L is None:
        raise GammaUndefined("network has no positive Laplacian eigenvalue")
    L = p.L if L is None else L
    mu = p.mu if mu is None else mu
    K, n, rho = s.K, net.n, net.rho_L
    a_hat = s.alpha_hat
    lnK = math.log(K)
    G = gamma_constant(rho, s.a2, s.beta, K)

    conds = []
    c1_parts = {"a_positive": min(s.a1, s.a2, s.a3), "two_alpha_minus_beta_gt_1": 2 * s.alpha - s.beta - 1}
    conds.append(
        Condition("exponent_gap", all(v > 0 for v in c1_parts.values()), min(c1_parts.values()), c1_parts)
    )
    c2_parts = {
        "beta_gt_sigma_half": s.beta - max(sigma + 0.5, 0.0),
        "alpha_gt_beta": s.alpha - s.beta,
        "alpha_le_1": 1.0 - s.alpha,
    }
    conds.append(
        Condition(
            "exponent_order",
            c2_parts["beta_gt_sigma_half"] > 0 and c2_parts["alpha_gt_beta"] > 0 and c2_parts["alpha_le_1"] >= 0,
            min(c2_parts.values()),
            c2_parts,
        )
    )
    v3 = 2 * s.a2 * K**s.beta - s.a2**2 - K ** (2 * s.beta - 1) * lnK
    conds.append(Condition("mixing_coefficient", v3 > 0, v3, {"value": v3}))

    if G > 0:
        v4 = 1.0 - lnK / K + 2.0 * (1.0 + G) * a_hat**2 * L**2 / G
        v5 = 1.0 - mu * a_hat + 2.0 * a_hat**2 * L**2 + 4.0 * n * (1.0 + G) * a_hat**2 * L / G
    else:
        v4 = v5 = math.nan
    for name, v in (("consensus_contraction", v4), ("optimality_contraction", v5)):
        parts = {"value": v, "Gamma": G}
        ok = G > 0 and 0.0 < v < 1.0
        conds.append(Condition(name, ok, min(v, 1.0 - v) if G > 0 else -math.inf, parts))

    kb = K**s.beta
    root = math.sqrt(max(1.0 - lnK / K, 0.0))
    a2_win = ((kb - kb * root) / rho, (kb + kb * root) / rho)
    if G > 0:
        ka = K**s.alpha
        a1_hi = min(
            ka / (mu * lnK),
            G * mu * ka / ((4 * n * (1 + G) * L + 2 * G * L**2) * lnK**2),
            math.sqrt(G * K ** (2 * s.alpha - 1) / (2 * (1 + G) * L**2 * lnK**2)),
        )
        a1_win = (0.0, a1_hi)
    else:
        a1_win = None

    return Assumption4Report(
        Gamma=G,
        conditions=conds,
        feasible_a1_interval=a1_win,
        feasible_a2_interval=a2_win,
        a1_in_window=a1_win is not None and a1_win[0] < s.a1 < a1_win[1],
        a2_in_window=a2_win[0] < s.a2 < a2_win[1],
    )


@dataclass
class Trajectory:
    k: np.ndarray
    mean_gap: np.ndarray
    max_node_gap: np.ndarray
    node_gaps: np.ndarray  # (K+1, n)
    consensus_err: np.ndarray
    eps_k: np.ndarray
    cum_eps: np.ndarray
    samples: np.ndarray
    final_states: np.ndarray
    final_gap: float
    final_node_gaps: np.ndarray
    n: int
    gamma_hat: int
    ledger: PrivacyLedger | None = None
    assumption4: Assumption4Report | None = None

    @property
    def initial_gap(self) -> float:
        return float(self.mean_gap[0])

    def __len__(self) -> int:
        return len(self.k)


def step(
    states: np.ndarray,
    k: int,
    net: Network,
    s: Schedules,
    q: QuantizerSpec | None,
    priv: PrivacySchedule | None,
    p: Problem,
    seed: int = 0,
    counter: SampleCounter | None = None,
    order: Sequence[int] | None = None,
    full_batch: bool = False,
) -> np.ndarray:
    """Advance all nodes by one synchronous round.

    ``q=None`` transmits exactly (no quantization); ``priv=None`` adds no
    noise. ``full_batch`` uses every sample instead of a ``gamma_hat`` draw.
    ``order`` only changes the order nodes are visited in; results do not
    depend on it.
    """
    n, d = states.shape
    order = range(n) if order is None else order
    std = noise_std(k, priv) if priv is not None else 0.0
    z = np.empty_like(states)
    g = np.empty_like(states)
    gh = p.D if full_batch else s.gamma_hat
    for i in order:
        x = states[i]
        if std > 0:
            x = x + sample_noise(d, std, rngmod.stream(seed, i, k, rngmod.NOISE))
        z[i] = quantize(x, q, rngmod.stream(seed, i, k, rngmod.QUANTIZE)) if q is not None else x
        if full_batch:
            batch = np.arange(p.D)
        else:
            batch = subsample(p.D, gh, rngmod.stream(seed, i, k, rngmod.SUBSAMPLE))
        g[i] = minibatch_gradient(p, i, states[i], batch)
        if counter is not None:
            counter.add(i, gh)
    b = s.beta_hat
    new = (1.0 - b) * states + b * (net.weights @ z) - s.alpha_hat * g
    bad = np.abs(new) > DIVERGENCE_LIMIT
    if np.any(bad) or not np.all(np.isfinite(new)):
        node = int(np.argmax(np.any(bad | ~np.isfinite(new), axis=1)))
        raise NumericalDivergence(k, node, float(np.max(np.abs(new[node]))))
    return new


def initial_states(n: int, d: int, init=0.0, seed: int = 0) -> np.ndarray:
    """Initial iterates: a constant, an explicit ``(n, d)`` array, or a uniform box.

    ``init`` may be a number, an array, or ``{"kind": "uniform", "low": a, "high": b}``.
    """
    if isinstance(init, dict):
        if init.get("kind") == "constant":
            return np.full((n, d), float(init.get("value", 0.0)))
        if init.get("kind") != "uniform":
            raise ValueError(f"unknown init kind {init.get('kind')!r}")
        low, high = float(init.get("low", -1.0)), float(init.get("high", 1.0))
        return np.stack([rngmod.stream(seed, i, 0, rngmod.INIT).uniform(low, high, d) for i in range(n)])
    arr = np.asarray(init, dtype=float)
    if arr.ndim == 0:
        return np.full((n, d), float(arr))
    return np.broadcast_to(arr, (n, d)).astype(float).copy()


def simulate(
    net: Network,
    p: Problem,
    s: Schedules,
    q: QuantizerSpec | None,
    priv: PrivacySchedule | None,
    seed: int = 0,
    init=0.0,
    full_batch: bool = False,
    ledger_schedule: PrivacySchedule | None = None,
    delta_sum_start: int = 0,
    assumption4: Assumption4Report | None = None,
) -> Trajectory:
    """Run iterations ``k = 0..K`` and record metrics of each ``x_k``.

    Record ``k`` describes the iterate *entering* iteration ``k``; its
    ``samples`` column counts every sample drawn up to and including
    iteration ``k``. ``final_states`` is ``x_{K+1}``. Per-step epsilons come
    from the analytic accountant for ``ledger_schedule`` (falls back to
    ``priv``); without either, the privacy columns are NaN.
    """
    if p.n != net.n:
        raise ValueError(f"problem has {p.n} nodes but network has {net.n}")
    K = s.K
    x = initial_states(net.n, p.dim, init, seed)
    counter = SampleCounter(net.n)
    node_gaps = np.empty((K + 1, net.n))
    mean_gap = np.empty(K + 1)
    cons = np.empty(K + 1)
    samples = np.empty(K + 1, dtype=np.int64)
    for k in range(K + 1):
        node_gaps[k] = p.gaps(x)
        mean_gap[k] = p.gap(x.mean(axis=0))
        cons[k] = consensus_error(x)
        x = step(x, k, net, s, q, priv, p, seed=seed, counter=counter, full_batch=full_batch)
        samples[k] = counter.total

    led_sched = ledger_schedule if ledger_schedule is not None else priv
    if led_sched is not None:
        ledger = cumulative_budget(K, s, led_sched, delta_sum_start)
        eps, cum = ledger.epsilon_k, ledger.cum_epsilon
    else:
        ledger = None
        eps = cum = np.full(K + 1, np.nan)

    return Trajectory(
        k=np.arange(K + 1),
        mean_gap=mean_gap,
        max_node_gap=node_gaps.max(axis=1),
        node_gaps=node_gaps,
        consensus_err=cons,
        eps_k=eps,
        cum_eps=cum,
        samples=samples,
        final_states=x,
        final_gap=p.gap(x.mean(axis=0)),
        final_node_gaps=p.gaps(x),
        n=net.n,
        gamma_hat=p.D if full_batch else s.gamma_hat,
        ledger=ledger,
        assumption4=assumption4,
    )


@dataclass
class Components:
    net: Network
    problem: Problem
    schedules: Schedules
    quantizer: QuantizerSpec | None
    noise: PrivacySchedule | None
    accountant: PrivacySchedule
    assumption4: Assumption4Report | None


def build_components(cfg) -> Components:
    """Instantiate network, problem, schedules and privacy settings from a config."""
    from .network import build_network
    from .problems import make_problem

    nc, pc, sc, vc = cfg.network, cfg.problem, cfg.schedule, cfg.privacy
    net = build_network(int(nc["n"]), nc["topology"], nc["weight_rule"], nc["edges"], check_spectrum=int(nc["n"]) > 1)
    problem = make_problem(
        pc["kind"],
        int(pc["dim"]),
        net.n,
        int(pc["samples_per_node"]),
        float(pc["sample_bound"]),
        rngmod.stream(int(pc["data_seed"]), 0, 0, rngmod.DATA),
    )
    s = make_schedules(
        float(sc["a1"]), float(sc["a2"]), float(sc["a3"]),
        float(sc["alpha_exp"]), float(sc["beta_exp"]), float(sc["gamma_exp"]),
        int(cfg.run["K"]),
    )
    C = problem.C if vc["C"] is None else float(vc["C"])
    accountant = PrivacySchedule(float(vc["sigma_exp"]), int(vc["noise_offset"]), float(vc["delta_exp"]), C)
    q = None if cfg.quantizer["delta"] is None else QuantizerSpec(float(cfg.quantizer["delta"]))
    report = None
    if net.rho_L is not None:
        try:
            report = validate_assumption4(s, net, problem, accountant.sigma_exp)
        except GammaUndefined:
            report = None
    return Components(net, problem, s, q, accountant if vc["enabled"] else None, accountant, report)


def run(cfg, seed: int | None = None) -> Trajectory:
    """Build everything from ``cfg`` and simulate one seed (default ``run.seed``)."""
    c = build_components(cfg)
    return simulate(
        c.net,
        c.problem,
        c.schedules,
        c.quantizer,
        c.noise,
        seed=int(cfg.run["seed"] if seed is None else seed),
        init=cfg.run["init"],
        full_batch=bool(cfg.schedule["full_batch"]),
        ledger_schedule=c.accountant,
        delta_sum_start=int(cfg.privacy["delta_sum_start"]),
        assumption4=c.assumption4,
    )
