"""Differentially private distributed stochastic optimization with quantized gossip."""

from .config import RunConfig, load_preset, parse_config
from .analysis import consensus_error, fit_rate, high_prob_check, optimality_gap, oracle_complexity
from .network import Network, algebraic_connectivity, build_network
from .privacy import (
    PrivacyLedger,
    PrivacySchedule,
    cumulative_budget,
    noise_std,
    per_step_epsilon,
    sample_noise,
    sensitivity_bound,
)
from .problems import Problem, make_problem, sample_gradient
from .oracle import minibatch_gradient, subsample
from .quantizer import QuantizerSpec, quantize, quantizer_distribution
from .simulator import Schedules, Trajectory, make_schedules, run, simulate, step, validate_assumption4

__version__ = "0.1.0"
