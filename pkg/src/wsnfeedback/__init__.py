"""Feedback-driven distributed sensing and estimation over a collision channel.

Sensors observe a scalar Gauss-Markov process; a fusion center tracks it with
a Kalman filter and broadcasts its uncertainty, which sets how many sensors
measure and how carefully they do so before sharing B orthogonal channels.
"""

from .channel import ChannelConfig, SuccessPmf, binomial_approx_pmf, brute_force_pmf, exact_success_pmf
from .estimator import FcBelief, OutageConfig, mse_floor, posterior_update, prior_update, variance_trajectory
from .process import AccuracyChain, MeasurementParams, ProcessParams, load_chain, stationary_distribution

__version__ = "0.1.0"
