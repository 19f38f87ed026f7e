"""Coupled particle filters: coupled resampling, correlated likelihood
estimation and unbiased smoothing."""

from ._core import (
    ExperimentConfig,
    bootstrap_loglik,
    coupled_loglik,
    fd_score,
    hilbert_key,
    index_coupled_matrix,
    kalman_loglik,
    kalman_smoothing_means,
    philox4x32,
    rg_estimate,
    run,
    simulate,
    transport_coupling,
)

__all__ = [
    "ExperimentConfig",
    "bootstrap_loglik",
    "coupled_loglik",
    "fd_score",
    "hilbert_key",
    "index_coupled_matrix",
    "kalman_loglik",
    "kalman_smoothing_means",
    "philox4x32",
    "rg_estimate",
    "run",
    "simulate",
    "transport_coupling",
]
