"""Recovery metrics and posterior uncertainty summaries."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np


@dataclass(frozen=True)
class TrialMetrics:
    """Per-trial evaluation record."""

    nmse: float
    corr: float
    block_hit_rate: float
    support_size: int
    success: bool


def nmse(x_hat, x_true):
    """Normalized squared error ||x_hat - x_true||^2 / ||x_true||^2."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    denom = float(np.sum(x_true**2))
    if denom == 0:
        raise ValueError("nmse undefined for an all-zero reference signal")
    return float(np.sum((x_hat - x_true) ** 2) / denom)


def corr(x_hat, x_true):
    """Cosine similarity between estimate and truth; 0 (with a warning) if
    either vector is zero."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    na = float(np.linalg.norm(x_hat))
    nb = float(np.linalg.norm(x_true))
    if na == 0 or nb == 0:
        warnings.warn("correlation of a zero vector is defined as 0", RuntimeWarning)
        return 0.0
    return float(np.dot(x_hat, x_true) / (na * nb))


def credible_interval(posterior, level):
    """Marginal Gaussian credible intervals mu_j +/- z * sqrt(Sigma_jj).

    Pruned coefficients (zero mean, zero variance) get degenerate (0, 0)
    intervals. Returns (lo, hi) arrays.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    z = NormalDist().inv_cdf(0.5 * (1.0 + level))
    std = np.sqrt(np.maximum(np.diag(posterior.covariance), 0.0))
    half = z * std
    return posterior.mean - half, posterior.mean + half


def phase_success(nmse_value, threshold=1e-2):
    """Strict success criterion for phase-transition cells."""
    return bool(nmse_value < threshold)


def block_hit_rate(x_hat, support_blocks, energy_fraction=1e-4):
    """Fraction of true support blocks whose estimated energy exceeds
    ``energy_fraction`` of the estimate's total energy. Purely diagnostic."""
    x_hat = np.asarray(x_hat, dtype=float)
    if not support_blocks:
        return 1.0
    total = float(np.sum(x_hat**2))
    hits = 0
    for start, length in support_blocks:
        if float(np.sum(x_hat[start:start + length] ** 2)) > energy_fraction * total:
            hits += 1
    return hits / len(support_blocks)


def sqrt_nmse(nmse_value):
    """Square-root convention of the error metric (image-style tables)."""
    return float(np.sqrt(nmse_value))


def evaluate_trial(x_hat, truth, support_size, success_threshold=1e-2):
    """Bundle the standard metrics for one solved instance."""
    err = nmse(x_hat, truth.x_true)
    return TrialMetrics(
        nmse=err,
        corr=corr(x_hat, truth.x_true),
        block_hit_rate=block_hit_rate(x_hat, truth.support_blocks),
        support_size=int(support_size),
        success=phase_success(err, success_threshold),
    )
