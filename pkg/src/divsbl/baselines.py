"""Reference solvers used as oracles and benchmark baselines.

``sbl_reference_step`` is the classic per-element EM update written
independently of the diversified engine, so trajectory comparisons against
the degenerate configuration are meaningful. ``bsbl_strong_solve`` is the
strong-constraint block solver (scalar per-block variance, one shared
correlation matrix).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve

from .inference import _chol_with_jitter, toeplitz_correct, _PRUNE_BURN_IN, _PRUNE_FLOOR
from .model import (
    BlockLayout,
    DiversifiedPrior,
    Posterior,
    SolveResult,
    SolverConfig,
    ValidationError,
)


def _initial_beta(config, y):
    if config.beta_init is not None:
        return float(config.beta_init)
    var_y = float(np.var(y))
    return 100.0 / var_y if var_y > 0 else 100.0


def _capped_beta(resid, trace_term, m, beta_max):
    denom = resid + trace_term
    if denom <= m / beta_max:
        return float(beta_max)
    return float(min(m / denom, beta_max))


# ---------------------------------------------------------------------------
# classic per-element SBL
# ---------------------------------------------------------------------------


def _sbl_posterior(phi, y, gammas, beta):
    """Mean, covariance diagonal and noise-update pieces for the diagonal
    prior Sigma0 = diag(gammas)."""
    m = phi.shape[0]
    w = (phi * gammas) @ phi.T
    w = 0.5 * (w + w.T)
    cho = _chol_with_jitter(w + np.eye(m) / beta)
    alpha = cho_solve(cho, y)
    mu = gammas * (phi.T @ alpha)
    x = cho_solve(cho, phi)
    sig_diag = gammas - gammas**2 * np.sum(phi * x, axis=0)
    quad = float(y @ alpha)
    logdet = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
    resid = float(np.sum((y - phi @ mu) ** 2))
    trace_term = float(np.trace(w) - np.sum(w * cho_solve(cho, w)))
    return mu, np.maximum(sig_diag, 0.0), resid, max(trace_term, 0.0), -quad - logdet


def _sbl_full_covariance(phi, gammas, beta):
    m = phi.shape[0]
    pg = phi * gammas
    w = pg @ phi.T
    cho = _chol_with_jitter(0.5 * (w + w.T) + np.eye(m) / beta)
    cov = np.diag(gammas) - pg.T @ cho_solve(cho, pg)
    return 0.5 * (cov + cov.T)


def sbl_reference_step(model, gammas, beta):
    """One classic sparse-Bayesian EM update: gamma_j <- Sigma_jj + mu_j^2
    with the posterior taken at Sigma0 = diag(gammas)."""
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas < 0):
        raise ValidationError("gammas must be nonnegative")
    mu, sig_diag, _, _, _ = _sbl_posterior(
        model.design_matrix, model.measurements, gammas, beta)
    return sig_diag + mu**2


def sbl_solve(model, config=None):
    """Classic per-element SBL run with the same pruning/convergence
    protocol as the block solvers; block size is effectively 1."""
    if config is None:
        config = SolverConfig()
    phi = model.design_matrix
    y = model.measurements
    m, n = phi.shape
    layout = BlockLayout(n, 1)
    gammas = np.full(n, config.gamma_init_scale)
    active = np.ones(n, dtype=bool)
    beta = _initial_beta(config, y)

    mu, sig_diag, resid, trace_term, _ = _sbl_posterior(phi, y, gammas, beta)
    beta_used = beta
    cost_trace = []
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        if config.prune_threshold > 0 and iterations > _PRUNE_BURN_IN:
            thr = max(config.prune_threshold * gammas[active].max(), _PRUNE_FLOOR)
            newly = active & (gammas < thr)
            if newly.any():
                active &= ~newly
                gammas = np.where(active, gammas, 0.0)
                mu = np.where(active, mu, 0.0)
                sig_diag = np.where(active, sig_diag, 0.0)
            if not active.any():
                return _sbl_result(np.zeros(n), np.zeros((n, n)), np.zeros(n),
                                   beta, iterations, cost_trace, True, layout)

        gammas = np.where(active, sig_diag + mu**2, 0.0)

        mu_prev = mu
        beta_used = beta
        mu, sig_diag, resid, trace_term, cost_val = _sbl_posterior(phi, y, gammas, beta)
        if config.learn_beta:
            beta = _capped_beta(resid, trace_term, m, config.beta_max)
        cost_trace.append(cost_val)
        if float(np.max(np.abs(mu - mu_prev))) < config.conv_tol:
            converged = True
            break

    cov = _sbl_full_covariance(phi, gammas, beta_used)
    dead = ~active
    cov[dead, :] = 0.0
    cov[:, dead] = 0.0
    return _sbl_result(mu, cov, gammas, beta, iterations, cost_trace, converged, layout)


def _sbl_result(mu, cov, gammas, beta, iterations, cost_trace, converged, layout):
    posterior = Posterior(mean=mu.copy(), covariance=cov)
    prior = DiversifiedPrior(
        gammas=gammas,
        correlations=np.ones((layout.num_blocks, 1, 1)),
        common_correlation=np.ones((1, 1)),
        multipliers=np.zeros(layout.num_blocks),
        active_mask=gammas > 0,
    )
    return SolveResult(
        x_hat=posterior.mean, posterior=posterior, prior=prior, beta=beta,
        iterations=iterations, cost_trace=np.asarray(cost_trace), converged=converged,
    )


# ---------------------------------------------------------------------------
# strong-constraint block SBL
# ---------------------------------------------------------------------------


def _bsbl_posterior(phi, phi_r, y, gam_block, shared, active, beta):
    m = phi.shape[0]
    s0b = gam_block[:, None, None] * shared * active[:, None, None]
    ps_b = np.matmul(phi_r.transpose(1, 0, 2), s0b)
    ps_flat = ps_b.transpose(1, 0, 2).reshape(m, -1)
    w = ps_flat @ phi.T
    w = 0.5 * (w + w.T)
    cho = _chol_with_jitter(w + np.eye(m) / beta)
    alpha = cho_solve(cho, y)
    mu_b = np.matmul(ps_b.transpose(0, 2, 1), alpha)
    x_flat = cho_solve(cho, ps_flat)
    x_b = x_flat.reshape(m, *mu_b.shape).transpose(1, 0, 2)
    sig_b = s0b - np.matmul(ps_b.transpose(0, 2, 1), x_b)
    sig_b = 0.5 * (sig_b + sig_b.transpose(0, 2, 1))
    quad = float(y @ alpha)
    logdet = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
    resid = float(np.sum((y - phi @ mu_b.reshape(-1)) ** 2))
    trace_term = max(float(np.trace(w) - np.sum(w * cho_solve(cho, w))), 0.0)
    return mu_b, sig_b, resid, trace_term, -quad - logdet, (s0b, ps_flat, x_flat)


def bsbl_strong_solve(model, layout, config=None):
    """Block-SBL with the strong constraint: one scalar variance per block
    and a single shared correlation matrix, updated as the average of the
    per-block unconstrained estimates, then Toeplitz-corrected.

    Shares the pruning, Toeplitz and convergence defaults with the
    diversified solver so comparisons are like-for-like; within each block
    all returned variances are equal.
    """
    if config is None:
        config = SolverConfig()
    phi = model.design_matrix
    y = model.measurements
    m, n = phi.shape
    if n != layout.total_dim:
        raise ValidationError("design columns do not match layout dimension")
    g, ell = layout.num_blocks, layout.block_size
    phi_r = phi.reshape(m, g, ell)

    gam_block = np.full(g, config.gamma_init_scale)
    shared = np.eye(ell)
    active = np.ones(g, dtype=bool)
    beta = _initial_beta(config, y)

    mu_b, sig_b, resid, trace_term, _, pieces = _bsbl_posterior(
        phi, phi_r, y, gam_block, shared, active, beta)
    cost_trace = []
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        if config.prune_threshold > 0 and iterations > _PRUNE_BURN_IN:
            thr = max(config.prune_threshold * gam_block[active].max(), _PRUNE_FLOOR)
            newly = active & (gam_block < thr)
            if newly.any():
                active = active & ~newly
                gam_block = np.where(active, gam_block, 0.0)
                mu_b[newly] = 0.0
                sig_b[newly] = 0.0
            if not active.any():
                return _bsbl_result(np.zeros((g, ell)), np.zeros((n, n)),
                                    np.zeros(g), shared, beta, iterations,
                                    cost_trace, True, layout)

        # block variance: gamma_i <- tr(B^{-1} (Sigma^i + mu^i mu^i^T)) / L
        smom = sig_b + mu_b[:, :, None] * mu_b[:, None, :]
        shared_inv = np.linalg.inv(shared)
        idx = np.flatnonzero(active)
        traces = np.einsum("ls,gsl->g", shared_inv, smom[idx])
        gam_block = gam_block.copy()
        gam_block[idx] = np.maximum(traces / ell, 1e-18)

        # shared correlation: average of unconstrained per-block estimates
        shared_new = (smom[idx] / gam_block[idx, None, None]).mean(axis=0)
        shared_new = 0.5 * (shared_new + shared_new.T)
        if config.toeplitz_enabled:
            shared_new = toeplitz_correct(shared_new, config.r_clamp)
        shared = shared_new

        mu_prev = mu_b.reshape(-1).copy()
        mu_b, sig_b, resid, trace_term, cost_val, pieces = _bsbl_posterior(
            phi, phi_r, y, gam_block, shared, active, beta)
        if config.learn_beta:
            beta = _capped_beta(resid, trace_term, m, config.beta_max)
        cost_trace.append(cost_val)
        if float(np.max(np.abs(mu_b.reshape(-1) - mu_prev))) < config.conv_tol:
            converged = True
            break

    s0b, ps_flat, x_flat = pieces
    cov = -ps_flat.T @ x_flat
    for i in range(g):
        sl = layout.block_slice(i)
        cov[sl, sl] += s0b[i]
    dead = np.repeat(~active, ell)
    cov[dead, :] = 0.0
    cov[:, dead] = 0.0
    cov = 0.5 * (cov + cov.T)
    return _bsbl_result(mu_b, cov, gam_block, shared, beta, iterations,
                        cost_trace, converged, layout)


def _bsbl_result(mu_b, cov, gam_block, shared, beta, iterations, cost_trace,
                 converged, layout):
    g, ell = layout.num_blocks, layout.block_size
    posterior = Posterior(mean=mu_b.reshape(-1).copy(), covariance=cov)
    prior = DiversifiedPrior(
        gammas=np.repeat(gam_block, ell),
        correlations=np.broadcast_to(shared, (g, ell, ell)).copy(),
        common_correlation=shared.copy(),
        multipliers=np.zeros(g),
        active_mask=gam_block > 0,
    )
    return SolveResult(
        x_hat=posterior.mean, posterior=posterior, prior=prior, beta=beta,
        iterations=iterations, cost_trace=np.asarray(cost_trace), converged=converged,
    )
