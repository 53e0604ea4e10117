"""EM engine for diversified block-sparse Bayesian learning.

The solver alternates: prune dead blocks, update per-element prior
variances, re-estimate the shared intra-block correlation, diversify the
per-block correlations by dual ascent on a log-det equality constraint,
project each correlation onto the AR(1) Toeplitz family, refresh the
Gaussian posterior, and update the noise precision. Classic SBL and
block-SBL fall out as degenerate configurations.

Posteriors are computed with the Woodbury identity (an M x M solve) so
that near-zero variances never need inverting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .model import (
    BlockLayout,
    DiversifiedPrior,
    MeasurementModel,
    Posterior,
    SolveResult,
    SolverConfig,
    ValidationError,
    block_view,
)

# Guards shared across updates: variance floor before the gamma formula,
# multiplier clamp keeping 1 + 2*lambda positive, absolute prune floor, and
# a short burn-in before pruning starts (early iterations overshoot wildly;
# pruning during the transient guillotines slow-growing true blocks).
_A_FLOOR = 1e-16
_LAMBDA_FLOOR = (1e-6 - 1.0) / 2.0
_PRUNE_FLOOR = 1e-12
_PRUNE_BURN_IN = 10


@dataclass(frozen=True)
class DualState:
    """Outcome of a dual-ascent pass.

    ``multipliers`` and ``residuals`` are full-length (one entry per block);
    residuals are the signed log-det gaps ``logdet(B_i) - logdet(B)`` and
    are NaN on pruned blocks.
    """

    multipliers: np.ndarray
    residuals: np.ndarray
    step_index: int
    converged: bool


# ---------------------------------------------------------------------------
# low-level helpers
# ---------------------------------------------------------------------------


def _chol_with_jitter(mat):
    """Cholesky factorization, adding a trace-scaled jitter on failure."""
    try:
        return cho_factor(mat, lower=True)
    except np.linalg.LinAlgError:
        pass
    m = mat.shape[0]
    base = abs(np.trace(mat)) / m
    jitter = 1e-10 * (base if base > 0 else 1.0)
    for _ in range(6):
        try:
            return cho_factor(mat + jitter * np.eye(m), lower=True)
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise np.linalg.LinAlgError("matrix not factorizable even with jitter")


def _safe_logdet(mat):
    """log-determinant of a nominally SPD matrix; jitters degenerate input."""
    sign, logdet = np.linalg.slogdet(mat)
    if sign > 0 and np.isfinite(logdet):
        return logdet
    m = mat.shape[0]
    base = abs(np.trace(mat)) / m
    jitter = 1e-10 * (base if base > 0 else 1.0)
    for _ in range(6):
        sign, logdet = np.linalg.slogdet(mat + jitter * np.eye(m))
        if sign > 0 and np.isfinite(logdet):
            return logdet
        jitter *= 10.0
    raise np.linalg.LinAlgError("log-determinant undefined even with jitter")


def _diag_blocks(matrix, layout):
    """Extract the (g, L, L) diagonal blocks of an N x N matrix."""
    g, ell = layout.num_blocks, layout.block_size
    view = matrix.reshape(g, ell, g, ell)
    return view[np.arange(g), :, np.arange(g), :]


def _second_moment_blocks(posterior, layout):
    """Per-block Sigma^i + mu^i mu^i^T, the E-step sufficient statistic."""
    g, ell = layout.num_blocks, layout.block_size
    mu_b = posterior.mean.reshape(g, ell)
    return _diag_blocks(posterior.covariance, layout) + mu_b[:, :, None] * mu_b[:, None, :]


def _pseudo_reciprocal_sqrt(gammas):
    """1/sqrt(gamma) elementwise with the convention 0 -> 0."""
    out = np.zeros_like(gammas)
    pos = gammas > 0
    out[pos] = 1.0 / np.sqrt(gammas[pos])
    return out


# ---------------------------------------------------------------------------
# posterior and evidence
# ---------------------------------------------------------------------------


def compute_posterior(model, sigma0, layout, active_mask):
    """Gaussian posterior of the signal under prior covariance ``sigma0``.

    Uses the Woodbury form ``Sigma = Sigma0 - Sigma0 Phi^T S_y^{-1} Phi
    Sigma0`` with ``S_y = I/beta + Phi Sigma0 Phi^T``, so only an M x M
    system is factorized. Pruned blocks come out with exactly zero mean and
    covariance.

    Returns
    -------
    Posterior
    """
    phi = model.design_matrix
    y = model.measurements
    beta = model.noise_precision
    sigma0 = np.asarray(sigma0, dtype=float)
    n = layout.total_dim
    if sigma0.shape != (n, n) or phi.shape[1] != n:
        raise ValidationError("sigma0/design dimensions do not match layout")

    ps = phi @ sigma0                       # Phi Sigma0, (M, N)
    w = ps @ phi.T
    w = 0.5 * (w + w.T)
    sy = w + np.eye(phi.shape[0]) / beta
    cho = _chol_with_jitter(sy)
    mu = ps.T @ cho_solve(cho, y)
    cov = sigma0 - ps.T @ cho_solve(cho, ps)

    mask = np.asarray(active_mask, dtype=bool)
    if not mask.all():
        dead = np.repeat(~mask, layout.block_size)
        mu[dead] = 0.0
        cov[dead, :] = 0.0
        cov[:, dead] = 0.0
    cov = 0.5 * (cov + cov.T)
    return Posterior(mean=mu, covariance=cov)


def cost(model, prior, layout):
    """Evidence value -y^T S_y^{-1} y - logdet(S_y) at the prior's
    hyperparameters; recorded once per outer iteration."""
    from .model import assemble_prior_covariance

    sigma0 = assemble_prior_covariance(prior, layout)
    phi = model.design_matrix
    y = model.measurements
    w = phi @ sigma0 @ phi.T
    sy = 0.5 * (w + w.T) + np.eye(phi.shape[0]) / model.noise_precision
    cho = _chol_with_jitter(sy)
    quad = float(y @ cho_solve(cho, y))
    logdet = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
    return -quad - logdet


def update_beta(model, posterior, beta_max=1e12):
    """Noise-precision EM update M / (||y - Phi mu||^2 + tr(Sigma Phi^T Phi)),
    capped at ``beta_max``."""
    phi = model.design_matrix
    y = model.measurements
    m = phi.shape[0]
    resid = float(np.sum((y - phi @ posterior.mean) ** 2))
    trace_term = float(np.sum((phi @ posterior.covariance) * phi))
    denom = resid + trace_term
    if denom <= m / beta_max:
        return float(beta_max)
    return float(m / denom)


# ---------------------------------------------------------------------------
# Q function and variance update
# ---------------------------------------------------------------------------


def q_value(prior, posterior, layout):
    """EM surrogate term in the prior hyperparameters, restricted to active
    blocks: -1/2 logdet(Sigma0) - 1/2 tr(Sigma0^{-1} (Sigma + mu mu^T)).

    Monitoring/testing only; raises if an active block carries a zero
    variance.
    """
    smom = _second_moment_blocks(posterior, layout)
    g, ell = layout.num_blocks, layout.block_size
    gam = prior.gammas.reshape(g, ell)
    total = 0.0
    for i in np.flatnonzero(prior.active_mask):
        if np.any(gam[i] <= 0):
            raise ValidationError(f"active block {i} has a nonpositive variance")
        corr = prior.correlations[i]
        root = np.sqrt(gam[i])
        u = smom[i] / np.outer(root, root)
        logdet = _safe_logdet(corr) + float(np.sum(np.log(gam[i])))
        total += -0.5 * logdet - 0.5 * float(np.trace(np.linalg.solve(corr, u)))
    return total


def q_grad_sqrt_gamma(prior, posterior, i, j, layout):
    """Analytic derivative of the surrogate with respect to sqrt(gamma_ij):
    -1/sqrt(g) + A/g^{3/2} + T/g, with A and T built from the block's
    correlation inverse and second moment."""
    gam_i = prior.gammas[layout.block_slice(i)]
    if gam_i[j] <= 0:
        raise ValidationError("gradient undefined at zero variance")
    mu_i, sig_i = block_view(posterior.mean, posterior.covariance, i, layout)
    smom = sig_i + np.outer(mu_i, mu_i)
    binv = np.linalg.inv(prior.correlations[i])
    a_ij = binv[j, j] * smom[j, j]
    recip = _pseudo_reciprocal_sqrt(gam_i)
    recip[j] = 0.0
    t_ij = float((binv[j, :] * recip) @ smom[:, j])
    root = np.sqrt(gam_i[j])
    return float(-1.0 / root + a_ij / root**3 + t_ij / gam_i[j])


def _gamma_update_arrays(gammas, correlations, active, smom, layout):
    """Batched Eq-style variance update over active blocks; pruned stay 0."""
    g, ell = layout.num_blocks, layout.block_size
    new = np.zeros_like(gammas)
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return new
    gam_b = gammas.reshape(g, ell)[idx]
    binv = np.linalg.inv(correlations[idx])
    s_act = smom[idx]
    recip = np.zeros_like(gam_b)
    pos = gam_b > 0
    recip[pos] = 1.0 / np.sqrt(gam_b[pos])
    # T_j = sum_{s != j} Binv[j, s] * recip[s] * S[s, j]
    full = np.diagonal((binv * recip[:, None, :]) @ s_act, axis1=1, axis2=2)
    diag_b = np.diagonal(binv, axis1=1, axis2=2)
    diag_s = np.diagonal(s_act, axis1=1, axis2=2)
    t = full - diag_b * recip * diag_s
    a = np.maximum(diag_b * diag_s, _A_FLOOR)
    disc = np.sqrt(t * t + 4.0 * a)
    # root of -u^2 + T u + A = 0 in u = sqrt(gamma), cancellation-free
    u = np.where(t >= 0, 0.5 * (t + disc), 2.0 * a / (disc - t))
    out_b = new.reshape(g, ell)
    out_b[idx] = u * u
    return new


def update_gamma(prior, posterior, layout):
    """Per-element variance update; zeroes the analytic sqrt-gamma gradient
    with the T and A statistics held at the current iterate."""
    smom = _second_moment_blocks(posterior, layout)
    return _gamma_update_arrays(prior.gammas, prior.correlations, prior.active_mask, smom, layout)


# ---------------------------------------------------------------------------
# correlation estimation: strong constraint, dual ascent, Toeplitz projection
# ---------------------------------------------------------------------------


def _unconstrained_blocks(gammas, active, smom, layout):
    """G_i^{-1} (Sigma^i + mu^i mu^i^T) G_i^{-1} for active blocks (zeros
    elsewhere). Requires strictly positive variances on active blocks."""
    g, ell = layout.num_blocks, layout.block_size
    gam_b = gammas.reshape(g, ell)
    out = np.zeros((g, ell, ell))
    idx = np.flatnonzero(active)
    if idx.size and np.any(gam_b[idx] <= 0):
        raise ValidationError("unconstrained correlation needs positive variances")
    roots = np.sqrt(gam_b[idx])
    blocks = smom[idx] / (roots[:, :, None] * roots[:, None, :])
    out[idx] = 0.5 * (blocks + blocks.transpose(0, 2, 1))
    return out


def unconstrained_correlation(prior, posterior, i, layout):
    """Stationary-point correlation of block ``i`` with no tying constraint."""
    if prior.gammas[layout.block_slice(i)].min() <= 0:
        raise ValidationError("unconstrained correlation needs positive variances")
    mu_i, sig_i = block_view(posterior.mean, posterior.covariance, i, layout)
    smom = sig_i + np.outer(mu_i, mu_i)
    root = np.sqrt(prior.gammas[layout.block_slice(i)])
    u = smom / np.outer(root, root)
    return 0.5 * (u + u.T)


def common_correlation(prior, posterior, layout):
    """Average unconstrained correlation over active blocks (the strong
    constraint estimate the weak constraints are tied to)."""
    idx = np.flatnonzero(prior.active_mask)
    if idx.size == 0:
        raise ValidationError("no active blocks")
    smom = _second_moment_blocks(posterior, layout)
    blocks = _unconstrained_blocks(prior.gammas, prior.active_mask, smom, layout)
    return blocks[idx].mean(axis=0)


def _dual_step_arrays(unconstrained, correlations, multipliers, active, logdet_common, step):
    """One dual-ascent step on all active blocks.

    The primal update divides this round's unconstrained matrix by
    (1 + 2*lambda_i) at the incoming multiplier; the multiplier update uses
    the log-det of the incoming (pre-update) correlation. Multipliers are
    clamped to keep 1 + 2*lambda positive.
    """
    corr_new = correlations.copy()
    lam_new = multipliers.copy()
    for i in np.flatnonzero(active):
        logdet_pre = _safe_logdet(correlations[i])
        corr_new[i] = unconstrained[i] / (1.0 + 2.0 * multipliers[i])
        lam_new[i] = max(multipliers[i] + step * (logdet_pre - logdet_common), _LAMBDA_FLOOR)
    return corr_new, lam_new


def dual_step(prior, posterior, common, step, layout):
    """Public single dual-ascent step; returns updated (correlations,
    multipliers) leaving pruned blocks untouched."""
    smom = _second_moment_blocks(posterior, layout)
    unconstrained = _unconstrained_blocks(prior.gammas, prior.active_mask, smom, layout)
    logdet_common = _safe_logdet(common)
    return _dual_step_arrays(
        unconstrained, prior.correlations, prior.multipliers, prior.active_mask,
        logdet_common, step,
    )


def _dual_residuals(correlations, active, logdet_common):
    res = np.full(correlations.shape[0], np.nan)
    for i in np.flatnonzero(active):
        res[i] = _safe_logdet(correlations[i]) - logdet_common
    return res


def _diversify_arrays(unconstrained, correlations, multipliers, active,
                      logdet_common, tol, max_iters):
    """Dual ascent with diminishing steps 1/k until every active block's
    log-det gap is within ``tol`` (checked before the first step too)."""
    corr = correlations
    lam = multipliers
    res = _dual_residuals(corr, active, logdet_common)
    k = 0
    converged = bool(np.nanmax(np.abs(res), initial=0.0) <= tol) if active.any() else True
    while not converged and k < max_iters:
        k += 1
        corr, lam = _dual_step_arrays(unconstrained, corr, lam, active, logdet_common, 1.0 / k)
        res = _dual_residuals(corr, active, logdet_common)
        converged = bool(np.nanmax(np.abs(res)) <= tol)
    return corr, DualState(multipliers=lam, residuals=res, step_index=k, converged=converged)


def diversify_complete(prior, posterior, common, tol, max_iters, layout):
    """Run the full dual-ascent inner loop (step size 1/k) and return the
    diversified correlations plus the final dual state."""
    smom = _second_moment_blocks(posterior, layout)
    unconstrained = _unconstrained_blocks(prior.gammas, prior.active_mask, smom, layout)
    logdet_common = _safe_logdet(common)
    return _diversify_arrays(
        unconstrained, prior.correlations, prior.multipliers, prior.active_mask,
        logdet_common, tol, max_iters,
    )


def toeplitz_correct(block_corr, r_clamp=0.99):
    """Project a correlation matrix onto the AR(1) Toeplitz family
    Toeplitz([1, r, ..., r^{L-1}]) with r = (mean first off-diagonal) /
    (mean main diagonal), |r| clamped below 1 so the output stays SPD."""
    b = np.asarray(block_corr, dtype=float)
    ell = b.shape[0]
    if ell == 1:
        return np.ones((1, 1))
    m0 = float(np.mean(np.diagonal(b)))
    if not m0 > 0:
        return np.eye(ell)
    m1 = 0.5 * float(np.mean(np.diagonal(b, 1)) + np.mean(np.diagonal(b, -1)))
    r = float(np.clip(m1 / m0, -r_clamp, r_clamp))
    lags = np.abs(np.arange(ell)[:, None] - np.arange(ell)[None, :])
    return r ** lags.astype(float)


def _toeplitz_batch(correlations, active, r_clamp):
    out = correlations.copy()
    for i in np.flatnonzero(active):
        out[i] = toeplitz_correct(correlations[i], r_clamp)
    return out


# ---------------------------------------------------------------------------
# pruning
# ---------------------------------------------------------------------------


def prune(prior, posterior, threshold, layout):
    """Zero out blocks whose mean variance fell below ``threshold``
    (absolute). Returns the updated (prior, posterior); pruning never
    re-activates a block."""
    g, ell = layout.num_blocks, layout.block_size
    means = prior.gammas.reshape(g, ell).mean(axis=1)
    newly = prior.active_mask & (means < threshold)
    if not newly.any():
        return prior, posterior
    mask = prior.active_mask & ~newly
    gam = prior.gammas.copy().reshape(g, ell)
    gam[newly] = 0.0
    mu = posterior.mean.copy()
    cov = posterior.covariance.copy()
    dead = np.repeat(newly, ell)
    mu[dead] = 0.0
    cov[dead, :] = 0.0
    cov[:, dead] = 0.0
    new_prior = prior.replace(gammas=gam.reshape(-1), active_mask=mask)
    return new_prior, Posterior(mean=mu, covariance=cov)


# ---------------------------------------------------------------------------
# fused posterior state for the solver loop
# ---------------------------------------------------------------------------


@dataclass
class _PosteriorState:
    mu: np.ndarray            # (N,)
    sig_blocks: np.ndarray    # (g, L, L) diagonal blocks of Sigma
    quad: float               # y^T S_y^{-1} y
    logdet: float             # logdet S_y
    resid: float              # ||y - Phi mu||^2
    trace_term: float         # tr(Phi Sigma Phi^T)
    s0_blocks: np.ndarray     # (g, L, L)
    ps_flat: np.ndarray       # Phi Sigma0, (M, N)
    x_flat: np.ndarray        # S_y^{-1} Phi Sigma0, (M, N)


def _posterior_state(phi, phi_r, y, gammas, correlations, active, beta, layout):
    g, ell = layout.num_blocks, layout.block_size
    m = phi.shape[0]
    roots = np.sqrt(gammas).reshape(g, ell)
    s0b = correlations * roots[:, :, None] * roots[:, None, :]
    s0b *= active[:, None, None]

    ps_b = np.matmul(phi_r.transpose(1, 0, 2), s0b)          # (g, M, L)
    ps_flat = ps_b.transpose(1, 0, 2).reshape(m, g * ell)
    w = ps_flat @ phi.T
    w = 0.5 * (w + w.T)  # Phi Sigma0 Phi^T
    sy = w + np.eye(m) / beta
    cho = _chol_with_jitter(sy)

    alpha = cho_solve(cho, y)
    quad = float(y @ alpha)
    logdet = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
    mu_b = np.matmul(ps_b.transpose(0, 2, 1), alpha)          # (g, L)
    mu = mu_b.reshape(-1)

    x_flat = cho_solve(cho, ps_flat)
    x_b = x_flat.reshape(m, g, ell).transpose(1, 0, 2)        # (g, M, L)
    sig_b = s0b - np.matmul(ps_b.transpose(0, 2, 1), x_b)
    sig_b = 0.5 * (sig_b + sig_b.transpose(0, 2, 1))

    resid = float(np.sum((y - phi @ mu) ** 2))
    trace_term = float(np.trace(w) - np.sum(w * cho_solve(cho, w)))
    return _PosteriorState(mu, sig_b, quad, logdet, resid, max(trace_term, 0.0),
                           s0b, ps_flat, x_flat)


def _full_covariance(state, active, layout):
    ell = layout.block_size
    cov = -state.ps_flat.T @ state.x_flat
    for i in range(layout.num_blocks):
        sl = layout.block_slice(i)
        cov[sl, sl] += state.s0_blocks[i]
    if not active.all():
        dead = np.repeat(~active, ell)
        cov[dead, :] = 0.0
        cov[:, dead] = 0.0
    return 0.5 * (cov + cov.T)


# ---------------------------------------------------------------------------
# the full solver loop
# ---------------------------------------------------------------------------


def solve(model, layout, config=None, gamma0=None, callback=None):
    """Run the full EM loop and return a :class:`SolveResult`.

    Parameters
    ----------
    model : MeasurementModel
        ``noise_precision`` is the starting beta unless ``config.beta_init``
        overrides it; with ``learn_beta`` the value is re-estimated each
        iteration.
    layout : BlockLayout
    config : SolverConfig, optional
    gamma0 : (N,) array, optional
        Explicit initial variances (overrides ``config.gamma_init_scale``).
    callback : callable, optional
        Called once per iteration with a dict of monitoring fields
        (iteration, gammas, active_mask, beta, cost, mu_change).

    Convergence is declared when the posterior mean stops moving in the
    max norm; if every block gets pruned the zero estimate is returned as
    converged.
    """
    if config is None:
        config = SolverConfig()
    phi = model.design_matrix
    y = model.measurements
    m, n = phi.shape
    if n != layout.total_dim:
        raise ValidationError(
            f"design has {n} columns but layout dimension is {layout.total_dim}"
        )
    g, ell = layout.num_blocks, layout.block_size
    phi_r = phi.reshape(m, g, ell)

    if gamma0 is not None:
        gammas = np.asarray(gamma0, dtype=float).copy()
        if gammas.shape != (n,) or np.any(gammas <= 0) or not np.all(np.isfinite(gammas)):
            raise ValidationError("gamma0 must be a positive finite length-N vector")
    else:
        gammas = np.full(n, config.gamma_init_scale)
    correlations = np.broadcast_to(np.eye(ell), (g, ell, ell)).copy()
    common = np.eye(ell)
    multipliers = np.zeros(g)
    active = np.ones(g, dtype=bool)
    if config.beta_init is not None:
        beta = float(config.beta_init)
    else:
        var_y = float(np.var(y))
        beta = 100.0 / var_y if var_y > 0 else 100.0
    dual_k = 0

    state = _posterior_state(phi, phi_r, y, gammas, correlations, active, beta, layout)
    mu = state.mu
    cost_trace = []
    converged = False
    iterations = 0

    for iterations in range(1, config.max_iters + 1):
        # prune blocks whose variances collapsed
        if config.prune_threshold > 0 and iterations > _PRUNE_BURN_IN:
            means = gammas.reshape(g, ell).mean(axis=1)
            thr = max(config.prune_threshold * means[active].max(), _PRUNE_FLOOR)
            newly = active & (means < thr)
            if newly.any():
                active = active & ~newly
                gam_b = gammas.reshape(g, ell)
                gam_b[newly] = 0.0
                mu = mu.copy()
                mu.reshape(g, ell)[newly] = 0.0
                state.sig_blocks[newly] = 0.0
            if not active.any():
                zero_post = Posterior(mean=np.zeros(n), covariance=np.zeros((n, n)))
                prior = DiversifiedPrior(gammas, correlations, common, multipliers, active)
                return SolveResult(
                    x_hat=np.zeros(n), posterior=zero_post, prior=prior, beta=beta,
                    iterations=iterations, cost_trace=np.asarray(cost_trace),
                    converged=True,
                )

        # variance update from the previous iteration's posterior
        mu_b = mu.reshape(g, ell)
        smom = state.sig_blocks + mu_b[:, :, None] * mu_b[:, None, :]
        gammas = _gamma_update_arrays(gammas, correlations, active, smom, layout)

        # correlation machinery: strong estimate, dual diversification,
        # AR(1) projection
        if config.learn_correlation:
            unconstrained = _unconstrained_blocks(gammas, active, smom, layout)
            common = unconstrained[active].mean(axis=0)
            logdet_common = _safe_logdet(common)
            if config.dual_mode == "one_step":
                dual_k += 1
                correlations, multipliers = _dual_step_arrays(
                    unconstrained, correlations, multipliers, active,
                    logdet_common, 1.0 / dual_k,
                )
            else:
                correlations, dual = _diversify_arrays(
                    unconstrained, correlations, multipliers, active,
                    logdet_common, config.dual_tol, config.dual_max_iters,
                )
                multipliers = dual.multipliers
            if config.toeplitz_enabled:
                correlations = _toeplitz_batch(correlations, active, config.r_clamp)

        # posterior refresh, then noise update
        mu_prev = mu
        state = _posterior_state(phi, phi_r, y, gammas, correlations, active, beta, layout)
        mu = state.mu
        beta_used = beta
        if config.learn_beta:
            denom = state.resid + state.trace_term
            beta = config.beta_max if denom <= m / config.beta_max else min(
                m / denom, config.beta_max
            )
        cost_trace.append(-state.quad - state.logdet)

        mu_change = float(np.max(np.abs(mu - mu_prev)))
        if callback is not None:
            callback({
                "iteration": iterations,
                "gammas": gammas.copy(),
                "active_mask": active.copy(),
                "beta": beta_used,
                "cost": cost_trace[-1],
                "mu_change": mu_change,
            })
        if mu_change < config.conv_tol:
            converged = True
            break

    posterior = Posterior(mean=mu.copy(), covariance=_full_covariance(state, active, layout))
    prior = DiversifiedPrior(gammas, correlations, common, multipliers, active)
    return SolveResult(
        x_hat=posterior.mean, posterior=posterior, prior=prior, beta=beta,
        iterations=iterations, cost_trace=np.asarray(cost_trace), converged=converged,
    )
