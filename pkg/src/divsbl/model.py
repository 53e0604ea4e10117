"""Core data types for block-sparse recovery: block layout, measurement
model, the diversified Gaussian prior, posterior containers and solver
configuration.

All containers are value objects: once constructed they are never mutated,
so they can be shared freely between threads. Solver iterations build new
objects instead of editing old ones.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np


class LayoutError(ValueError):
    """Raised for block-index or partition inconsistencies."""


class ValidationError(ValueError):
    """Raised when an input array violates a construction invariant."""


def as_finite_array(x, name, ndim=None):
    """Coerce to a float ndarray and reject non-finite entries."""
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class BlockLayout:
    """Partition of a length-N vector into ``num_blocks`` contiguous blocks
    of equal size ``block_size``.

    Block ``i`` (0-based) covers flat indices ``i*block_size`` to
    ``(i+1)*block_size - 1``.
    """

    num_blocks: int
    block_size: int

    def __post_init__(self):
        if self.num_blocks < 1 or self.block_size < 1:
            raise LayoutError("num_blocks and block_size must be positive")

    @property
    def total_dim(self) -> int:
        return self.num_blocks * self.block_size

    @classmethod
    def from_total_dim(cls, total_dim: int, block_size: int) -> "BlockLayout":
        if block_size < 1 or total_dim % block_size != 0:
            raise LayoutError(
                f"block_size {block_size} does not evenly divide dimension {total_dim}"
            )
        return cls(total_dim // block_size, block_size)

    def block_slice(self, i: int) -> slice:
        if not 0 <= i < self.num_blocks:
            raise LayoutError(f"block index {i} out of range [0, {self.num_blocks})")
        return slice(i * self.block_size, (i + 1) * self.block_size)


def block_view(vector, covariance, i, layout):
    """Return block ``i`` of a vector together with the matching diagonal
    block of a covariance matrix.

    Parameters
    ----------
    vector : (N,) array
    covariance : (N, N) array
    i : int
        0-based block index.
    layout : BlockLayout

    Returns
    -------
    (block_size,) array, (block_size, block_size) array
        Copies of the requested slices.
    """
    vector = np.asarray(vector, dtype=float)
    covariance = np.asarray(covariance, dtype=float)
    n = layout.total_dim
    if vector.shape != (n,) or covariance.shape != (n, n):
        raise LayoutError(
            f"expected vector ({n},) and covariance ({n},{n}), "
            f"got {vector.shape} and {covariance.shape}"
        )
    sl = layout.block_slice(i)
    return vector[sl].copy(), covariance[sl, sl].copy()


@dataclass(frozen=True)
class MeasurementModel:
    """Linear Gaussian observation model: measurements = design @ signal + noise,
    with isotropic noise of precision ``noise_precision``.

    The system may be underdetermined (fewer rows than columns).
    """

    design_matrix: np.ndarray
    measurements: np.ndarray
    noise_precision: float

    def __post_init__(self):
        phi = as_finite_array(self.design_matrix, "design_matrix", ndim=2)
        y = as_finite_array(self.measurements, "measurements", ndim=1)
        if phi.shape[0] < 1:
            raise ValidationError("design_matrix needs at least one row")
        if y.shape[0] != phi.shape[0]:
            raise ValidationError(
                f"measurements length {y.shape[0]} != design rows {phi.shape[0]}"
            )
        if not (np.isfinite(self.noise_precision) and self.noise_precision > 0):
            raise ValidationError("noise_precision must be positive and finite")
        object.__setattr__(self, "design_matrix", phi)
        object.__setattr__(self, "measurements", y)

    @property
    def num_measurements(self) -> int:
        return self.design_matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.design_matrix.shape[1]


@dataclass(frozen=True)
class DiversifiedPrior:
    """Hyperparameters of the diversified block-sparse Gaussian prior.

    Attributes
    ----------
    gammas : (N,) array
        Per-element prior variances; exactly zero on pruned blocks.
    correlations : (g, L, L) array
        Per-block intra-block correlation matrices (SPD on active blocks).
    common_correlation : (L, L) array
        The shared correlation matrix the per-block ones are tied to.
    multipliers : (g,) array
        Dual multipliers of the weak log-det equality constraints.
    active_mask : (g,) bool array
        False marks pruned blocks; pruning never reverses.
    """

    gammas: np.ndarray
    correlations: np.ndarray
    common_correlation: np.ndarray
    multipliers: np.ndarray
    active_mask: np.ndarray

    def __post_init__(self):
        gam = as_finite_array(self.gammas, "gammas", ndim=1)
        corr = as_finite_array(self.correlations, "correlations", ndim=3)
        common = as_finite_array(self.common_correlation, "common_correlation", ndim=2)
        lam = as_finite_array(self.multipliers, "multipliers", ndim=1)
        mask = np.asarray(self.active_mask, dtype=bool)
        g, ell, ell2 = corr.shape
        if ell != ell2 or common.shape != (ell, ell):
            raise ValidationError("correlation matrices must be square and same size")
        if gam.shape[0] != g * ell:
            raise ValidationError("gammas length inconsistent with correlation blocks")
        if lam.shape[0] != g or mask.shape[0] != g:
            raise ValidationError("multipliers/active_mask must have one entry per block")
        if np.any(gam < 0):
            raise ValidationError("gammas must be nonnegative")
        object.__setattr__(self, "gammas", gam)
        object.__setattr__(self, "correlations", corr)
        object.__setattr__(self, "common_correlation", common)
        object.__setattr__(self, "multipliers", lam)
        object.__setattr__(self, "active_mask", mask)

    @classmethod
    def initial(cls, layout: BlockLayout, scale: float = 1.0, gammas=None) -> "DiversifiedPrior":
        """Flat starting point: gammas = scale * ones, identity correlations,
        zero multipliers, everything active."""
        g, ell = layout.num_blocks, layout.block_size
        if gammas is None:
            gammas = np.full(layout.total_dim, float(scale))
        eye = np.eye(ell)
        return cls(
            gammas=np.asarray(gammas, dtype=float),
            correlations=np.broadcast_to(eye, (g, ell, ell)).copy(),
            common_correlation=eye.copy(),
            multipliers=np.zeros(g),
            active_mask=np.ones(g, dtype=bool),
        )

    def replace(self, **changes) -> "DiversifiedPrior":
        return dataclasses.replace(self, **changes)


def assemble_prior_covariance(prior: DiversifiedPrior, layout: BlockLayout) -> np.ndarray:
    """Assemble the block-diagonal prior covariance.

    Block ``i`` equals ``G_i B_i G_i`` with ``G_i = diag(sqrt(gammas_i))``,
    i.e. entry (s, k) is ``corr[i, s, k] * sqrt(gam_is * gam_ik)``. Pruned
    blocks contribute zero blocks.
    """
    g, ell = layout.num_blocks, layout.block_size
    if prior.gammas.shape[0] != layout.total_dim or prior.correlations.shape[0] != g:
        raise LayoutError("prior dimensions do not match layout")
    roots = np.sqrt(prior.gammas).reshape(g, ell)
    blocks = prior.correlations * roots[:, :, None] * roots[:, None, :]
    blocks = blocks * prior.active_mask[:, None, None]
    out = np.zeros((layout.total_dim, layout.total_dim))
    for i in range(g):
        sl = layout.block_slice(i)
        out[sl, sl] = blocks[i]
    return out


@dataclass(frozen=True)
class Posterior:
    """Gaussian posterior of the signal given the measurements."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mu = as_finite_array(self.mean, "mean", ndim=1)
        cov = as_finite_array(self.covariance, "covariance", ndim=2)
        if cov.shape != (mu.shape[0], mu.shape[0]):
            raise ValidationError("covariance shape inconsistent with mean")
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", cov)


@dataclass(frozen=True)
class SolverConfig:
    """Control knobs of the EM solver.

    ``prune_threshold`` is a relative factor: each iteration the effective
    absolute threshold is ``max(prune_threshold * max active block mean,
    1e-12)``; zero disables pruning. ``beta_init=None`` picks the standard
    data-dependent start ``100 / var(y)``. ``learn_correlation=False`` pins
    every block correlation to the identity (classic-SBL degeneracy).
    """

    max_iters: int = 500
    conv_tol: float = 1e-8
    prune_threshold: float = 2e-2
    dual_mode: str = "one_step"
    dual_tol: float = 1e-3
    dual_max_iters: int = 500
    toeplitz_enabled: bool = True
    learn_beta: bool = True
    beta_init: float | None = None
    gamma_init_scale: float = 1.0
    r_clamp: float = 0.99
    beta_max: float = 1e12
    learn_correlation: bool = True

    def __post_init__(self):
        if self.max_iters < 1 or self.dual_max_iters < 1:
            raise ValidationError("iteration limits must be positive")
        if self.conv_tol <= 0 or self.dual_tol <= 0:
            raise ValidationError("tolerances must be positive")
        if self.prune_threshold < 0:
            raise ValidationError("prune_threshold must be nonnegative")
        if self.dual_mode not in ("one_step", "complete"):
            raise ValidationError("dual_mode must be 'one_step' or 'complete'")
        if self.beta_init is not None and self.beta_init <= 0:
            raise ValidationError("beta_init must be positive")
        if not 0 < self.r_clamp < 1:
            raise ValidationError("r_clamp must lie in (0, 1)")
        if self.gamma_init_scale <= 0 or self.beta_max <= 0:
            raise ValidationError("gamma_init_scale and beta_max must be positive")


@dataclass(frozen=True)
class SolveResult:
    """Everything a solver run produces: the MAP estimate (= posterior mean),
    final hyperparameters, iteration diagnostics and the evidence trace."""

    x_hat: np.ndarray
    posterior: Posterior
    prior: DiversifiedPrior
    beta: float
    iterations: int
    cost_trace: np.ndarray = field(repr=False)
    converged: bool = True
