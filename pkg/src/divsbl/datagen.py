"""Synthetic block-sparse instances: Gaussian designs, block-sparse signals
with homo- or heteroscedastic amplitudes and optional AR(1) intra-block
correlation, SNR-calibrated noise, and the orthonormal DCT basis for
transform-domain experiments.

Every generator is a pure function of its arguments and seed (PCG64 via
``numpy.random.default_rng``), so identical inputs give bit-identical
outputs on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SpecError(ValueError):
    """Raised for infeasible generator specifications."""


@dataclass(frozen=True)
class SignalSpec:
    """Recipe for a random block-sparse ground truth.

    ``block_size_range`` is inclusive on both ends; blocks are placed
    without overlap, uniformly over the feasible non-overlapping layouts.
    ``homoscedastic`` draws one variance shared by every element of every
    block; ``heteroscedastic`` draws a variance per element, so amplitude
    scales vary inside each block. Both draw uniformly over
    ``variance_range``.

    ``intra_block_corr`` is the AR(1) coefficient of the amplitudes within
    each block (0 gives i.i.d. draws). ``align_to`` restricts block starts
    to multiples of the given length (all blocks must then have exactly
    that size), reproducing grid-aligned benchmark signals.
    """

    dim: int
    num_nonzero_blocks: int
    block_size_range: tuple[int, int] = (6, 6)
    variance_mode: str = "heteroscedastic"
    variance_range: tuple[float, float] = (0.1, 10.0)
    intra_block_corr: float = 0.0
    align_to: int | None = None
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.block_size_range
        if self.dim < 1 or self.num_nonzero_blocks < 0:
            raise SpecError("dim must be positive, block count nonnegative")
        if not (1 <= lo <= hi):
            raise SpecError("block_size_range must satisfy 1 <= min <= max")
        if self.variance_mode not in ("homoscedastic", "heteroscedastic"):
            raise SpecError("variance_mode must be homo- or heteroscedastic")
        vlo, vhi = self.variance_range
        if not (0 < vlo <= vhi):
            raise SpecError("variance_range must be positive and ordered")
        if not -1 < self.intra_block_corr < 1:
            raise SpecError("intra_block_corr must lie in (-1, 1)")
        if self.align_to is not None:
            if (lo, hi) != (self.align_to, self.align_to):
                raise SpecError("align_to requires fixed block size equal to it")
            if self.dim % self.align_to != 0:
                raise SpecError("align_to must divide dim")


@dataclass(frozen=True)
class GroundTruth:
    """A drawn signal: the vector, its support blocks as (start, length)
    pairs, and the variance each block was drawn with."""

    x_true: np.ndarray
    support_blocks: tuple[tuple[int, int], ...]
    per_block_variance: tuple[float, ...]


def gen_design_matrix(m, n, seed):
    """i.i.d. standard Gaussian design with unit-normalized columns."""
    if m < 1 or n < 1:
        raise SpecError("design dimensions must be positive")
    rng = np.random.default_rng(seed)
    phi = rng.standard_normal((m, n))
    norms = np.linalg.norm(phi, axis=0)
    # a zero column has probability zero; regenerate defensively
    while np.any(norms == 0):
        bad = norms == 0
        phi[:, bad] = rng.standard_normal((m, int(bad.sum())))
        norms = np.linalg.norm(phi, axis=0)
    return phi / norms


def _draw_placement(rng, n, k0, spec):
    """Block sizes and non-overlapping start positions."""
    if spec.align_to is not None:
        ell = spec.align_to
        slots = n // ell
        if k0 > slots:
            raise SpecError(f"cannot place {k0} aligned blocks in {slots} slots")
        chosen = np.sort(rng.choice(slots, size=k0, replace=False))
        return [(int(c) * ell, ell) for c in chosen]
    lo, hi = spec.block_size_range
    sizes = rng.integers(lo, hi + 1, size=k0)
    total = int(sizes.sum())
    if total > n:
        raise SpecError(
            f"cannot pack {k0} blocks totalling {total} elements into dimension {n}"
        )
    # gaps g_0..g_k0 >= 0 with sum = n - total, uniform over compositions
    free = n - total
    cuts = np.sort(rng.choice(free + k0, size=k0, replace=False))
    gaps = np.diff(np.concatenate(([-1], cuts, [free + k0]))) - 1
    blocks = []
    pos = 0
    for i in range(k0):
        pos += int(gaps[i])
        blocks.append((pos, int(sizes[i])))
        pos += int(sizes[i])
    return blocks


def gen_block_sparse(spec: SignalSpec) -> GroundTruth:
    """Draw a block-sparse signal according to ``spec``.

    Placements are uniform over non-overlapping layouts (stars-and-bars gap
    sampling). Amplitudes within each block are a stationary AR(1) sequence
    at the block's variance; the default coefficient 0 makes them i.i.d.
    Gaussian.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.dim
    k0 = spec.num_nonzero_blocks
    x = np.zeros(n)
    if k0 == 0:
        return GroundTruth(x, (), ())
    blocks = _draw_placement(rng, n, k0, spec)

    vlo, vhi = spec.variance_range
    shared = rng.uniform(vlo, vhi) if spec.variance_mode == "homoscedastic" else None

    rho = spec.intra_block_corr
    block_vars = []
    for pos, size in blocks:
        if shared is not None:
            var = np.full(size, shared)
        else:
            var = rng.uniform(vlo, vhi, size=size)
        innov = rng.standard_normal(size)
        amp = np.empty(size)
        amp[0] = innov[0]
        for t in range(1, size):
            amp[t] = rho * amp[t - 1] + np.sqrt(1.0 - rho * rho) * innov[t]
        x[pos:pos + size] = np.sqrt(var) * amp
        block_vars.append(float(var.mean()))
    return GroundTruth(x, tuple(blocks), tuple(block_vars))


def gen_audio_like(n, num_blocks, block_size, energy_floor, intra_block_corr, seed):
    """Audio-style transform-domain coefficients: grid-aligned blocks whose
    energies decay log-uniformly from 1 down to ``energy_floor``, mimicking
    the few-dominant-bands structure of audio spectra. Within a block,
    per-element scales jitter around the block energy and amplitudes follow
    an AR(1) sequence.

    Returns a GroundTruth over the coefficient vector.
    """
    if n < 1 or block_size < 1 or n % block_size != 0:
        raise SpecError("block_size must divide n")
    slots = n // block_size
    if not 0 < num_blocks <= slots:
        raise SpecError(f"cannot place {num_blocks} blocks in {slots} slots")
    if not 0 < energy_floor <= 1:
        raise SpecError("energy_floor must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(slots, size=num_blocks, replace=False))
    scales = 10.0 ** np.linspace(0.0, np.log10(energy_floor), num_blocks)
    rng.shuffle(scales)
    x = np.zeros(n)
    blocks = []
    block_vars = []
    rho = intra_block_corr
    for c, s in zip(chosen, scales):
        v = s * rng.uniform(0.5, 1.5, size=block_size)
        innov = rng.standard_normal(block_size)
        amp = np.empty(block_size)
        amp[0] = innov[0]
        for t in range(1, block_size):
            amp[t] = rho * amp[t - 1] + np.sqrt(1.0 - rho * rho) * innov[t]
        start = int(c) * block_size
        x[start:start + block_size] = np.sqrt(v) * amp
        blocks.append((start, block_size))
        block_vars.append(float(v.mean()))
    return GroundTruth(x, tuple(blocks), tuple(block_vars))


def add_noise(y_clean, snr_db, seed):
    """Additive white Gaussian noise calibrated so the expected SNR is
    ``snr_db``. Returns the noisy vector and the true noise precision."""
    y_clean = np.asarray(y_clean, dtype=float)
    energy = float(np.sum(y_clean**2))
    if energy == 0:
        raise ValueError("cannot set an SNR for an all-zero clean signal")
    m = y_clean.shape[0]
    sigma2 = energy / (m * 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, np.sqrt(sigma2), size=m)
    return y_clean + noise, 1.0 / sigma2


def dct_basis(n):
    """Orthonormal type-II DCT analysis matrix D (rows are basis functions):
    ``D @ x`` gives the DCT coefficients and ``D.T`` is the synthesis
    operator. ``D @ D.T = I``."""
    if n < 1:
        raise SpecError("dimension must be positive")
    k = np.arange(n)[:, None]
    pos = np.arange(n)[None, :]
    d = np.sqrt(2.0 / n) * np.cos(np.pi * k * (2 * pos + 1) / (2.0 * n))
    d[0, :] = np.sqrt(1.0 / n)
    return d
