"""Training-set expansion: amplitude scaling plus additive Gaussian noise.

Operates on RMS-normalized time-domain segments, before windowing and FFT.
All randomness flows through a seeded numpy Generator so augmented sets are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsp import Segment


@dataclass
class AugmentConfig:
    coeffs: tuple[float, ...] = (0.5, 0.8, 1.0, 1.2, 1.5)
    noise_sigma: float = 0.002
    variants_per_coeff: int = 2


def make_rng(seed: int) -> np.random.Generator:
    """Seeded, platform-stable random generator."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rng(rng: np.random.Generator) -> np.random.Generator:
    """Derive an independent child stream (for per-file/per-task seeding)."""
    return make_rng(int(rng.integers(0, 2**63)))


def augment_segment(seg: Segment, cfg: AugmentConfig, rng: np.random.Generator) -> list[Segment]:
    """All scaled+noised variants of one normalized segment.

    variant[n] = coeff * seg[n] + eta[n],  eta ~ N(0, noise_sigma^2)
    """
    out = []
    for coeff in cfg.coeffs:
        for _ in range(cfg.variants_per_coeff):
            noise = rng.normal(0.0, cfg.noise_sigma, seg.samples.size)
            out.append(Segment(samples=coeff * seg.samples + noise, sample_rate=seg.sample_rate))
    return out
