"""Amplitude-scaling + noise augmentation statistics and determinism."""

import numpy as np
import pytest

from resonant_auth.augment import AugmentConfig, augment_segment, make_rng, spawn_rng
from resonant_auth.dsp import Segment


def make_segment(n=8820, seed=0):
    rng = np.random.default_rng(seed)
    return Segment(samples=rng.normal(0.0, 0.1, n), sample_rate=44100)


def test_variant_count():
    seg = make_segment()
    cfg = AugmentConfig()
    out = augment_segment(seg, cfg, make_rng(1))
    assert len(out) == len(cfg.coeffs) * cfg.variants_per_coeff == 10
    assert all(v.samples.size == seg.samples.size for v in out)
    assert all(v.sample_rate == seg.sample_rate for v in out)


def test_identity_coeff_without_noise():
    seg = make_segment()
    cfg = AugmentConfig(coeffs=(1.0,), noise_sigma=0.0, variants_per_coeff=1)
    (out,) = augment_segment(seg, cfg, make_rng(1))
    np.testing.assert_array_equal(out.samples, seg.samples)


def test_pure_scaling_without_noise():
    seg = make_segment()
    cfg = AugmentConfig(coeffs=(0.5, 2.0), noise_sigma=0.0, variants_per_coeff=1)
    half, double = augment_segment(seg, cfg, make_rng(1))
    np.testing.assert_allclose(half.samples, 0.5 * seg.samples, rtol=0, atol=0)
    np.testing.assert_allclose(double.samples, 2.0 * seg.samples, rtol=0, atol=0)


def test_noise_statistics():
    # Residual (variant - coeff*seg) must be zero-mean Gaussian with the
    # configured sigma. 1000 variants x 8820 samples gives tight bounds.
    seg = make_segment()
    sigma = 0.01
    cfg = AugmentConfig(coeffs=(1.0,), noise_sigma=sigma, variants_per_coeff=1000)
    out = augment_segment(seg, cfg, make_rng(42))
    residuals = np.stack([v.samples - seg.samples for v in out])
    n = residuals.size
    assert abs(residuals.mean()) < 3 * sigma / np.sqrt(n)
    assert residuals.var() == pytest.approx(sigma**2, rel=0.10)


def test_each_variant_has_independent_noise():
    seg = make_segment()
    cfg = AugmentConfig(coeffs=(1.0,), noise_sigma=0.002, variants_per_coeff=2)
    a, b = augment_segment(seg, cfg, make_rng(3))
    assert not np.array_equal(a.samples, b.samples)


def test_determinism_same_seed():
    seg = make_segment()
    cfg = AugmentConfig()
    out1 = augment_segment(seg, cfg, make_rng(7))
    out2 = augment_segment(seg, cfg, make_rng(7))
    for a, b in zip(out1, out2):
        np.testing.assert_array_equal(a.samples, b.samples)


def test_different_seeds_differ():
    seg = make_segment()
    cfg = AugmentConfig()
    out1 = augment_segment(seg, cfg, make_rng(7))
    out2 = augment_segment(seg, cfg, make_rng(8))
    assert any(not np.array_equal(a.samples, b.samples) for a, b in zip(out1, out2))


def test_spawn_rng_deterministic_and_independent():
    parent1, parent2 = make_rng(5), make_rng(5)
    child1, child2 = spawn_rng(parent1), spawn_rng(parent2)
    np.testing.assert_array_equal(
        child1.normal(size=100), child2.normal(size=100)
    )
    # A second spawn from the same parent yields a different stream.
    child3 = spawn_rng(parent1)
    assert not np.array_equal(
        spawn_rng(make_rng(5)).normal(size=100),
        child3.normal(size=100),
    )
