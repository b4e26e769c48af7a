import numpy as np
import pytest

from resonant_auth import dsp, synth
from resonant_auth.audio_io import AudioClip
from resonant_auth.augment import make_rng
from resonant_auth.dsp import PreprocessConfig, Segment
from resonant_auth.errors import ArgumentError, NoOnsetError, SilentSegmentError

CFG = PreprocessConfig()


def naive_dft_magnitudes(x, n_fft):
    """O(n^2) DFT oracle, blocked matrix product over explicit twiddles."""
    padded = np.zeros(n_fft)
    padded[: x.size] = x
    out = np.empty(n_fft // 2 + 1, dtype=complex)
    ks = np.arange(n_fft)
    block = 256
    for start in range(0, out.size, block):
        rows = np.arange(start, min(start + block, out.size))
        twiddle = np.exp(-2j * np.pi * np.outer(rows, ks) / n_fft)
        out[rows] = twiddle @ padded
    return np.abs(out)


def test_onset_single_spike():
    x = np.zeros(2000)
    x[1000] = 1.0
    assert dsp.detect_onset(AudioClip(x, 44100), CFG) == 1000


def test_onset_constant_clip():
    assert dsp.detect_onset(AudioClip(np.full(100, 0.5), 44100), CFG) == 0


def test_onset_all_zero():
    with pytest.raises(NoOnsetError):
        dsp.detect_onset(AudioClip(np.zeros(100), 44100), CFG)


def test_onset_synthetic_strike_position():
    clip, truth = synth.synthesize(synth.KANGAROO, None, make_rng(2), silence_prefix_s=0.5)
    onset = dsp.detect_onset(clip, CFG)
    assert truth.strike_index == 22050
    assert abs(onset - 22050) <= 5


def test_extract_segment_maximal_padding():
    clip = AudioClip(np.ones(100), 44100)
    seg = dsp.extract_segment(clip, 99, PreprocessConfig(shift_seconds=0.0))
    assert seg.samples.size == 8820
    assert seg.samples[0] == 1.0
    assert np.all(seg.samples[1:] == 0.0)


def test_extract_segment_no_padding_is_raw_slice():
    rng = make_rng(0)
    clip = AudioClip(rng.uniform(-1, 1, 44100), 44100)
    onset = 100
    seg = dsp.extract_segment(clip, onset, CFG)
    start = onset + round(0.08 * 44100)
    np.testing.assert_array_equal(seg.samples, clip.samples[start : start + 8820])


def test_segment_length_always_8820():
    rng = make_rng(1)
    for n in (1, 100, 8820, 20000, 50000):
        clip = AudioClip(rng.uniform(-1, 1, n), 44100)
        for onset in (0, n // 2, n - 1):
            assert dsp.extract_segment(clip, onset, CFG).samples.size == 8820


def test_shift_skips_strike_transient():
    clip, _ = synth.synthesize(synth.KANGAROO, None, make_rng(9))
    onset = dsp.detect_onset(clip, CFG)
    shifted = dsp.extract_segment(clip, onset, CFG)
    unshifted = dsp.extract_segment(clip, onset, PreprocessConfig(shift_seconds=0.0))

    def flatness(seg):
        mags = dsp.magnitude_spectrum(seg).bins + 1e-12
        return np.exp(np.mean(np.log(mags))) / np.mean(mags)

    assert flatness(shifted) < flatness(unshifted)


def test_rms_constant():
    assert dsp.rms(Segment(np.full(8820, -0.3), 44100)) == pytest.approx(0.3)


def test_rms_sine_analytic():
    t = np.arange(8820) / 44100.0
    seg = Segment(0.7 * np.sin(2 * np.pi * 2500.0 * t), 44100)  # 500 whole cycles
    assert dsp.rms(seg) == pytest.approx(0.7 / np.sqrt(2), abs=1e-6)


def test_rms_zero():
    assert dsp.rms(Segment(np.zeros(8820), 44100)) == 0.0


def test_normalize_rms_scaling():
    seg = Segment(np.full(8820, 0.5), 44100)
    out = dsp.normalize_rms(seg, CFG)
    np.testing.assert_allclose(out.samples, seg.samples * 0.2, rtol=1e-12)
    assert abs(dsp.rms(out) - 0.1) < 1e-9


def test_normalize_rms_identity():
    rng = make_rng(4)
    seg = Segment(rng.uniform(-1, 1, 8820), 44100)
    seg = dsp.normalize_rms(seg, CFG)
    again = dsp.normalize_rms(seg, CFG)
    np.testing.assert_allclose(again.samples, seg.samples, atol=1e-12)


def test_normalize_rms_target_hit():
    rng = make_rng(6)
    for _ in range(10):
        seg = Segment(rng.uniform(-1, 1, 8820) * rng.uniform(0.01, 1.0), 44100)
        assert abs(dsp.rms(dsp.normalize_rms(seg, CFG)) - 0.1) < 1e-9


def test_normalize_rms_silent():
    with pytest.raises(SilentSegmentError):
        dsp.normalize_rms(Segment(np.zeros(8820), 44100), CFG)


def test_hamming_endpoints_and_symmetry():
    for n in (2, 5, 64, 8820):
        w = dsp.hamming_window(n)
        assert w[0] == pytest.approx(0.08)
        assert w[-1] == pytest.approx(0.08)
        np.testing.assert_allclose(w, w[::-1], atol=1e-15)
    assert dsp.hamming_window(5)[2] == pytest.approx(1.0)


def test_hamming_too_short():
    with pytest.raises(ArgumentError):
        dsp.hamming_window(1)


def test_spectrum_shape_and_resolution():
    sp = dsp.magnitude_spectrum(Segment(np.zeros(8820), 44100))
    assert sp.bins.size == 8820
    assert sp.bin_hz == pytest.approx(2.5)
    assert np.all(sp.bins == 0.0)


def test_spectrum_sine_at_exact_bin():
    t = np.arange(8820) / 44100.0
    for k in (100, 1508, 4000):
        seg = Segment(np.sin(2 * np.pi * (k * 2.5) * t), 44100)
        sp = dsp.magnitude_spectrum(seg)
        assert np.argmax(sp.bins) == k - 1  # array index k-1 <-> bin k
        assert sp.freqs[np.argmax(sp.bins)] == pytest.approx(k * 2.5)


def test_fft_matches_naive_dft():
    rng = make_rng(12)
    for _ in range(3):
        seg = Segment(rng.uniform(-1, 1, 8820), 44100)
        sp = dsp.magnitude_spectrum(seg)
        oracle = naive_dft_magnitudes(seg.samples * dsp.hamming_window(8820), 17640)
        np.testing.assert_allclose(sp.bins, oracle[1:8821], rtol=1e-6, atol=1e-9)


def test_parseval_unwindowed():
    rng = make_rng(13)
    x = rng.uniform(-1, 1, 8820)
    spec = np.fft.fft(x, 17640)
    energy_time = np.sum(x**2)
    energy_freq = np.sum(np.abs(spec) ** 2) / 17640
    assert energy_freq == pytest.approx(energy_time, rel=1e-6)


def test_normalize_spectrum_basic():
    sp = dsp.Spectrum(np.array([2.0, 4.0, 1.0]), 2.5)
    np.testing.assert_allclose(dsp.normalize_spectrum(sp).bins, [0.5, 1.0, 0.25])


def test_normalize_spectrum_zero_passthrough():
    sp = dsp.Spectrum(np.zeros(8), 2.5)
    assert np.all(dsp.normalize_spectrum(sp).bins == 0.0)


def test_normalize_spectrum_idempotent():
    rng = make_rng(7)
    sp = dsp.Spectrum(rng.uniform(0, 3, 100), 2.5)
    once = dsp.normalize_spectrum(sp)
    twice = dsp.normalize_spectrum(once)
    np.testing.assert_array_equal(once.bins, twice.bins)


def test_pipeline_deterministic():
    clip, _ = synth.synthesize(synth.KANGAROO, None, make_rng(3))
    a = dsp.preprocess(clip, CFG)
    b = dsp.preprocess(clip, CFG)
    np.testing.assert_array_equal(a.bins, b.bins)


def test_condense_spectrum():
    rng = make_rng(8)
    sp = dsp.Spectrum(rng.uniform(0, 1, 8820), 2.5)
    small = dsp.condense_spectrum(sp, 1024)
    assert small.bins.size == 1024
    assert small.bins.max() == sp.bins.max()
    assert small.bin_hz == pytest.approx(2.5 * 8820 / 1024)


def test_spectrogram_sine_ridge():
    t = np.arange(44100) / 44100.0
    clip = AudioClip(np.sin(2 * np.pi * 5000.0 * t), 44100)
    mags, times, freqs = dsp.spectrogram(clip, frame=1024, hop=512)
    ridge = freqs[np.argmax(mags, axis=1)]
    assert np.all(np.abs(ridge - 5000.0) < 44100 / 1024)
    assert times.size == mags.shape[0]


def test_spectrogram_zero_signal():
    mags, _, _ = dsp.spectrogram(AudioClip(np.zeros(4096), 44100), frame=512, hop=256)
    assert np.all(mags == 0.0)


def test_spectrogram_synthetic_ridges():
    clip, _ = synth.synthesize(synth.KANGAROO, None, make_rng(14), ring_seconds=0.8)
    mags, times, freqs = dsp.spectrogram(clip, frame=4096, hop=1024)
    late = mags[times > 0.4].mean(axis=0)  # after the strike transient fades
    resolution = 44100 / 4096
    for target in (3770.0, 3505.62, 8648.75, 15258.12):
        window = np.abs(freqs - target) < 3 * resolution
        outside = np.abs(freqs - target) > 10 * resolution
        assert late[window].max() > 20 * np.median(late[outside])


def test_spectrogram_bad_args():
    clip = AudioClip(np.zeros(100), 44100)
    with pytest.raises(ArgumentError):
        dsp.spectrogram(clip, frame=200, hop=10)
    with pytest.raises(ArgumentError):
        dsp.spectrogram(clip, frame=50, hop=0)


def test_preprocess_rejects_other_sample_rates():
    from resonant_auth.errors import UnsupportedError

    clip = AudioClip(np.ones(48000), 48000)
    with pytest.raises(UnsupportedError):
        dsp.preprocess(clip, CFG)
