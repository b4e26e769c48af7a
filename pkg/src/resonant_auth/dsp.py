"""Signal chain from raw clip to the fixed-length normalized magnitude spectrum.

Onset detection -> segment extraction (with a forward shift past the strike
transient) -> RMS normalization -> Hamming window -> zero-padded FFT ->
max-normalized one-sided magnitude spectrum of exactly 8820 bins
(2.5 Hz/bin at 44100 Hz).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip
from .errors import ArgumentError, NoOnsetError, SilentSegmentError, UnsupportedError

SAMPLE_RATE = 44100
SEGMENT_LEN = 8820
FFT_LEN = 2 * SEGMENT_LEN  # 17640 -> one-sided spectrum of 8820 bins after dropping DC
SILENCE_EPS = 1e-8


@dataclass
class PreprocessConfig:
    onset_fraction: float = 0.10
    shift_seconds: float = 0.08
    segment_len: int = SEGMENT_LEN
    target_rms: float = 0.1
    sample_rate: int = SAMPLE_RATE


@dataclass
class Segment:
    """Exactly ``segment_len`` samples cut from a clip."""

    samples: np.ndarray
    sample_rate: int


@dataclass
class Spectrum:
    """One-sided magnitude spectrum; bin k (1-based) sits at ``k * bin_hz``."""

    bins: np.ndarray
    bin_hz: float

    @property
    def freqs(self) -> np.ndarray:
        return (np.arange(self.bins.size) + 1) * self.bin_hz


def detect_onset(clip: AudioClip, cfg: PreprocessConfig) -> int:
    """Index of the first sample whose magnitude reaches the onset threshold."""
    mags = np.abs(clip.samples)
    peak = mags.max() if mags.size else 0.0
    if peak <= 0.0:
        raise NoOnsetError("clip is all zeros; no onset")
    idx = np.flatnonzero(mags >= cfg.onset_fraction * peak)
    return int(idx[0])


def extract_segment(clip: AudioClip, onset: int, cfg: PreprocessConfig) -> Segment:
    """Cut ``segment_len`` samples starting a fixed shift after the onset."""
    start = onset + int(round(cfg.shift_seconds * clip.sample_rate))
    out = np.zeros(cfg.segment_len, dtype=np.float64)
    chunk = clip.samples[start : start + cfg.segment_len]
    out[: chunk.size] = chunk
    return Segment(samples=out, sample_rate=clip.sample_rate)


def rms(seg: Segment) -> float:
    return float(np.sqrt(np.mean(np.square(seg.samples))))


def normalize_rms(seg: Segment, cfg: PreprocessConfig) -> Segment:
    """Scale the segment so its RMS equals ``cfg.target_rms``."""
    level = rms(seg)
    if level <= SILENCE_EPS:
        raise SilentSegmentError(f"segment RMS {level:.3g} below {SILENCE_EPS}")
    return Segment(samples=seg.samples * (cfg.target_rms / level), sample_rate=seg.sample_rate)


def hamming_window(n: int) -> np.ndarray:
    """Symmetric Hamming window: 0.54 - 0.46*cos(2*pi*k/(n-1))."""
    if n < 2:
        raise ArgumentError(f"window length must be >= 2, got {n}")
    return np.hamming(n)


def magnitude_spectrum(seg: Segment) -> Spectrum:
    """Windowed, zero-padded FFT magnitudes at bins 1..segment_len (DC dropped)."""
    n = seg.samples.size
    windowed = seg.samples * hamming_window(n)
    spec = np.fft.rfft(windowed, 2 * n)
    return Spectrum(bins=np.abs(spec[1 : n + 1]), bin_hz=seg.sample_rate / (2 * n))


def normalize_spectrum(sp: Spectrum) -> Spectrum:
    """Divide by the maximum so the peak bin is 1.0; all-zero passes through."""
    peak = sp.bins.max() if sp.bins.size else 0.0
    if peak <= 0.0:
        return Spectrum(bins=sp.bins.copy(), bin_hz=sp.bin_hz)
    return Spectrum(bins=sp.bins / peak, bin_hz=sp.bin_hz)


def condense_spectrum(sp: Spectrum, width: int) -> Spectrum:
    """Max-pool the spectrum down to ``width`` bins (reduced-width pipelines)."""
    n = sp.bins.size
    if width == n:
        return sp
    if not 0 < width < n:
        raise ArgumentError(f"width must be in 1..{n}, got {width}")
    edges = np.round(np.linspace(0, n, width + 1)).astype(int)
    bins = np.maximum.reduceat(sp.bins, edges[:-1])
    return Spectrum(bins=bins, bin_hz=sp.bin_hz * n / width)


def prepare_segment(clip: AudioClip, cfg: PreprocessConfig) -> Segment:
    """Onset detection, extraction, and RMS normalization in one step."""
    if clip.sample_rate != cfg.sample_rate:
        raise UnsupportedError(
            f"clip sample rate {clip.sample_rate} != required {cfg.sample_rate}"
        )
    onset = detect_onset(clip, cfg)
    return normalize_rms(extract_segment(clip, onset, cfg), cfg)


def segment_to_spectrum(seg: Segment) -> Spectrum:
    return normalize_spectrum(magnitude_spectrum(seg))


def preprocess(clip: AudioClip, cfg: PreprocessConfig) -> Spectrum:
    """Full clip-to-normalized-spectrum chain."""
    return segment_to_spectrum(prepare_segment(clip, cfg))


def spectrogram(clip: AudioClip, frame: int, hop: int):
    """Hamming-windowed STFT magnitudes.

    Returns (magnitudes, times_s, freqs_hz); rows are frames.
    """
    n = clip.samples.size
    if frame < 2 or frame > n:
        raise ArgumentError(f"frame must be in 2..{n}, got {frame}")
    if hop < 1:
        raise ArgumentError(f"hop must be >= 1, got {hop}")
    window = hamming_window(frame)
    starts = np.arange(0, n - frame + 1, hop)
    mags = np.empty((starts.size, frame // 2 + 1))
    for i, s in enumerate(starts):
        mags[i] = np.abs(np.fft.rfft(clip.samples[s : s + frame] * window))
    times = (starts + frame / 2) / clip.sample_rate
    freqs = np.arange(frame // 2 + 1) * clip.sample_rate / frame
    return mags, times, freqs
