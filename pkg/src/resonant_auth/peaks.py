"""Resonance-peak extraction and the weighted peak-matching distance.

A peak must clear three gates: height (fraction of the spectrum maximum),
topographic prominence (a multiple of the spectrum's median absolute
deviation), and minimum bin separation (larger peak wins a conflict). The
10 largest survivors form the peak set. The distance between an original
and a reconstructed set sums, per original peak, the weighted distance to
its nearest reconstructed peak and adds a penalty per unmatched peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .dsp import Spectrum
from .errors import ArgumentError

MAX_PEAKS = 10


@dataclass(frozen=True)
class Peak:
    freq_hz: float
    amplitude: float
    bin: int


@dataclass
class PeakSet:
    """Up to 10 peaks, sorted by descending amplitude."""

    peaks: tuple[Peak, ...]

    def __len__(self) -> int:
        return len(self.peaks)


@dataclass
class MatchConfig:
    w_f: float = 2.0
    w_a: float = 0.5
    penalty_per_unmatched: float = 100.0
    min_height_fraction: float = 0.15
    min_separation_bins: int = 150
    prominence_mad_factor: float = 5.0


def mad(values) -> float:
    """Median absolute deviation from the median."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ArgumentError("mad of an empty sequence")
    return float(np.median(np.abs(values - np.median(values))))


def find_peaks(sp: Spectrum, cfg: MatchConfig) -> PeakSet:
    """Extract the dominant peaks of a normalized spectrum."""
    bins = sp.bins
    candidates, _ = scipy.signal.find_peaks(bins)
    if candidates.size == 0:
        return PeakSet(peaks=())

    height_min = cfg.min_height_fraction * bins.max()
    prominences = scipy.signal.peak_prominences(bins, candidates)[0]
    keep = (bins[candidates] >= height_min) & (
        prominences >= cfg.prominence_mad_factor * mad(bins)
    )
    candidates = candidates[keep]

    # Greedy separation: visit by descending amplitude (ties: lower bin),
    # drop anything too close to an already-accepted peak.
    order = sorted(range(candidates.size), key=lambda i: (-bins[candidates[i]], candidates[i]))
    accepted: list[int] = []
    for i in order:
        idx = int(candidates[i])
        if all(abs(idx - other) >= cfg.min_separation_bins for other in accepted):
            accepted.append(idx)
        if len(accepted) == MAX_PEAKS:
            break

    peaks = tuple(
        Peak(freq_hz=(idx + 1) * sp.bin_hz, amplitude=float(bins[idx]), bin=idx + 1)
        for idx in accepted
    )
    return PeakSet(peaks=peaks)


def pair_distance(p: Peak, q: Peak, cfg: MatchConfig) -> float:
    """sqrt(w_f*(f1-f2)^2 + w_a*(a1-a2)^2), frequencies in Hz."""
    return math.sqrt(
        cfg.w_f * (p.freq_hz - q.freq_hz) ** 2 + cfg.w_a * (p.amplitude - q.amplitude) ** 2
    )


def set_distance(original: PeakSet, reconstructed: PeakSet, cfg: MatchConfig) -> float:
    """Total matching distance between two peak sets.

    Each original peak is matched to its nearest reconstructed peak
    (reuse allowed, ties broken toward the lower bin); the cardinality
    difference is penalized per unmatched peak.
    """
    total = cfg.penalty_per_unmatched * abs(len(original) - len(reconstructed))
    if not original.peaks or not reconstructed.peaks:
        return total
    for p in original.peaks:
        best = min(
            reconstructed.peaks, key=lambda q: (pair_distance(p, q, cfg), q.bin)
        )
        total += pair_distance(p, best, cfg)
    return total


def peaks_to_rows(ps: PeakSet) -> list[tuple[float, float, int]]:
    """CSV-friendly (freq_hz, amplitude, bin) rows."""
    return [(p.freq_hz, p.amplitude, p.bin) for p in ps.peaks]
