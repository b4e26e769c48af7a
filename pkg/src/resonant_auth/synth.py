"""Synthetic coin-strike generator.

Produces labeled recordings from resonance-mode tables: a short broadband
strike burst followed by exponentially decaying sinusoids at the coin's
natural frequencies, over a low noise floor. Serves as the training and
evaluation corpus in place of real recordings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .audio_io import AudioClip, DatasetManifest, ManifestEntry, save_manifest, save_wav
from .augment import spawn_rng
from .dsp import SAMPLE_RATE
from .errors import ArgumentError

NYQUIST = SAMPLE_RATE / 2.0


@dataclass(frozen=True)
class Mode:
    freq_hz: float
    rel_amp_db: float  # relative to the dominant mode (0 dB)
    decay_tau_s: float


@dataclass
class CoinProfile:
    name: str
    modes: tuple[Mode, ...]
    strike_duration_s: float = 0.01
    strike_amplitude: float = 1.0
    noise_floor: float = 1e-4
    ring_amplitude: float = 0.5  # time-domain amplitude of the dominant mode


@dataclass
class PerturbModel:
    # Specimen-to-specimen spread (per-mode sigmas, measured values).
    freq_jitter_sigma_hz: tuple[float, ...] = (47.28, 55.07, 5.62, 7.33)
    # Amplitude spread is kept small: spectra are max-normalized, so jitter on
    # the dominant modes rescales every other mode's relative height and large
    # sigmas push weak modes across the peak-detection height gate.
    amp_jitter_sigma_db: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)
    # Strike-to-strike wobble of one physical coin (small).
    strike_freq_sigma_hz: float = 1.0
    strike_amp_sigma_db: float = 0.5
    specimens_per_class: int = 5
    counterfeit_shift_fraction: float = 0.08
    counterfeit_amp_sigma_db: float = 6.0
    mode_drop_prob: float = 0.2

    def recording_jitter(self) -> "PerturbModel":
        """Per-recording wobble expressed as a jitter model for synthesize()."""
        return replace(self, freq_jitter_sigma_hz=(self.strike_freq_sigma_hz,),
                       amp_jitter_sigma_db=(self.strike_amp_sigma_db,))


@dataclass
class GroundTruth:
    profile: str
    strike_index: int
    mode_freqs_hz: list[float]
    mode_amps_db: list[float]


@dataclass
class CorpusCounts:
    train_per_class: int = 20
    test_per_class: int = 10
    counterfeit: int = 10
    unknown: int = 10


def _tau_for(freq_hz: float) -> float:
    return 0.30 if freq_hz < 5000.0 else 0.15


def _scaled_profile(name: str, factor: float, amps_db=None) -> CoinProfile:
    base = ((3770.00, 0.00), (3505.62, -0.36), (8648.75, -6.78), (15258.12, -22.18))
    modes = []
    for i, (freq, amp) in enumerate(base):
        f = freq * factor
        a = amps_db[i] if amps_db is not None else amp
        modes.append(Mode(freq_hz=f, rel_amp_db=a, decay_tau_s=_tau_for(f)))
    return CoinProfile(name=name, modes=tuple(modes))


# Measured 1 oz Australian Kangaroo resonance table.
KANGAROO = _scaled_profile("kangaroo", 1.0)
# Second trainable class (Athenian Owl surrogate): scaled modes, distinct amplitudes.
OWL = _scaled_profile("owl", 0.8, amps_db=(0.0, -3.0, -4.0, -30.0))
# Genuine-but-untrained class (Vienna Philharmonic surrogate).
PHILHARMONIC = _scaled_profile("philharmonic", 1.25)

DEFAULT_GENUINE = (KANGAROO, OWL)


def synthesize(profile: CoinProfile, jitter: PerturbModel | None,
               rng: np.random.Generator, silence_prefix_s: float = 0.1,
               ring_seconds: float = 1.0, sample_rate: int = SAMPLE_RATE):
    """One strike recording; returns (AudioClip, GroundTruth).

    ``jitter`` perturbs mode frequencies/amplitudes per specimen; None means
    nominal modes. Ground truth records the exact modes and strike index.
    """
    for mode in profile.modes:
        if not 0.0 < mode.freq_hz < sample_rate / 2.0:
            raise ArgumentError(
                f"mode at {mode.freq_hz:.2f} Hz out of range (Nyquist {sample_rate / 2:.0f} Hz)"
            )

    freqs, amps_db = [], []
    for i, mode in enumerate(profile.modes):
        f, a = mode.freq_hz, mode.rel_amp_db
        if jitter is not None:
            f += rng.normal(0.0, jitter.freq_jitter_sigma_hz[i % len(jitter.freq_jitter_sigma_hz)])
            a += rng.normal(0.0, jitter.amp_jitter_sigma_db[i % len(jitter.amp_jitter_sigma_db)])
        freqs.append(f)
        amps_db.append(a)

    strike_index = int(round(silence_prefix_s * sample_rate))
    n_total = strike_index + int(round(ring_seconds * sample_rate))
    samples = np.zeros(n_total)
    if profile.noise_floor > 0.0:
        samples += rng.normal(0.0, profile.noise_floor, n_total)

    # Broadband strike: decaying white-noise burst.
    n_strike = max(1, int(round(profile.strike_duration_s * sample_rate)))
    t_strike = np.arange(n_strike) / sample_rate
    burst = rng.normal(0.0, 1.0, n_strike) * np.exp(-5.0 * t_strike / profile.strike_duration_s)
    samples[strike_index : strike_index + n_strike] += profile.strike_amplitude * burst

    # Damped sinusoids from the strike onward.
    t = np.arange(n_total - strike_index) / sample_rate
    ring = np.zeros_like(t)
    for mode, f, a_db in zip(profile.modes, freqs, amps_db):
        amp = profile.ring_amplitude * 10.0 ** (a_db / 20.0)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        ring += amp * np.exp(-t / mode.decay_tau_s) * np.sin(2.0 * math.pi * f * t + phase)
    samples[strike_index:] += ring

    peak = np.abs(samples).max()
    if peak > 0.999:
        samples *= 0.999 / peak

    clip = AudioClip(samples=samples, sample_rate=sample_rate)
    truth = GroundTruth(profile=profile.name, strike_index=strike_index,
                        mode_freqs_hz=freqs, mode_amps_db=amps_db)
    return clip, truth


def specimen_of(profile: CoinProfile, perturb: PerturbModel,
                rng: np.random.Generator) -> CoinProfile:
    """One physical coin of a class: modes jittered by the specimen spread."""
    modes = tuple(
        replace(
            mode,
            freq_hz=mode.freq_hz
            + rng.normal(0.0, perturb.freq_jitter_sigma_hz[i % len(perturb.freq_jitter_sigma_hz)]),
            rel_amp_db=mode.rel_amp_db
            + rng.normal(0.0, perturb.amp_jitter_sigma_db[i % len(perturb.amp_jitter_sigma_db)]),
        )
        for i, mode in enumerate(profile.modes)
    )
    return replace(profile, modes=modes)


def counterfeit_of(profile: CoinProfile, perturb: PerturbModel,
                   rng: np.random.Generator) -> CoinProfile:
    """Counterfeit analog: shifted frequencies, altered amplitudes, dropped modes.

    Each frequency moves by a uniform fraction in
    [shift/2, shift] with random sign; amplitudes get N(0, 6 dB) offsets;
    non-dominant modes are dropped with ``mode_drop_prob``. The dominant
    mode always survives.
    """
    dominant = max(range(len(profile.modes)), key=lambda i: profile.modes[i].rel_amp_db)
    modes = []
    for i, mode in enumerate(profile.modes):
        shift = rng.uniform(0.5, 1.0) * perturb.counterfeit_shift_fraction
        sign = 1.0 if rng.random() < 0.5 else -1.0
        amp_db = mode.rel_amp_db + rng.normal(0.0, perturb.counterfeit_amp_sigma_db)
        if i != dominant and rng.random() < perturb.mode_drop_prob:
            continue
        modes.append(replace(mode, freq_hz=mode.freq_hz * (1.0 + sign * shift),
                             rel_amp_db=amp_db))
    return replace(profile, name=f"{profile.name}_counterfeit", modes=tuple(modes))


def build_corpus(out_dir, genuine_profiles=DEFAULT_GENUINE, unknown_profile=PHILHARMONIC,
                 perturb: PerturbModel | None = None, counts: CorpusCounts | None = None,
                 seed: int = 7, silence_prefix_s: float = 0.1) -> Path:
    """Write a labeled WAV corpus + manifest + ground-truth sidecar.

    Returns the manifest path. File generation is deterministic for a seed.
    """
    if len(genuine_profiles) < 2:
        raise ArgumentError("need at least 2 genuine profiles for the classifier")
    perturb = perturb or PerturbModel()
    counts = counts or CorpusCounts()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(seed))

    entries: list[ManifestEntry] = []
    truths: dict[str, dict] = {}

    def emit(name, profile, jitter, label, genuine, role):
        clip, truth = synthesize(profile, jitter, spawn_rng(rng),
                                 silence_prefix_s=silence_prefix_s)
        save_wav(clip, out_dir / name)
        entries.append(ManifestEntry(path=name, label=label, genuine=genuine, role=role))
        truths[name] = {
            "profile": truth.profile,
            "strike_index": truth.strike_index,
            "mode_freqs_hz": truth.mode_freqs_hz,
            "mode_amps_db": truth.mode_amps_db,
        }

    # Each genuine class is a fixed pool of physical coins; train and test
    # recordings are repeated strikes of those coins with small wobble.
    recording = perturb.recording_jitter()
    pools = {
        profile.name: [specimen_of(profile, perturb, spawn_rng(rng))
                       for _ in range(perturb.specimens_per_class)]
        for profile in genuine_profiles
    }
    for profile in genuine_profiles:
        pool = pools[profile.name]
        for i in range(counts.train_per_class):
            emit(f"train_{profile.name}_{i:03d}.wav", pool[i % len(pool)], recording,
                 profile.name, True, "train")
    for profile in genuine_profiles:
        pool = pools[profile.name]
        for i in range(counts.test_per_class):
            emit(f"test_{profile.name}_{i:03d}.wav", pool[i % len(pool)], recording,
                 profile.name, True, "test")
    for i in range(counts.counterfeit):
        source = genuine_profiles[i % len(genuine_profiles)]
        fake = counterfeit_of(source, perturb, spawn_rng(rng))
        emit(f"counterfeit_{source.name}_{i:03d}.wav", fake, recording, source.name,
             False, "counterfeit")
    for i in range(counts.unknown):
        stranger = specimen_of(unknown_profile, perturb, spawn_rng(rng))
        emit(f"unknown_{unknown_profile.name}_{i:03d}.wav", stranger, recording,
             unknown_profile.name, True, "unknown")

    labels = sorted({e.label for e in entries})
    manifest = DatasetManifest(entries=entries, labels=labels, seed=seed, root=out_dir)
    manifest_path = out_dir / "manifest.json"
    save_manifest(manifest, manifest_path)
    (out_dir / "ground_truth.json").write_text(json.dumps(truths, indent=2))
    return manifest_path
