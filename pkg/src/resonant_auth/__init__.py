"""Acoustic bullion-coin authentication.

Reconstructs a coin's strike spectrum with an autoencoder trained on genuine
specimens, measures a weighted peak-matching distance between input and
reconstruction, rejects anomalies against a calibrated threshold, and
classifies accepted coins by type from the latent space.
"""

from .audio_io import AudioClip, DatasetManifest, load_manifest, load_wav, save_wav
from .dsp import PreprocessConfig, Segment, Spectrum
from .models import (
    ModelBundle,
    PipelineConfig,
    ThresholdModel,
    VerificationReport,
    load_bundle,
    save_bundle,
    verify,
)
from .peaks import MatchConfig, Peak, PeakSet

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "DatasetManifest",
    "MatchConfig",
    "ModelBundle",
    "Peak",
    "PeakSet",
    "PipelineConfig",
    "PreprocessConfig",
    "Segment",
    "Spectrum",
    "ThresholdModel",
    "VerificationReport",
    "load_bundle",
    "load_manifest",
    "load_wav",
    "save_bundle",
    "save_wav",
    "verify",
]
