"""End-to-end orchestration: corpus on disk -> trained bundle -> metrics."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import dsp, models
from .audio_io import DatasetManifest, load_wav
from .augment import augment_segment, make_rng, spawn_rng
from .errors import ArgumentError, ManifestError
from .models import ModelBundle, PipelineConfig, VerificationReport
from .nn import TrainResult


@dataclass
class TrainingArtifacts:
    bundle: ModelBundle
    ae_losses: list[float]
    classifier: TrainResult


@dataclass
class RoleMetrics:
    role: str
    count: int
    accepted: int
    distances: list[float]
    correct_labels: int


@dataclass
class EvalResult:
    roles: dict[str, RoleMetrics]
    false_accept_rate: float
    false_reject_rate: float
    classifier_accuracy: float | None


def _augmented_spectra(manifest: DatasetManifest, cfg: PipelineConfig, rng):
    """Per training recording: segment, augment, FFT. Returns (spectra, label indices)."""
    labels = tuple(manifest.labels)
    spectra, label_idx = [], []
    for entry in manifest.entries:
        if entry.role != "train" or not entry.genuine:
            continue
        clip = load_wav(manifest.resolve(entry))
        seg = dsp.prepare_segment(clip, cfg.preprocess)
        for variant in augment_segment(seg, cfg.augment, spawn_rng(rng)):
            sp = dsp.segment_to_spectrum(variant)
            if cfg.spectrum_width != sp.bins.size:
                sp = dsp.condense_spectrum(sp, cfg.spectrum_width)
            spectra.append(sp)
            label_idx.append(labels.index(entry.label))
    return spectra, label_idx, labels


def train_from_manifest(manifest: DatasetManifest, cfg: PipelineConfig,
                        seed: int) -> TrainingArtifacts:
    """Augmentation -> autoencoder -> threshold calibration -> classifier."""
    rng = make_rng(seed)
    spectra, label_idx, labels = _augmented_spectra(manifest, cfg, rng)
    if not spectra:
        raise ArgumentError("manifest contains no genuine training entries")

    ae, ae_losses = models.train_autoencoder(spectra, cfg.train, spawn_rng(rng),
                                             width=cfg.spectrum_width)
    threshold = models.calibrate_threshold(ae, spectra, cfg.effective_match())
    clf, clf_result = models.train_classifier(
        ae, list(zip(spectra, label_idx)), labels, cfg.train, spawn_rng(rng)
    )
    bundle = ModelBundle(autoencoder=ae, classifier=clf, threshold=threshold,
                         labels=labels, config=cfg)
    return TrainingArtifacts(bundle=bundle, ae_losses=ae_losses, classifier=clf_result)


def verify_file(path, bundle: ModelBundle) -> VerificationReport:
    return models.verify(load_wav(path), bundle)


def evaluate(manifest: DatasetManifest, bundle: ModelBundle) -> EvalResult:
    """FAR/FRR, classifier accuracy, and distance distributions per role."""
    roles_present = {e.role for e in manifest.entries}
    if None in roles_present:
        raise ManifestError("evaluation requires role annotations on every entry")
    if "test" not in roles_present:
        raise ManifestError("manifest has no test entries")

    roles: dict[str, RoleMetrics] = {}
    for entry in manifest.entries:
        report = verify_file(manifest.resolve(entry), bundle)
        m = roles.setdefault(entry.role, RoleMetrics(entry.role, 0, 0, [], 0))
        m.count += 1
        m.distances.append(report.distance)
        if report.authentic:
            m.accepted += 1
            if report.label == entry.label:
                m.correct_labels += 1

    # Genuine held-out coins should be accepted; counterfeit and unknown rejected.
    genuine = roles.get("test", RoleMetrics("test", 0, 0, [], 0))
    impostor_count = sum(roles[r].count for r in ("counterfeit", "unknown") if r in roles)
    impostor_accepted = sum(roles[r].accepted for r in ("counterfeit", "unknown") if r in roles)
    far = impostor_accepted / impostor_count if impostor_count else 0.0
    frr = (genuine.count - genuine.accepted) / genuine.count if genuine.count else 0.0
    accuracy = genuine.correct_labels / genuine.accepted if genuine.accepted else None
    return EvalResult(roles=roles, false_accept_rate=far, false_reject_rate=frr,
                      classifier_accuracy=accuracy)


def config_for_width(width: int, base: PipelineConfig | None = None) -> PipelineConfig:
    """Pipeline config for a reduced spectrum width (CI-scale runs)."""
    base = base or PipelineConfig()
    return dataclasses.replace(base, spectrum_width=width)
