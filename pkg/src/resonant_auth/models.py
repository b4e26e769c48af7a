"""Spectrum autoencoder, anomaly threshold, coin-type classifier, and the
end-to-end verification decision, plus binary model-bundle persistence."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dsp
from .audio_io import AudioClip
from .augment import AugmentConfig
from .dsp import PreprocessConfig, Spectrum
from .errors import ArgumentError, CompatibilityError, FormatError
from .nn import DenseLayer, Network, TrainConfig, forward, init_layer, train
from .peaks import MatchConfig, PeakSet, find_peaks, set_distance

BUNDLE_MAGIC = b"CRNG"
BUNDLE_VERSION = 1

# Paper-width layer plan: 8820 -> 1024 -> 512 -> 128 -> 512 -> 1024 -> 8820.
FULL_WIDTH = dsp.SEGMENT_LEN
HIDDEN_WIDTHS = (1024, 512, 128)


@dataclass
class PipelineConfig:
    """Everything the trained models depend on; snapshotted into the bundle."""

    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    match: MatchConfig = field(default_factory=MatchConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    spectrum_width: int = FULL_WIDTH

    def effective_match(self) -> MatchConfig:
        """Match config with bin-denominated settings rescaled to the width."""
        if self.spectrum_width == FULL_WIDTH:
            return self.match
        sep = max(1, round(self.match.min_separation_bins * self.spectrum_width / FULL_WIDTH))
        return dataclasses.replace(self.match, min_separation_bins=sep)

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["augment"]["coeffs"] = list(doc["augment"]["coeffs"])
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        aug = dict(doc["augment"])
        aug["coeffs"] = tuple(aug["coeffs"])
        return cls(
            preprocess=PreprocessConfig(**doc["preprocess"]),
            match=MatchConfig(**doc["match"]),
            augment=AugmentConfig(**aug),
            train=TrainConfig(**doc["train"]),
            spectrum_width=int(doc["spectrum_width"]),
        )


def config_digest(cfg: PipelineConfig) -> bytes:
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).digest()


@dataclass
class Autoencoder:
    net: Network
    n_encoder_layers: int

    @property
    def latent_dim(self) -> int:
        return self.net.layers[self.n_encoder_layers - 1].weights.shape[0]


@dataclass
class ThresholdModel:
    mu_d: float
    sigma_d: float
    threshold: float


@dataclass
class ModelBundle:
    autoencoder: Autoencoder
    classifier: Network
    threshold: ThresholdModel
    labels: tuple[str, ...]
    config: PipelineConfig
    version: int = BUNDLE_VERSION


@dataclass
class VerificationReport:
    distance: float
    threshold: float
    authentic: bool
    label: str | None
    confidence: float | None
    original_peaks: PeakSet
    reconstructed_peaks: PeakSet

    def to_json(self) -> str:
        return json.dumps(
            {
                "distance": self.distance,
                "threshold": self.threshold,
                "authentic": self.authentic,
                "label": self.label,
                "confidence": self.confidence,
            }
        )

    def format_text(self) -> str:
        if self.authentic:
            verdict = f"authentic: {self.label} (confidence {self.confidence:.3f})"
        else:
            verdict = "counterfeit (unrecognized)"
        return f"distance {self.distance:.4f} / threshold {self.threshold:.4f} -> {verdict}"


def scaled_widths(width: int) -> tuple[int, int, int]:
    """Hidden layer widths, proportional when running below full spectrum width."""
    if width == FULL_WIDTH:
        return HIDDEN_WIDTHS
    return tuple(max(2, round(w * width / FULL_WIDTH)) for w in HIDDEN_WIDTHS)


def build_autoencoder(width: int, rng: np.random.Generator) -> Autoencoder:
    h1, h2, latent = scaled_widths(width)
    layers = [
        init_layer(width, h1, "relu", 0.1, rng),
        init_layer(h1, h2, "relu", 0.0, rng),
        init_layer(h2, latent, "relu", 0.0, rng),
        init_layer(latent, h2, "relu", 0.0, rng),
        init_layer(h2, h1, "relu", 0.1, rng),
        init_layer(h1, width, "linear", 0.0, rng),
    ]
    return Autoencoder(net=Network(layers=layers), n_encoder_layers=3)


def build_classifier(latent_dim: int, n_classes: int, rng: np.random.Generator) -> Network:
    return Network(
        layers=[
            init_layer(latent_dim, 64, "relu", 0.0, rng),
            init_layer(64, n_classes, "linear", 0.0, rng),
        ]
    )


def train_autoencoder(spectra, cfg: TrainConfig, rng: np.random.Generator,
                      width: int = FULL_WIDTH):
    """Train the reconstruction autoencoder on genuine spectra only."""
    if not spectra:
        raise ArgumentError("no spectra to train on")
    for sp in spectra:
        if sp.bins.size != width:
            raise ArgumentError(f"spectrum length {sp.bins.size} != width {width}")
    ae = build_autoencoder(width, rng)
    result = train(ae.net, [(sp.bins, sp.bins) for sp in spectra], "mse", cfg, rng)
    return ae, result.losses


def reconstruct(ae: Autoencoder, sp: Spectrum) -> Spectrum:
    """Eval-mode reconstruction, clamped at zero for peak analysis."""
    out, _ = forward(ae.net, sp.bins, mode="eval")
    return Spectrum(bins=np.maximum(out, 0.0), bin_hz=sp.bin_hz)


def encode(ae: Autoencoder, sp: Spectrum) -> np.ndarray:
    """Latent vector from the encoder half."""
    a = sp.bins
    for layer in ae.net.layers[: ae.n_encoder_layers]:
        z = a @ layer.weights.T + layer.biases
        a = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return a


def reconstruction_distance(ae: Autoencoder, sp: Spectrum, match: MatchConfig) -> tuple:
    """Peak distance between a spectrum and its (re-normalized) reconstruction."""
    original = find_peaks(sp, match)
    restored = find_peaks(dsp.normalize_spectrum(reconstruct(ae, sp)), match)
    return set_distance(original, restored, match), original, restored


def calibrate_threshold(ae: Autoencoder, spectra, match: MatchConfig) -> ThresholdModel:
    """mu + 3*sigma (population) over per-sample reconstruction distances."""
    if len(spectra) < 2:
        raise ArgumentError("need at least 2 spectra to calibrate a threshold")
    distances = np.array([reconstruction_distance(ae, sp, match)[0] for sp in spectra])
    mu = float(distances.mean())
    sigma = float(distances.std())  # population standard deviation
    return ThresholdModel(mu_d=mu, sigma_d=sigma, threshold=mu + 3.0 * sigma)


def train_classifier(ae: Autoencoder, labeled_spectra, labels: tuple[str, ...],
                     cfg: TrainConfig, rng: np.random.Generator):
    """Train the coin-type classifier on frozen-encoder latents.

    ``labeled_spectra`` is a list of (Spectrum, label index) pairs.
    Returns (classifier, TrainResult with loss and accuracy curves).
    """
    present = {idx for _, idx in labeled_spectra}
    if len(present) < 2:
        raise ArgumentError("classifier training needs at least 2 classes")
    clf = build_classifier(ae.latent_dim, len(labels), rng)
    data = [(encode(ae, sp), idx) for sp, idx in labeled_spectra]
    result = train(clf, data, "ce", cfg, rng)
    return clf, result


def classify(bundle: ModelBundle, sp: Spectrum) -> tuple[str, float]:
    logits, _ = forward(bundle.classifier, encode(bundle.autoencoder, sp))
    shifted = logits - logits.max()
    probs = np.exp(shifted) / np.exp(shifted).sum()
    idx = int(np.argmax(probs))
    return bundle.labels[idx], float(probs[idx])


def spectrum_from_clip(clip: AudioClip, cfg: PipelineConfig) -> Spectrum:
    sp = dsp.preprocess(clip, cfg.preprocess)
    if cfg.spectrum_width != sp.bins.size:
        sp = dsp.condense_spectrum(sp, cfg.spectrum_width)
    return sp


def verify(clip: AudioClip, bundle: ModelBundle,
           expect_config: PipelineConfig | None = None) -> VerificationReport:
    """Full decision chain: authentic iff peak distance <= threshold."""
    if expect_config is not None and config_digest(expect_config) != config_digest(bundle.config):
        raise CompatibilityError("bundle was trained with a different pipeline configuration")
    sp = spectrum_from_clip(clip, bundle.config)
    distance, original, restored = reconstruction_distance(
        bundle.autoencoder, sp, bundle.config.effective_match()
    )
    authentic = distance <= bundle.threshold.threshold
    label = confidence = None
    if authentic:
        label, confidence = classify(bundle, sp)
    return VerificationReport(
        distance=distance,
        threshold=bundle.threshold.threshold,
        authentic=authentic,
        label=label,
        confidence=confidence,
        original_peaks=original,
        reconstructed_peaks=restored,
    )


# --- bundle persistence -----------------------------------------------------
#
# Little-endian layout:
#   magic "CRNG" | u16 version
#   u32 config_len | config JSON | 32-byte sha256(config JSON)
#   f64 mu_d | f64 sigma_d | f64 threshold
#   u16 n_labels | per label: u16 len + utf-8 bytes
#   u16 ae_layers | u16 ae_encoder_layers | layers
#   u16 clf_layers | layers
# Each layer: u32 out | u32 in | u8 activation (0 linear, 1 relu)
#   | f64 dropout_p | out*in f64 weights (row-major) | out f64 biases.

_ACT_CODE = {"linear": 0, "relu": 1}
_ACT_NAME = {v: k for k, v in _ACT_CODE.items()}


def _pack_network(net: Network) -> bytes:
    parts = [struct.pack("<H", len(net.layers))]
    for layer in net.layers:
        out_dim, in_dim = layer.weights.shape
        parts.append(struct.pack("<IIBd", out_dim, in_dim, _ACT_CODE[layer.activation],
                                 layer.dropout_p))
        parts.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(layer.biases, dtype="<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated bundle file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _unpack_network(r: _Reader) -> Network:
    (n_layers,) = r.unpack("<H")
    layers = []
    for _ in range(n_layers):
        out_dim, in_dim, act, dropout_p = r.unpack("<IIBd")
        if act not in _ACT_NAME:
            raise FormatError(f"unknown activation code {act}")
        weights = np.frombuffer(r.take(out_dim * in_dim * 8), dtype="<f8").reshape(
            out_dim, in_dim
        ).copy()
        biases = np.frombuffer(r.take(out_dim * 8), dtype="<f8").copy()
        layers.append(DenseLayer(weights=weights, biases=biases,
                                 activation=_ACT_NAME[act], dropout_p=dropout_p))
    return Network(layers=layers)


def save_bundle(bundle: ModelBundle, path) -> None:
    config_blob = json.dumps(bundle.config.to_dict(), sort_keys=True,
                             separators=(",", ":")).encode()
    parts = [
        BUNDLE_MAGIC,
        struct.pack("<H", bundle.version),
        struct.pack("<I", len(config_blob)),
        config_blob,
        hashlib.sha256(config_blob).digest(),
        struct.pack("<ddd", bundle.threshold.mu_d, bundle.threshold.sigma_d,
                    bundle.threshold.threshold),
        struct.pack("<H", len(bundle.labels)),
    ]
    for label in bundle.labels:
        raw = label.encode()
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
    parts.append(struct.pack("<H", bundle.autoencoder.n_encoder_layers))
    parts.append(_pack_network(bundle.autoencoder.net))
    parts.append(_pack_network(bundle.classifier))
    Path(path).write_bytes(b"".join(parts))


def load_bundle(path) -> ModelBundle:
    r = _Reader(Path(path).read_bytes())
    if r.take(4) != BUNDLE_MAGIC:
        raise FormatError(f"{path}: not a model bundle")
    (version,) = r.unpack("<H")
    if version != BUNDLE_VERSION:
        raise FormatError(f"{path}: unsupported bundle version {version}")
    (config_len,) = r.unpack("<I")
    config_blob = r.take(config_len)
    stored_hash = r.take(32)
    if hashlib.sha256(config_blob).digest() != stored_hash:
        raise CompatibilityError(f"{path}: configuration hash mismatch")
    config = PipelineConfig.from_dict(json.loads(config_blob.decode()))
    mu, sigma, threshold = r.unpack("<ddd")
    (n_labels,) = r.unpack("<H")
    labels = []
    for _ in range(n_labels):
        (ln,) = r.unpack("<H")
        labels.append(r.take(ln).decode())
    (n_enc,) = r.unpack("<H")
    ae_net = _unpack_network(r)
    clf = _unpack_network(r)
    if r.pos != len(r.data):
        raise FormatError(f"{path}: trailing bytes in bundle")
    return ModelBundle(
        autoencoder=Autoencoder(net=ae_net, n_encoder_layers=n_enc),
        classifier=clf,
        threshold=ThresholdModel(mu_d=mu, sigma_d=sigma, threshold=threshold),
        labels=tuple(labels),
        config=config,
        version=version,
    )
