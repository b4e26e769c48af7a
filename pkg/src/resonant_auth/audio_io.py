"""WAV file reading/writing and dataset manifests.

Only RIFF/WAVE with PCM 16-bit integer or IEEE float32 data, mono or
stereo, is supported. Stereo is downmixed by channel averaging.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyError, FormatError, ManifestError, UnsupportedError

INT16_SCALE = 32768.0

VALID_ROLES = ("train", "test", "counterfeit", "unknown")


@dataclass
class AudioClip:
    """Mono audio samples in [-1, 1] with their sample rate."""

    samples: np.ndarray
    sample_rate: int


@dataclass
class ManifestEntry:
    path: str
    label: str
    genuine: bool
    role: str | None = None


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    labels: list[str]
    seed: int
    root: Path = field(default_factory=Path)

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path


def load_wav(path) -> AudioClip:
    """Read a PCM16/float32 WAV file as a mono clip scaled to [-1, 1]."""
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8 : pos + 8 + chunk_size]
        if chunk_id in (b"fmt ", b"data") and len(body) < chunk_size:
            raise FormatError(f"{path}: truncated {chunk_id.decode().strip()} chunk")
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            data = body
        pos += 8 + chunk_size + (chunk_size & 1)

    if fmt is None or len(fmt) < 16:
        raise FormatError(f"{path}: missing fmt chunk")
    if data is None:
        raise FormatError(f"{path}: missing data chunk")

    audio_format, channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if audio_format == 0xFFFE and len(fmt) >= 26:
        # WAVE_FORMAT_EXTENSIBLE: first two bytes of the sub-format GUID
        (audio_format,) = struct.unpack_from("<H", fmt, 24)

    if channels not in (1, 2):
        raise UnsupportedError(f"{path}: {channels} channels not supported")
    if audio_format == 1 and bits == 16:
        values = np.frombuffer(data[: len(data) - len(data) % 2], dtype="<i2")
        samples = values.astype(np.float64) / INT16_SCALE
    elif audio_format == 3 and bits == 32:
        values = np.frombuffer(data[: len(data) - len(data) % 4], dtype="<f4")
        samples = values.astype(np.float64)
    else:
        raise UnsupportedError(f"{path}: format {audio_format}/{bits}-bit not supported")

    if samples.size == 0:
        raise EmptyError(f"{path}: empty data chunk")
    if channels == 2:
        if samples.size % 2:
            raise FormatError(f"{path}: odd sample count for stereo data")
        samples = samples.reshape(-1, 2).mean(axis=1)
    if not np.all(np.isfinite(samples)):
        raise FormatError(f"{path}: non-finite sample values")
    return AudioClip(samples=samples, sample_rate=int(sample_rate))


def save_wav(clip: AudioClip, path) -> None:
    """Write a clip as mono PCM16 WAV."""
    samples = np.asarray(clip.samples, dtype=np.float64)
    if samples.size == 0:
        raise EmptyError("cannot save an empty clip")
    ints = np.clip(np.round(samples * INT16_SCALE), -32768, 32767).astype("<i2")
    data = ints.tobytes()
    hdr = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(data)),
            b"WAVE",
            b"fmt ",
            struct.pack("<IHHIIHH", 16, 1, 1, clip.sample_rate, clip.sample_rate * 2, 2, 16),
            b"data",
            struct.pack("<I", len(data)),
        ]
    )
    Path(path).write_bytes(hdr + data)


def load_manifest(path) -> DatasetManifest:
    """Read and validate a JSON dataset manifest.

    Schema::

        {"seed": <uint>, "labels": [<str>, ...],
         "files": [{"path": <str>, "label": <str>, "genuine": <bool>,
                    "role": "train"|"test"|"counterfeit"|"unknown"}, ...]}

    ``role`` is optional; paths are relative to the manifest location.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ManifestError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: top-level value must be an object")

    problems = []
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        problems.append("seed must be a non-negative integer")
    labels = doc.get("labels")
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        problems.append("labels must be a list of strings")
        labels = []
    files = doc.get("files")
    if not isinstance(files, list):
        raise ManifestError(f"{path}: files must be a list")

    entries = []
    seen = set()
    for i, item in enumerate(files):
        if not isinstance(item, dict):
            problems.append(f"files[{i}] is not an object")
            continue
        p = item.get("path")
        label = item.get("label")
        genuine = item.get("genuine")
        role = item.get("role")
        if not isinstance(p, str) or not p:
            problems.append(f"files[{i}].path missing")
            continue
        if p in seen:
            problems.append(f"duplicate path {p!r}")
        seen.add(p)
        if label not in labels:
            problems.append(f"files[{i}].label {label!r} not in declared labels")
        if not isinstance(genuine, bool):
            problems.append(f"files[{i}].genuine must be a boolean")
        if role is not None and role not in VALID_ROLES:
            problems.append(f"files[{i}].role {role!r} invalid")
        entries.append(ManifestEntry(path=p, label=str(label), genuine=bool(genuine), role=role))

    root = path.parent
    missing = [e.path for e in entries if not (root / e.path).exists()]
    if missing:
        problems.append("missing files: " + ", ".join(missing))
    if problems:
        raise ManifestError(f"{path}: " + "; ".join(problems))
    return DatasetManifest(entries=entries, labels=list(labels), seed=seed, root=root)


def save_manifest(manifest: DatasetManifest, path) -> None:
    doc = {
        "seed": manifest.seed,
        "labels": manifest.labels,
        "files": [
            {"path": e.path, "label": e.label, "genuine": e.genuine, "role": e.role}
            for e in manifest.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2))
