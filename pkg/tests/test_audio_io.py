import struct

import numpy as np
import pytest

from resonant_auth import dsp, peaks, synth
from resonant_auth.audio_io import (
    AudioClip,
    load_manifest,
    load_wav,
    save_manifest,
    save_wav,
    DatasetManifest,
    ManifestEntry,
)
from resonant_auth.augment import make_rng
from resonant_auth.errors import EmptyError, FormatError, ManifestError, UnsupportedError


def write_wav_raw(path, audio_format, channels, rate, bits, payload, fmt_extra=b""):
    fmt = struct.pack("<HHIIHH", audio_format, channels, rate,
                      rate * channels * bits // 8, channels * bits // 8, bits) + fmt_extra
    blob = b"".join([
        b"RIFF", struct.pack("<I", 20 + len(fmt) + len(payload)), b"WAVE",
        b"fmt ", struct.pack("<I", len(fmt)), fmt,
        b"data", struct.pack("<I", len(payload)), payload,
    ])
    path.write_bytes(blob)


def test_pcm16_scaling(tmp_path):
    p = tmp_path / "a.wav"
    write_wav_raw(p, 1, 1, 44100, 16, struct.pack("<3h", 0, 16384, -32768))
    clip = load_wav(p)
    assert clip.sample_rate == 44100
    np.testing.assert_array_equal(clip.samples, [0.0, 0.5, -1.0])


def test_stereo_downmix_average(tmp_path):
    p = tmp_path / "s.wav"
    write_wav_raw(p, 3, 2, 44100, 32, struct.pack("<2f", 1.0, 0.0))
    clip = load_wav(p)
    np.testing.assert_allclose(clip.samples, [0.5])


def test_downmix_is_linear(tmp_path):
    rng = make_rng(3)
    left = rng.uniform(-1, 1, 64).astype(np.float32)
    right = rng.uniform(-1, 1, 64).astype(np.float32)
    interleaved = np.empty(128, dtype=np.float32)
    interleaved[0::2] = left
    interleaved[1::2] = right
    p = tmp_path / "st.wav"
    write_wav_raw(p, 3, 2, 44100, 32, interleaved.tobytes())
    clip = load_wav(p)
    np.testing.assert_allclose(clip.samples, (left.astype(np.float64) + right) / 2, atol=1e-9)


def test_truncated_data_chunk(tmp_path):
    p = tmp_path / "t.wav"
    write_wav_raw(p, 1, 1, 44100, 16, struct.pack("<4h", 1, 2, 3, 4))
    raw = p.read_bytes()
    p.write_bytes(raw[:-3])  # cut into the declared data chunk
    with pytest.raises(FormatError):
        load_wav(p)


def test_not_riff(tmp_path):
    p = tmp_path / "x.wav"
    p.write_bytes(b"OggS" + b"\x00" * 40)
    with pytest.raises(FormatError):
        load_wav(p)


def test_unsupported_encoding(tmp_path):
    p = tmp_path / "u.wav"
    write_wav_raw(p, 1, 1, 44100, 8, b"\x00\x01\x02")
    with pytest.raises(UnsupportedError):
        load_wav(p)


def test_empty_data(tmp_path):
    p = tmp_path / "e.wav"
    write_wav_raw(p, 1, 1, 44100, 16, b"")
    with pytest.raises(EmptyError):
        load_wav(p)


def test_roundtrip_sine_quantization_bound(tmp_path):
    t = np.arange(4410) / 44100.0
    clip = AudioClip(samples=np.sin(2 * np.pi * 1000.0 * t), sample_rate=44100)
    p = tmp_path / "r.wav"
    save_wav(clip, p)
    back = load_wav(p)
    assert back.sample_rate == 44100
    assert np.max(np.abs(back.samples - clip.samples)) <= 1.0 / 32768


def test_roundtrip_random_clip(tmp_path):
    rng = make_rng(11)
    clip = AudioClip(samples=rng.uniform(-1, 1, 2000), sample_rate=44100)
    p = tmp_path / "rr.wav"
    save_wav(clip, p)
    assert np.max(np.abs(load_wav(p).samples - clip.samples)) <= 1.0 / 32768


def test_save_empty_clip(tmp_path):
    with pytest.raises(EmptyError):
        save_wav(AudioClip(samples=np.array([]), sample_rate=44100), tmp_path / "e.wav")


def test_roundtrip_preserves_synthetic_peaks(tmp_path):
    clip, _ = synth.synthesize(synth.KANGAROO, None, make_rng(5))
    cfg = dsp.PreprocessConfig()
    mc = peaks.MatchConfig()
    before = peaks.find_peaks(dsp.preprocess(clip, cfg), mc)
    p = tmp_path / "k.wav"
    save_wav(clip, p)
    after = peaks.find_peaks(dsp.preprocess(load_wav(p), cfg), mc)
    assert [q.bin for q in after.peaks] == [q.bin for q in before.peaks]


def _write_manifest(tmp_path, doc_files, labels=("a", "b"), seed=1):
    import json

    for item in doc_files:
        (tmp_path / item["path"]).write_bytes(b"")
    (tmp_path / "manifest.json").write_text(
        json.dumps({"seed": seed, "labels": list(labels), "files": doc_files})
    )
    return tmp_path / "manifest.json"


def test_manifest_ok(tmp_path):
    files = [
        {"path": f"{label}_{i}.wav", "label": label, "genuine": True}
        for label in ("a", "b")
        for i in range(3)
    ]
    manifest = load_manifest(_write_manifest(tmp_path, files))
    assert len(manifest.entries) == 6
    assert manifest.labels == ["a", "b"]


def test_manifest_duplicate_path(tmp_path):
    files = [
        {"path": "x.wav", "label": "a", "genuine": True},
        {"path": "x.wav", "label": "b", "genuine": True},
    ]
    with pytest.raises(ManifestError, match="duplicate"):
        load_manifest(_write_manifest(tmp_path, files))


def test_manifest_undeclared_label(tmp_path):
    files = [{"path": "x.wav", "label": "zz", "genuine": True}]
    with pytest.raises(ManifestError, match="label"):
        load_manifest(_write_manifest(tmp_path, files))


def test_manifest_missing_file(tmp_path):
    import json

    (tmp_path / "manifest.json").write_text(
        json.dumps({"seed": 1, "labels": ["a"],
                    "files": [{"path": "gone.wav", "label": "a", "genuine": True}]})
    )
    with pytest.raises(ManifestError, match="gone.wav"):
        load_manifest(tmp_path / "manifest.json")


def test_manifest_roundtrip(tmp_path):
    entries = [ManifestEntry(path="x.wav", label="a", genuine=True, role="train")]
    (tmp_path / "x.wav").write_bytes(b"")
    save_manifest(DatasetManifest(entries=entries, labels=["a"], seed=9, root=tmp_path),
                  tmp_path / "m.json")
    back = load_manifest(tmp_path / "m.json")
    assert back.seed == 9
    assert back.entries[0].role == "train"
