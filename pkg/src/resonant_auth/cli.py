"""Command-line interface: synth / train / verify / eval / export-plot.

Exit codes: 0 success (all coins authentic), 2 usage or I/O error,
3 at least one coin judged counterfeit.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import os
import sys
from pathlib import Path

from . import analysis, dsp, models, pipeline, synth
from .audio_io import load_manifest, load_wav
from .augment import AugmentConfig
from .dsp import PreprocessConfig
from .errors import ResonantAuthError
from .models import PipelineConfig, load_bundle, save_bundle
from .nn import TrainConfig
from .peaks import MatchConfig

SEED_ENV = "RESONANT_AUTH_SEED"

_SECTIONS = {
    "preprocess": PreprocessConfig,
    "match": MatchConfig,
    "augment": AugmentConfig,
    "train": TrainConfig,
}
_SYNTH_KEYS = {
    "train_per_class": int,
    "test_per_class": int,
    "counterfeit": int,
    "unknown": int,
    "counterfeit_shift_fraction": float,
    "mode_drop_prob": float,
    "silence_prefix_s": float,
}


def _coerce(value: str, target_type):
    if target_type is bool:
        return value.strip().lower() in ("1", "true", "yes", "on")
    if target_type is tuple:
        return tuple(float(v) for v in value.split(","))
    return target_type(value)


def load_config(path: str | None, spectrum_width: int | None = None):
    """INI config -> (PipelineConfig, synth option dict). Unknown keys rejected."""
    sections = {name: {} for name in _SECTIONS}
    synth_opts = {}
    if path:
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_file(fh)
        for section in parser.sections():
            if section == "synth":
                for key, raw in parser.items(section):
                    if key not in _SYNTH_KEYS:
                        raise ResonantAuthError(f"unknown config key synth.{key}")
                    synth_opts[key] = _coerce(raw, _SYNTH_KEYS[key])
                continue
            if section not in _SECTIONS:
                raise ResonantAuthError(f"unknown config section [{section}]")
            fields = {f.name: f.type for f in dataclasses.fields(_SECTIONS[section])}
            types = {f.name: type(getattr(_SECTIONS[section](), f.name))
                     for f in dataclasses.fields(_SECTIONS[section])}
            for key, raw in parser.items(section):
                if key not in fields:
                    raise ResonantAuthError(f"unknown config key {section}.{key}")
                sections[section][key] = _coerce(raw, types[key])
    cfg = PipelineConfig(
        preprocess=PreprocessConfig(**sections["preprocess"]),
        match=MatchConfig(**sections["match"]),
        augment=AugmentConfig(**sections["augment"]),
        train=TrainConfig(**sections["train"]),
    )
    if spectrum_width:
        cfg = dataclasses.replace(cfg, spectrum_width=spectrum_width)
    return cfg, synth_opts


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get(SEED_ENV, "7"))


def cmd_synth(args) -> int:
    _, synth_opts = load_config(args.config)
    counts = synth.CorpusCounts(
        train_per_class=synth_opts.get("train_per_class", 20),
        test_per_class=synth_opts.get("test_per_class", 10),
        counterfeit=synth_opts.get("counterfeit", 10),
        unknown=synth_opts.get("unknown", 10),
    )
    perturb = synth.PerturbModel(
        counterfeit_shift_fraction=synth_opts.get("counterfeit_shift_fraction", 0.08),
        mode_drop_prob=synth_opts.get("mode_drop_prob", 0.2),
    )
    manifest_path = synth.build_corpus(
        args.out, perturb=perturb, counts=counts, seed=_seed(args),
        silence_prefix_s=synth_opts.get("silence_prefix_s", 0.1),
    )
    manifest = load_manifest(manifest_path)
    by_role = {}
    for entry in manifest.entries:
        by_role[entry.role] = by_role.get(entry.role, 0) + 1
    print(f"wrote {len(manifest.entries)} files to {args.out}")
    for role in sorted(by_role):
        print(f"  {role}: {by_role[role]}")
    return 0


def cmd_train(args) -> int:
    cfg, _ = load_config(args.config, spectrum_width=args.spectrum_width)
    if cfg.spectrum_width != models.FULL_WIDTH:
        print(f"note: spectrum width {cfg.spectrum_width} (reduced, non-standard run)")
    manifest = load_manifest(args.manifest)
    artifacts = pipeline.train_from_manifest(manifest, cfg, _seed(args))
    save_bundle(artifacts.bundle, args.out)

    curves_dir = Path(args.curves_dir or Path(args.out).parent)
    curves_dir.mkdir(parents=True, exist_ok=True)
    epochs = range(1, len(artifacts.ae_losses) + 1)
    analysis.export_csv(curves_dir / "autoencoder_loss.csv", ["epoch", "mse"],
                        zip(epochs, artifacts.ae_losses))
    analysis.export_csv(
        curves_dir / "classifier_curves.csv", ["epoch", "ce_loss", "accuracy"],
        zip(epochs, artifacts.classifier.losses, artifacts.classifier.accuracies),
    )
    thr = artifacts.bundle.threshold
    print(f"trained on {len(manifest.entries)} manifest entries")
    print(f"threshold = {thr.threshold:.4f} (mu {thr.mu_d:.4f}, sigma {thr.sigma_d:.4f})")
    print(f"bundle written to {args.out}")
    return 0


def cmd_verify(args) -> int:
    bundle = load_bundle(args.bundle)
    paths = []
    for p in args.paths:
        p = Path(p)
        paths.extend(sorted(p.glob("*.wav")) if p.is_dir() else [p])
    any_counterfeit = False
    for path in paths:
        report = pipeline.verify_file(path, bundle)
        if args.json:
            print(report.to_json())
        else:
            print(f"{path}: {report.format_text()}")
        any_counterfeit |= not report.authentic
    return 3 if any_counterfeit else 0


def cmd_eval(args) -> int:
    bundle = load_bundle(args.bundle)
    manifest = load_manifest(args.manifest)
    result = pipeline.evaluate(manifest, bundle)
    rows = []
    for role in sorted(result.roles):
        m = result.roles[role]
        dist = sorted(m.distances)
        median = dist[len(dist) // 2]
        rows.append((role, m.count, m.accepted, f"{median:.4f}",
                     f"{min(dist):.4f}", f"{max(dist):.4f}"))
    print(f"{'role':<12}{'count':>6}{'accepted':>9}{'median_d':>12}{'min_d':>12}{'max_d':>12}")
    for row in rows:
        print(f"{row[0]:<12}{row[1]:>6}{row[2]:>9}{row[3]:>12}{row[4]:>12}{row[5]:>12}")
    print(f"false accept rate: {result.false_accept_rate:.3f}")
    print(f"false reject rate: {result.false_reject_rate:.3f}")
    if result.classifier_accuracy is not None:
        print(f"classifier accuracy (accepted genuine): {result.classifier_accuracy:.3f}")
    if args.csv:
        analysis.export_csv(args.csv,
                            ["role", "count", "accepted", "median_d", "min_d", "max_d"], rows)
    return 0


def cmd_export_plot(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "spectrum":
        bundle = load_bundle(args.bundle)
        clip = load_wav(args.input)
        sp = models.spectrum_from_clip(clip, bundle.config)
        restored = dsp.normalize_spectrum(models.reconstruct(bundle.autoencoder, sp))
        analysis.export_csv(out / "spectrum.csv", ["freq_hz", "original", "reconstructed"],
                            zip(sp.freqs, sp.bins, restored.bins))
        analysis.export_svg_lines(
            [("original", sp.freqs, sp.bins), ("reconstructed", restored.freqs, restored.bins)],
            out / "spectrum.svg", title="Original vs reconstructed spectrum")
        print(f"wrote {out / 'spectrum.csv'} and {out / 'spectrum.svg'}")
    elif args.kind == "spectrogram":
        clip = load_wav(args.input)
        mags, times, freqs = dsp.spectrogram(clip, frame=1024, hop=256)
        rows = [(f"{t:.6f}", f"{f:.2f}", f"{mags[i, j]:.6g}")
                for i, t in enumerate(times) for j, f in enumerate(freqs)]
        analysis.export_csv(out / "spectrogram.csv", ["time_s", "freq_hz", "magnitude"], rows)
        print(f"wrote {out / 'spectrogram.csv'}")
    elif args.kind == "pca":
        bundle = load_bundle(args.bundle)
        manifest = load_manifest(args.manifest)
        latents, labels = [], []
        for entry in manifest.entries:
            if entry.role in ("train", "test") and entry.genuine:
                sp = models.spectrum_from_clip(load_wav(manifest.resolve(entry)), bundle.config)
                latents.append(models.encode(bundle.autoencoder, sp))
                labels.append(entry.label)
        result = analysis.pca_2d(latents, labels)
        analysis.export_csv(out / "pca.csv", ["pc1", "pc2", "label"],
                            [(x, y, l) for (x, y), l in zip(result.projected, labels)])
        analysis.export_svg_scatter(result.projected, labels, out / "pca.svg",
                                    title="Latent space PCA")
        print(f"wrote {out / 'pca.csv'} and {out / 'pca.svg'}")
    elif args.kind == "curves":
        import csv as _csv

        with open(args.input) as fh:
            reader = _csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in row] for row in reader]
        xs = [r[0] for r in rows]
        series = [(header[c], xs, [r[c] for r in rows]) for c in range(1, len(header))]
        analysis.export_svg_lines(series, out / "curves.svg", title="Training curves")
        print(f"wrote {out / 'curves.svg'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resonant-auth",
        description="Authenticate bullion coins from strike acoustics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train models from a corpus manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--curves-dir")
    p.add_argument("--spectrum-width", type=int,
                   help="reduced spectrum width for fast runs (non-standard)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("verify", help="verify WAV file(s) against a trained bundle")
    p.add_argument("paths", nargs="+")
    p.add_argument("--bundle", required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="evaluate a bundle over an annotated manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--csv")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-plot", help="export plot data as CSV/SVG")
    p.add_argument("--kind", required=True,
                   choices=["spectrum", "spectrogram", "pca", "curves"])
    p.add_argument("--bundle")
    p.add_argument("--manifest")
    p.add_argument("--input")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_export_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ResonantAuthError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
