"""Spike-train dataset format, validation, and synthetic benchmark generation.

A dataset is a directory with a ``manifest.json`` (channel count, sample
duration, per-sample file + label) and one CSV per sample with
``channel,time_ms`` rows, times printed at fixed 3-decimal precision. Spike
times are quantized to 0.001 ms on generation so save/load round-trips are
bit-exact.

The synthetic generator stands in for a preprocessed speech corpus: each
class is a piecewise-constant firing-rate template over channel groups and
time segments, and samples are inhomogeneous Poisson draws from the template
with a per-sample global amplitude factor and per-spike jitter mimicking
speaker variability.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import seeding

__all__ = [
    "SpikeSample",
    "SyntheticSpec",
    "Dataset",
    "DatasetFormatError",
    "generate_synthetic",
    "save_dataset",
    "load_dataset",
    "validate",
]


class DatasetFormatError(ValueError):
    """Malformed dataset file; message carries file and line context."""


@dataclass(frozen=True)
class SpikeSample:
    """One labeled spike train: parallel channel/time arrays sorted by
    (channel, time), with strictly increasing times within a channel."""

    channels: np.ndarray  # (n_spikes,) int
    times: np.ndarray     # (n_spikes,) float ms
    label: int
    duration: float       # ms

    def __post_init__(self):
        self.channels.setflags(write=False)
        self.times.setflags(write=False)

    @property
    def n_spikes(self) -> int:
        return len(self.times)

    def violations(self, n_channels: int) -> list[str]:
        out = []
        if len(self.channels) != len(self.times):
            out.append("channel/time arrays differ in length")
            return out
        if self.n_spikes == 0:
            return out
        if self.channels.min() < 0 or self.channels.max() >= n_channels:
            out.append(f"channel index outside [0, {n_channels})")
        if self.times.min() < 0 or self.times.max() >= self.duration:
            out.append(f"spike time outside [0, {self.duration})")
        order = np.lexsort((self.times, self.channels))
        if not np.array_equal(order, np.arange(self.n_spikes)):
            out.append("spikes not sorted by (channel, time)")
        same = self.channels[1:] == self.channels[:-1]
        if np.any(same & (self.times[1:] <= self.times[:-1])):
            out.append("per-channel times not strictly increasing")
        return out


@dataclass(frozen=True)
class Dataset:
    samples: tuple[SpikeSample, ...]
    n_channels: int
    duration: float  # ms

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the synthetic multi-class benchmark.

    Channels are split into ``n_groups`` round-robin groups; each class
    activates, per time segment, one group at ``rate_hi_hz`` (the rest sit at
    ``rate_lo_hz``). The segment-to-group assignment is a seeded draw per
    class, so classes differ both in which groups they favor and in temporal
    order. ``contrast`` scales the hi/lo gap around their mean, the knob used
    to calibrate benchmark difficulty.

    The last ``2 * n_twin_pairs`` classes form rate-twin pairs: the second
    class of a pair reuses the first one's segment-to-group assignment in
    shuffled temporal order, so both twins have identical time-averaged
    channel rates. A readout over mean reservoir rates can only separate them
    through whatever temporal structure the reservoir retains, which makes
    twin resolution sensitive to synapse dynamics and operating point.

    The defaults are the calibrated 10-class / 500-sample benchmark used by
    the acceptance suite; regenerate with a different seed or knob values for
    new experiments.
    """

    n_classes: int = 10
    n_channels: int = 77
    samples_per_class: int = 50
    duration: float = 1000.0  # ms
    n_segments: int = 14
    n_groups: int = 7
    rate_hi_hz: float = 120.0
    rate_lo_hz: float = 3.0
    contrast: float = 1.0
    n_twin_pairs: int = 2
    jitter: float = 4.0  # ms, per-spike uniform +/- jitter
    amp_low: float = 0.8
    amp_high: float = 1.2
    seed: int = 0

    def __post_init__(self):
        if not 0 <= 2 * self.n_twin_pairs <= self.n_classes:
            raise ValueError("need 0 <= 2 * n_twin_pairs <= n_classes")
        if self.rate_hi_hz < 0 or self.rate_lo_hz < 0:
            raise ValueError("rates must be non-negative")
        if not 0 <= self.contrast:
            raise ValueError("contrast must be non-negative")
        if self.n_segments < 1 or self.n_groups < 1:
            raise ValueError("need at least one segment and one group")
        if self.jitter < 0:
            raise ValueError("jitter must be non-negative")
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    def to_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "n_channels": self.n_channels,
            "samples_per_class": self.samples_per_class,
            "duration_ms": self.duration,
            "n_segments": self.n_segments,
            "n_groups": self.n_groups,
            "rate_hi_hz": self.rate_hi_hz,
            "rate_lo_hz": self.rate_lo_hz,
            "contrast": self.contrast,
            "n_twin_pairs": self.n_twin_pairs,
            "jitter_ms": self.jitter,
            "amp_low": self.amp_low,
            "amp_high": self.amp_high,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        rename = {"duration_ms": "duration", "jitter_ms": "jitter"}
        known = set(cls.__dataclass_fields__) | set(rename)
        known -= {"duration", "jitter"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown synthetic spec keys: {sorted(unknown)}")
        kwargs = {rename.get(k, k): v for k, v in d.items()}
        return cls(**kwargs)


def class_rate_templates(spec: SyntheticSpec) -> np.ndarray:
    """Per-class piecewise-constant rate templates, (classes, segments, channels), spikes/ms."""
    mid = 0.5 * (spec.rate_hi_hz + spec.rate_lo_hz)
    half_gap = 0.5 * (spec.rate_hi_hz - spec.rate_lo_hz) * spec.contrast
    hi = max(mid + half_gap, 0.0) / 1000.0
    lo = max(mid - half_gap, 0.0) / 1000.0
    group_of = np.arange(spec.n_channels) % spec.n_groups
    templates = np.full((spec.n_classes, spec.n_segments, spec.n_channels), lo)
    first_twin = spec.n_classes - 2 * spec.n_twin_pairs
    for c in range(spec.n_classes):
        gen = seeding.rng(spec.seed, "template", c)
        if c < first_twin or (c - first_twin) % 2 == 0:
            active = gen.integers(0, spec.n_groups, size=spec.n_segments)
        else:
            # twin: same multiset of group assignments as the previous class,
            # in a different temporal order -> identical mean channel rates
            base = _assignment(spec, c - 1)
            active = gen.permutation(base)
            while np.array_equal(active, base):
                active = gen.permutation(base)
        for s, g in enumerate(active):
            templates[c, s, group_of == g] = hi
    return templates


def _assignment(spec: SyntheticSpec, c: int) -> np.ndarray:
    gen = seeding.rng(spec.seed, "template", c)
    return gen.integers(0, spec.n_groups, size=spec.n_segments)


def _draw_sample(spec: SyntheticSpec, templates, label: int, rep: int) -> SpikeSample:
    gen = seeding.rng(spec.seed, "sample", label, rep)
    amp = gen.uniform(spec.amp_low, spec.amp_high)
    seg_len = spec.duration / spec.n_segments
    chans: list[np.ndarray] = []
    times: list[np.ndarray] = []
    for ch in range(spec.n_channels):
        ts = []
        for s in range(spec.n_segments):
            rate = templates[label, s, ch] * amp
            n = gen.poisson(rate * seg_len)
            if n:
                ts.append(s * seg_len + gen.uniform(0.0, seg_len, size=n))
        if not ts:
            continue
        t = np.concatenate(ts)
        if spec.jitter > 0:
            t = t + gen.uniform(-spec.jitter, spec.jitter, size=len(t))
        t = t[(t >= 0.0) & (t < spec.duration)]
        t = np.unique(np.round(t, 3))
        t = t[t < spec.duration]
        if len(t):
            chans.append(np.full(len(t), ch, dtype=np.int64))
            times.append(t)
    if chans:
        channels = np.concatenate(chans)
        tt = np.concatenate(times)
    else:
        channels = np.empty(0, dtype=np.int64)
        tt = np.empty(0)
    return SpikeSample(channels=channels, times=tt, label=label, duration=spec.duration)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Seed-deterministic synthetic dataset, class-major sample order."""
    templates = class_rate_templates(spec)
    samples = tuple(
        _draw_sample(spec, templates, c, r)
        for c in range(spec.n_classes)
        for r in range(spec.samples_per_class)
    )
    return Dataset(samples=samples, n_channels=spec.n_channels, duration=spec.duration)


def validate(dataset: Dataset) -> dict:
    """Invariant report: per-sample violations plus class balance."""
    violations = []
    for i, s in enumerate(dataset.samples):
        for v in s.violations(dataset.n_channels):
            violations.append(f"sample {i}: {v}")
        if s.duration != dataset.duration:
            violations.append(f"sample {i}: duration {s.duration} != dataset {dataset.duration}")
    counts: dict[int, int] = {}
    for s in dataset.samples:
        counts[s.label] = counts.get(s.label, 0) + 1
    return {
        "n_samples": len(dataset),
        "violations": violations,
        "class_counts": {str(k): v for k, v in sorted(counts.items())},
    }


def save_dataset(dataset: Dataset, path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, s in enumerate(dataset.samples):
        name = f"sample_{i:04d}.csv"
        with open(root / name, "w", newline="") as f:
            f.write("channel,time_ms\n")
            for ch, t in zip(s.channels, s.times):
                f.write(f"{ch},{t:.3f}\n")
        entries.append({"file": name, "label": int(s.label)})
    manifest = {
        "n_channels": dataset.n_channels,
        "duration_ms": dataset.duration,
        "samples": entries,
    }
    with open(root / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _load_sample_csv(path: Path, label: int, n_channels: int, duration: float) -> SpikeSample:
    chans, times = [], []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["channel", "time_ms"]:
            raise DatasetFormatError(f"{path}:1: expected header 'channel,time_ms'")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise DatasetFormatError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                ch = int(row[0])
                t = float(row[1])
            except ValueError as e:
                raise DatasetFormatError(f"{path}:{lineno}: {e}") from e
            if not 0 <= ch < n_channels:
                raise DatasetFormatError(f"{path}:{lineno}: channel {ch} outside [0, {n_channels})")
            if not 0 <= t < duration:
                raise DatasetFormatError(f"{path}:{lineno}: time {t} outside [0, {duration})")
            if chans and ch == chans[-1] and t <= times[-1]:
                raise DatasetFormatError(f"{path}:{lineno}: non-increasing time within channel {ch}")
            if chans and ch < chans[-1]:
                raise DatasetFormatError(f"{path}:{lineno}: channels out of order")
            chans.append(ch)
            times.append(t)
    return SpikeSample(
        channels=np.asarray(chans, dtype=np.int64),
        times=np.asarray(times, dtype=np.float64),
        label=label,
        duration=duration,
    )


def load_dataset(path) -> Dataset:
    root = Path(path)
    manifest_path = root / "manifest.json"
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"{manifest_path}: {e}") from e
    unknown = set(manifest) - {"n_channels", "duration_ms", "samples"}
    if unknown:
        raise DatasetFormatError(f"{manifest_path}: unknown keys {sorted(unknown)}")
    n_channels = int(manifest["n_channels"])
    duration = float(manifest["duration_ms"])
    samples = []
    for entry in manifest["samples"]:
        unknown = set(entry) - {"file", "label"}
        if unknown:
            raise DatasetFormatError(f"{manifest_path}: unknown sample keys {sorted(unknown)}")
        samples.append(_load_sample_csv(root / entry["file"], int(entry["label"]), n_channels, duration))
    return Dataset(samples=tuple(samples), n_channels=n_channels, duration=duration)


def segment_count_features(dataset: Dataset, n_segments: int) -> np.ndarray:
    """Spike counts per (segment, channel) for each sample, flattened."""
    feats = np.zeros((len(dataset), n_segments * dataset.n_channels))
    seg_len = dataset.duration / n_segments
    for i, s in enumerate(dataset.samples):
        seg = np.minimum((s.times / seg_len).astype(np.int64), n_segments - 1)
        np.add.at(feats[i], seg * dataset.n_channels + s.channels, 1.0)
    return feats


def template_correlation_accuracy(dataset: Dataset, spec: SyntheticSpec) -> float:
    """Accuracy of a naive matched-template classifier; calibration aid only."""
    templates = class_rate_templates(spec).reshape(spec.n_classes, -1)
    templates = templates - templates.mean(axis=1, keepdims=True)
    feats = segment_count_features(dataset, spec.n_segments)
    feats = feats - feats.mean(axis=1, keepdims=True)
    scores = feats @ templates.T
    pred = np.argmax(scores, axis=1)
    return float(np.mean(pred == dataset.labels))
