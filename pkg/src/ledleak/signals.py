"""Uniformly sampled waveform containers and waveform file I/O.

Two thin containers cover the analog half of the pipeline: radiant
intensity leaving an indicator (OpticalWaveform) and amplified detector
voltage (DetectorWaveform).  Files are stored either as headerless
binary (little-endian float64) or one-sample-per-line text, with a
plain-text key=value sidecar carrying the metadata.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .lineproto import Level, LineWaveform


def _as_samples(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"samples must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass
class OpticalWaveform:
    """Radiant intensity samples (W/sr at the source; W at a detector for ambient light)."""

    sample_rate: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        self.samples = _as_samples(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate


@dataclass
class DetectorWaveform:
    """Amplified photodetector output voltage samples."""

    sample_rate: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        self.samples = _as_samples(self.samples)
        if not np.isfinite(self.samples).all():
            raise ValueError("detector samples must be finite")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate


def line_to_samples(
    line: LineWaveform,
    sample_rate: float,
    *,
    amplitude: float = 1.0,
    lit_level: Level = Level.SPACE,
    n_samples: int | None = None,
) -> np.ndarray:
    """Rectangular sampling of a line waveform (no emitter dynamics).

    Samples read `amplitude` while the line sits at `lit_level` and 0
    otherwise, using the same left-continuous convention as
    LineWaveform.level_at.  `n_samples` pads (at the final level) or
    truncates to a fixed length.
    """
    n = int(round(line.duration * sample_rate)) if n_samples is None else n_samples
    t = np.arange(n) / sample_rate
    lit = line.space_at(t) if lit_level is Level.SPACE else ~line.space_at(t)
    return amplitude * lit.astype(float)


def sum_waveforms(waves: list[OpticalWaveform]) -> OpticalWaveform:
    """Pointwise sum; shorter inputs are zero-padded to the longest."""
    if not waves:
        raise ValueError("need at least one waveform")
    rate = waves[0].sample_rate
    for w in waves[1:]:
        if w.sample_rate != rate:
            raise ValueError("sample rates differ")
    n = max(len(w.samples) for w in waves)
    total = np.zeros(n)
    for w in waves:
        total[: len(w.samples)] += w.samples
    return OpticalWaveform(rate, total)


# --- file formats ---------------------------------------------------------

_KINDS = {"optical": OpticalWaveform, "detector": DetectorWaveform}


def save_waveform(path: str, wave, *, file_format: str = "binary", units: str = "", seed=None) -> None:
    """Write samples plus a `<path>.meta` sidecar describing them."""
    if file_format not in ("binary", "text"):
        raise ValueError(f"unknown waveform file format {file_format!r}")
    kind = "detector" if isinstance(wave, DetectorWaveform) else "optical"
    if file_format == "binary":
        wave.samples.astype("<f8").tofile(path)
    else:
        with open(path, "w") as fh:
            for v in wave.samples:
                fh.write(f"{float(v)!r}\n")
    meta = {
        "kind": kind,
        "format": file_format,
        "sample_rate": repr(float(wave.sample_rate)),
        "samples": str(len(wave.samples)),
    }
    if units:
        meta["units"] = units
    if seed is not None:
        meta["seed"] = str(seed)
    with open(path + ".meta", "w") as fh:
        for key, value in meta.items():
            fh.write(f"{key}={value}\n")


def load_waveform(path: str):
    """Read a waveform written by save_waveform (binary or text)."""
    meta_path = path + ".meta"
    if not os.path.exists(meta_path):
        raise ConfigError(f"missing waveform sidecar {meta_path}")
    meta: dict[str, str] = {}
    with open(meta_path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            if "=" not in raw:
                raise ConfigError(f"{meta_path}:{lineno}: expected key=value, got {raw!r}")
            key, _, value = raw.partition("=")
            meta[key.strip()] = value.strip()
    for key in ("kind", "format", "sample_rate"):
        if key not in meta:
            raise ConfigError(f"{meta_path}: missing required key {key!r}")
    if meta["kind"] not in _KINDS:
        raise ConfigError(f"{meta_path}: unknown waveform kind {meta['kind']!r}")
    if meta["format"] == "binary":
        samples = np.fromfile(path, dtype="<f8")
    elif meta["format"] == "text":
        samples = np.loadtxt(path, dtype=float, ndmin=1)
    else:
        raise ConfigError(f"{meta_path}: unknown file format {meta['format']!r}")
    if "samples" in meta and int(meta["samples"]) != len(samples):
        raise ConfigError(f"{path}: expected {meta['samples']} samples, found {len(samples)}")
    return _KINDS[meta["kind"]](float(meta["sample_rate"]), samples)
