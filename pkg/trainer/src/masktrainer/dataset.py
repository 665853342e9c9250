"""Scenario directories -> training tensors.

A scenario directory (as produced by the enhancement engine's `simulate`
command) holds mixture.wav / target.wav / noise.wav (float32, channels x
samples) plus tdoa.json with the per-frame steering trajectory. Each scenario
becomes one (features, mask, power) triple: network input, training target,
and the per-cell loss weight |Y|^2.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from . import dsp


def read_wave(path):
    """float (M, n) or (n,) samples from a WAV file."""
    rate, data = wavfile.read(path)
    if data.dtype == np.int16:
        data = data.astype(np.float64) / 32768.0
    else:
        data = data.astype(np.float64)
    if data.ndim == 2:
        data = data.T
    return data, rate


def read_tdoas(path):
    with open(path) as f:
        return np.asarray(json.load(f)["tdoas"], dtype=np.float64)


@dataclass
class ScenarioTensors:
    features: np.ndarray  # (L, 2K) raw log-power features
    mask: np.ndarray  # (L, K) ratio-mask target
    power: np.ndarray  # (L, K) beamformed power |Y|^2, the loss weight
    name: str = ""


def load_scenario(directory):
    directory = Path(directory)
    mixture, _ = read_wave(directory / "mixture.wav")
    target, _ = read_wave(directory / "target.wav")
    noise, _ = read_wave(directory / "noise.wav")
    tdoas = read_tdoas(directory / "tdoa.json")

    specs = dsp.multichannel_stft(mixture)
    beamformed = dsp.steered_sum(specs, tdoas[: specs.shape[1]])
    features = dsp.raw_features(beamformed, dsp.total_power(specs))
    mask = dsp.ideal_ratio_mask(
        dsp.multichannel_stft(target), dsp.multichannel_stft(noise)
    )
    return ScenarioTensors(
        features=features,
        mask=mask,
        power=np.abs(beamformed) ** 2,
        name=directory.name,
    )


def scenario_dirs(root):
    """Scenario subdirectories listed by the manifest, in manifest order."""
    root = Path(root)
    with open(root / "manifest.json") as f:
        manifest = json.load(f)
    return [root / entry["name"] for entry in manifest["scenarios"]]


def build_dataset(directories):
    """Load scenarios and compute per-feature normalization statistics."""
    scenarios = [load_scenario(d) for d in directories]
    stacked = np.concatenate([s.features for s in scenarios])
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    std[std < 1e-6] = 1.0
    return scenarios, mean, std


def save_dataset(path, scenarios, mean, std):
    arrays = {"norm_mean": mean, "norm_std": std,
              "names": np.array([s.name for s in scenarios])}
    for i, s in enumerate(scenarios):
        arrays[f"features_{i}"] = s.features.astype(np.float32)
        arrays[f"mask_{i}"] = s.mask.astype(np.float32)
        arrays[f"power_{i}"] = s.power.astype(np.float32)
    np.savez_compressed(path, **arrays)


def load_dataset(path):
    data = np.load(path, allow_pickle=False)
    names = [str(n) for n in data["names"]]
    scenarios = [
        ScenarioTensors(
            features=data[f"features_{i}"].astype(np.float64),
            mask=data[f"mask_{i}"].astype(np.float64),
            power=data[f"power_{i}"].astype(np.float64),
            name=name,
        )
        for i, name in enumerate(names)
    ]
    return scenarios, data["norm_mean"].astype(np.float64), data["norm_std"].astype(np.float64)
