"""Free-field scenario synthesis: fractional-delay propagation to the array,
SNR-controlled mixing, and randomized batch generation with ground truth.

Propagation is direct path only: per-mic delay ||source - mic|| / c applied
with a 64-tap Blackman-windowed sinc interpolator, amplitude scaled by
1 m / distance. No reverberation, so the geometric TDoAs are exact ground
truth for the beamformer.

All randomness goes through numpy's default_rng (PCG64), explicitly seeded,
so manifests are reproducible across platforms.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import InvalidInputError
from .geometry import (
    ArrayGeometry,
    PinholeCamera,
    PixelTrack,
    TdoaTrajectory,
    direction_from_angles,
    tdoa_from_direction,
)
from .stft import StftConfig

SINC_TAPS = 64
MIN_DISTANCE = 0.3
REFERENCE_DISTANCE = 1.0


def _fractional_delay_filter(frac):
    """64-tap windowed-sinc FIR with group delay (SINC_TAPS//2 - 1) + frac."""
    center = SINC_TAPS // 2 - 1 + frac
    n = np.arange(SINC_TAPS)
    x = (n - center) / (SINC_TAPS // 2)  # [-1, 1] support of the window
    window = np.where(
        np.abs(x) <= 1.0,
        0.42 + 0.5 * np.cos(np.pi * x) + 0.08 * np.cos(2 * np.pi * x),
        0.0,
    )
    return np.sinc(n - center) * window


def _delay_signal(signal, delay_samples):
    """Delay a signal by a non-negative fractional number of samples."""
    int_part = int(math.floor(delay_samples))
    frac = delay_samples - int_part
    fir = _fractional_delay_filter(frac)
    full = fftconvolve(signal, fir)
    # full[i] is the input delayed by (SINC_TAPS//2 - 1 + frac) at index i.
    shift = int_part - (SINC_TAPS // 2 - 1)
    out = np.zeros(signal.size)
    if shift >= 0:
        avail = full.size - 0
        src = full[: signal.size - shift] if shift < signal.size else full[:0]
        out[shift:shift + src.size] = src
    else:
        src = full[-shift:-shift + signal.size]
        out[: src.size] = src
    return out


def propagate(signal, position, geometry, sample_rate):
    """Free-field propagation of a mono source to all mics -> (M, n).

    Per mic: delay ||position - p_m|| / c, amplitude 1 m / distance, output
    trimmed to the input length.
    """
    signal = np.asarray(signal, dtype=np.float64)
    position = np.asarray(position, dtype=np.float64)
    if signal.ndim != 1 or signal.size == 0:
        raise InvalidInputError("propagate expects a non-empty mono signal")
    if position.shape != (3,):
        raise InvalidInputError("position must be a 3-vector in meters")
    distances = np.linalg.norm(position - geometry.mic_positions, axis=1)
    if np.linalg.norm(position) <= MIN_DISTANCE:
        raise InvalidInputError(
            f"source at {np.linalg.norm(position):.2f} m; must be farther than {MIN_DISTANCE} m"
        )
    out = np.empty((geometry.num_mics, signal.size))
    for m, dist in enumerate(distances):
        delayed = _delay_signal(signal, dist / geometry.speed_of_sound * sample_rate)
        out[m] = delayed * (REFERENCE_DISTANCE / dist)
    return out


def mix_at_snr(target_images, noise_images, snr_db, reference_channel=0):
    """Scale the noise so the reference-channel SNR equals snr_db exactly.

    Returns (mixture, target_images, scaled noise_images); mixture is the
    sample-exact sum of the returned components.
    """
    target_images = np.asarray(target_images, dtype=np.float64)
    noise_images = np.asarray(noise_images, dtype=np.float64)
    if target_images.shape != noise_images.shape:
        raise InvalidInputError("target and noise images must share shape")
    p_target = np.mean(target_images[reference_channel] ** 2)
    p_noise = np.mean(noise_images[reference_channel] ** 2)
    if p_target == 0 or p_noise == 0:
        raise InvalidInputError("cannot set SNR with a zero-power component")
    scale = math.sqrt(p_target / (p_noise * 10.0 ** (snr_db / 10.0)))
    noise_scaled = noise_images * scale
    return target_images + noise_scaled, target_images, noise_scaled


@dataclass(frozen=True)
class SourceSpec:
    """One sound source: a mono signal placed at azimuth/elevation/distance."""

    signal: object  # np.ndarray or a WAV path resolved by the renderer
    azimuth_deg: float
    elevation_deg: float
    distance_m: float
    role: str = "interferer"  # "target" | "interferer"
    gain_db: float = 0.0
    label: str = ""  # corpus tag, e.g. "speech" / "noise"

    @property
    def position(self):
        return self.distance_m * direction_from_angles(self.azimuth_deg, self.elevation_deg)


@dataclass(frozen=True)
class ScenarioSpec:
    target: SourceSpec
    interferers: tuple
    snr_db: float
    duration_s: float = 10.0
    seed: int = 0
    name: str = "scenario"
    fov_deg: float = 80.0  # full horizontal field of view

    def __post_init__(self):
        if not 1 <= len(self.interferers) <= 3:
            raise InvalidInputError("scenario needs 1 to 3 interferers")
        if self.target.role != "target":
            raise InvalidInputError("target source must have role 'target'")
        if abs(self.target.azimuth_deg) > self.fov_deg / 2:
            raise InvalidInputError(
                f"target azimuth {self.target.azimuth_deg} outside field of view "
                f"+-{self.fov_deg / 2}"
            )
        for src in self.interferers:
            if (
                abs(src.azimuth_deg - self.target.azimuth_deg) < 1e-9
                and abs(src.elevation_deg - self.target.elevation_deg) < 1e-9
                and abs(src.distance_m - self.target.distance_m) < 1e-9
            ):
                raise InvalidInputError("interferer coincides with the target position")


@dataclass(frozen=True)
class ScenarioOutput:
    mixture: np.ndarray  # (M, n)
    target_images: np.ndarray  # (M, n)
    noise_images: np.ndarray  # (M, n)
    pixel_track: PixelTrack
    tdoa_truth: TdoaTrajectory
    metadata: dict


def _resolve_signal(source, num_samples, rng):
    from .audio_io import read_wav

    if isinstance(source.signal, (str, os.PathLike)):
        signal, _ = read_wav(source.signal)
        if signal.ndim != 1:
            raise InvalidInputError(f"{source.signal}: corpus files must be mono")
    else:
        signal = np.asarray(source.signal, dtype=np.float64)
    if signal.size == 0:
        raise InvalidInputError("empty source signal")
    if signal.size < num_samples:
        reps = int(np.ceil(num_samples / signal.size))
        signal = np.tile(signal, reps)
    if signal.size > num_samples:
        # Deterministic random excerpt so repeated corpus files differ.
        start = int(rng.integers(0, signal.size - num_samples + 1))
        signal = signal[start:start + num_samples]
    return signal * 10.0 ** (source.gain_db / 20.0)


def render_scenario(spec, geometry=None, stft_config=None, camera=None, track_rate=4.0):
    """Synthesize one scenario: propagate, mix at the requested SNR, and emit
    the target pixel track and ground-truth TDoA trajectory."""
    geometry = geometry or ArrayGeometry.default()
    stft_config = stft_config or StftConfig()
    camera = camera or PinholeCamera(horizontal_fov_deg=spec.fov_deg)
    rng = np.random.default_rng(spec.seed)
    num_samples = int(round(spec.duration_s * stft_config.sample_rate))

    target_signal = _resolve_signal(spec.target, num_samples, rng)
    target_images = propagate(target_signal, spec.target.position, geometry,
                              stft_config.sample_rate)
    noise_images = np.zeros_like(target_images)
    for src in spec.interferers:
        noise_images += propagate(
            _resolve_signal(src, num_samples, rng), src.position, geometry,
            stft_config.sample_rate,
        )
    mixture, target_images, noise_images = mix_at_snr(target_images, noise_images, spec.snr_db)

    num_frames = stft_config.num_frames(num_samples)
    doa = direction_from_angles(spec.target.azimuth_deg, spec.target.elevation_deg)
    tau = tdoa_from_direction(geometry, doa, stft_config.sample_rate)
    truth = TdoaTrajectory.constant(tau, num_frames,
                                    tau_max=geometry.tau_max(stft_config.sample_rate))

    u, v = camera.project(spec.target.position)
    times = np.arange(0.0, spec.duration_s, 1.0 / track_rate)
    track = PixelTrack(
        tuple((float(t), u, v) for t in times),
        image_width=camera.image_width,
        image_height=camera.image_height,
        rate=track_rate,
    )

    metadata = {
        "name": spec.name,
        "seed": spec.seed,
        "snr_db": spec.snr_db,
        "duration_s": spec.duration_s,
        "target": _source_meta(spec.target),
        "interferers": [_source_meta(s) for s in spec.interferers],
    }
    return ScenarioOutput(mixture, target_images, noise_images, track, truth, metadata)


def _source_meta(source):
    return {
        "file": str(source.signal) if isinstance(source.signal, (str, os.PathLike)) else None,
        "azimuth_deg": source.azimuth_deg,
        "elevation_deg": source.elevation_deg,
        "distance_m": source.distance_m,
        "role": source.role,
        "gain_db": source.gain_db,
        "label": source.label,
    }


def generate_batch(speech_files, noise_files, count, seed, snr_range=(0.5, 10.0),
                   duration_s=10.0, fov_deg=80.0):
    """Randomized scenario specs mirroring the recorded-mixture protocol.

    Target: a speech file inside the field of view. Interferers: 1-3 sources
    anywhere in azimuth, drawn from speech or noise corpora, never reusing the
    target's file within a scenario.
    """
    speech_files = sorted(str(p) for p in speech_files)
    noise_files = sorted(str(p) for p in noise_files)
    if not speech_files:
        raise InvalidInputError("speech corpus is empty")
    if not noise_files:
        raise InvalidInputError("noise corpus is empty")
    rng = np.random.default_rng(seed)
    specs = []
    for i in range(count):
        target_file = speech_files[int(rng.integers(len(speech_files)))]
        target = SourceSpec(
            signal=target_file,
            azimuth_deg=float(rng.uniform(-fov_deg / 2, fov_deg / 2)),
            elevation_deg=float(rng.uniform(-10.0, 10.0)),
            distance_m=float(rng.uniform(1.0, 3.0)),
            role="target",
            label="speech",
        )
        interferers = []
        for _ in range(int(rng.integers(1, 4))):
            if rng.random() < 0.5:
                pool, label = noise_files, "noise"
            else:
                pool, label = [f for f in speech_files if f != target_file], "speech"
                if not pool:
                    pool, label = noise_files, "noise"
            interferers.append(
                SourceSpec(
                    signal=pool[int(rng.integers(len(pool)))],
                    azimuth_deg=float(rng.uniform(-180.0, 180.0)),
                    elevation_deg=float(rng.uniform(-10.0, 10.0)),
                    distance_m=float(rng.uniform(1.0, 3.0)),
                    role="interferer",
                    gain_db=float(rng.uniform(-5.0, 5.0)),
                    label=label,
                )
            )
        specs.append(
            ScenarioSpec(
                target=target,
                interferers=tuple(interferers),
                snr_db=float(rng.uniform(*snr_range)),
                duration_s=duration_s,
                seed=int(rng.integers(2**31)),
                name=f"scenario_{i:04d}",
                fov_deg=fov_deg,
            )
        )
    return specs


def write_manifest(specs, path):
    entries = []
    for spec in specs:
        entries.append(
            {
                "name": spec.name,
                "seed": spec.seed,
                "snr_db": spec.snr_db,
                "duration_s": spec.duration_s,
                "fov_deg": spec.fov_deg,
                "target": _source_meta(spec.target),
                "interferers": [_source_meta(s) for s in spec.interferers],
            }
        )
    with open(path, "w") as f:
        json.dump({"scenarios": entries}, f, indent=2, sort_keys=True)


def read_manifest(path):
    with open(path) as f:
        data = json.load(f)
    specs = []
    for entry in data["scenarios"]:
        target = SourceSpec(
            signal=entry["target"]["file"],
            azimuth_deg=entry["target"]["azimuth_deg"],
            elevation_deg=entry["target"]["elevation_deg"],
            distance_m=entry["target"]["distance_m"],
            role="target",
            gain_db=entry["target"]["gain_db"],
            label=entry["target"]["label"],
        )
        interferers = tuple(
            SourceSpec(
                signal=s["file"],
                azimuth_deg=s["azimuth_deg"],
                elevation_deg=s["elevation_deg"],
                distance_m=s["distance_m"],
                role="interferer",
                gain_db=s["gain_db"],
                label=s["label"],
            )
            for s in entry["interferers"]
        )
        specs.append(
            ScenarioSpec(
                target=target,
                interferers=interferers,
                snr_db=entry["snr_db"],
                duration_s=entry["duration_s"],
                seed=entry["seed"],
                name=entry["name"],
                fov_deg=entry["fov_deg"],
            )
        )
    return specs
