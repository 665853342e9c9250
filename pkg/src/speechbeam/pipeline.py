"""End-to-end enhancement: per-channel STFT -> steered sum -> mask -> gain ->
inverse STFT, in whole-signal and hop-by-hop streaming forms.

The batch and streaming paths share every per-frame kernel, so their outputs
are bit-identical; tests assert this rather than trusting it.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .beamformer import BeamformStream, delay_and_sum, total_power_reference
from .errors import InvalidConfigError, InvalidInputError
from .geometry import TdoaTrajectory
from .postfilter import (
    GruStream,
    apply_gain,
    gru_infer,
    ideal_ratio_mask,
    make_features,
    mask_to_gain,
)
from .stft import IstftStream, StftConfig, istft, stft

MASK_SOURCES = ("none", "oracle", "gru")
PEAK_TARGET = 0.99


def _normalize(signal, mode):
    if mode == "none":
        return signal
    if mode != "peak":
        raise InvalidConfigError(f"unknown normalization mode {mode!r}")
    peak = np.abs(signal).max(initial=0.0)
    return signal if peak == 0 else signal * (PEAK_TARGET / peak)


def _multichannel_stft(wave, config):
    return np.stack([stft(ch, config) for ch in wave])


def compute_masks(mask_source, *, beamformed=None, total_power=None, weights=None,
                  target_images=None, noise_images=None, config=None):
    """Mask spectrogram (L, K) for the requested source, or None for 'none'."""
    if mask_source == "none":
        return None
    if mask_source == "oracle":
        if target_images is None or noise_images is None:
            raise InvalidInputError("oracle masks need target and noise component waves")
        return ideal_ratio_mask(
            _multichannel_stft(target_images, config),
            _multichannel_stft(noise_images, config),
        )
    if mask_source == "gru":
        if weights is None:
            raise InvalidInputError("gru masks need a weights file")
        features = make_features(beamformed, total_power, weights)
        return gru_infer(features, weights)
    raise InvalidConfigError(f"unknown mask source {mask_source!r}")


def enhance(mixture, trajectory, config, mask_source="none", weights=None,
            target_images=None, noise_images=None, normalize="peak"):
    """Whole-signal enhancement of an (M, n) mixture -> (mono (n,), intermediates).

    Intermediates: beamformed Y, total power, mask (None in 'none' mode).
    """
    mixture = np.asarray(mixture, dtype=np.float64)
    if mixture.ndim != 2:
        raise InvalidInputError(f"mixture must be (M, n), got shape {mixture.shape}")
    num_samples = mixture.shape[1]
    specs = _multichannel_stft(mixture, config)
    beamformed = delay_and_sum(specs, trajectory, config)
    total_power = total_power_reference(specs)
    mask = compute_masks(
        mask_source,
        beamformed=beamformed,
        total_power=total_power,
        weights=weights,
        target_images=target_images,
        noise_images=noise_images,
        config=config,
    )
    enhanced_spec = beamformed if mask is None else apply_gain(beamformed, mask_to_gain(mask))
    out = istft(enhanced_spec, config, length=num_samples)
    return _normalize(out, normalize), {
        "beamformed": beamformed,
        "total_power": total_power,
        "mask": mask,
    }


class StreamingEnhancer:
    """Hop-by-hop pipeline with one analysis frame of algorithmic delay.

    In 'oracle' mode the per-frame masks are supplied up front (they require
    the clean components, which a live system does not have); 'gru' and
    'none' modes are fully online.
    """

    def __init__(self, config, num_mics, mask_source="none", weights=None,
                 oracle_masks=None):
        if mask_source not in MASK_SOURCES:
            raise InvalidConfigError(f"unknown mask source {mask_source!r}")
        if mask_source == "gru" and weights is None:
            raise InvalidInputError("gru mask source needs weights")
        if mask_source == "oracle" and oracle_masks is None:
            raise InvalidInputError("oracle mask source needs precomputed masks")
        self.config = config
        self.mask_source = mask_source
        self.weights = weights
        self._beamform = BeamformStream(config, num_mics)
        self._gru = GruStream(weights) if mask_source == "gru" else None
        self._oracle_masks = oracle_masks
        self._istft = IstftStream(config)
        self._frame_index = 0

    def push(self, hop_samples, tdoas):
        """Push (M, hop) input samples; returns hop enhanced samples or None."""
        result = self._beamform.push(hop_samples, tdoas)
        if result is None:
            return None
        beamformed, total_power = result
        if self.mask_source == "none":
            frame = beamformed
        elif self.mask_source == "gru":
            raw = np.concatenate(
                [
                    np.log(np.abs(beamformed) ** 2 + self.weights.epsilon),
                    np.log(total_power + self.weights.epsilon),
                ]
            )
            feature = (raw - self.weights.norm_mean.astype(np.float64)) \
                / self.weights.norm_std.astype(np.float64)
            frame = beamformed * np.sqrt(self._gru.step(feature))
        else:
            frame = beamformed * np.sqrt(self._oracle_masks[self._frame_index])
        self._frame_index += 1
        return self._istft.push(frame)

    def flush(self):
        return self._istft.flush()

    @property
    def algorithmic_latency_ms(self):
        cfg = self.config
        return (cfg.frame_size + cfg.hop_size) / cfg.sample_rate * 1000.0


@dataclass
class LatencyReport:
    algorithmic_latency_ms: float
    hop_ms: float
    compute_p50_ms: float
    compute_p95_ms: float
    compute_max_ms: float
    real_time_factor: float
    num_hops: int
    backend: str = field(default_factory=kernels.backend_name)

    def to_dict(self):
        return dict(self.__dict__)


def stream_enhance(mixture, trajectory, config, mask_source="none", weights=None,
                   oracle_masks=None, normalize="peak"):
    """Run the streaming pipeline over a whole recording, timing each hop.

    Returns (enhanced mono signal padded to the input length, LatencyReport).
    """
    mixture = np.asarray(mixture, dtype=np.float64)
    num_mics, num_samples = mixture.shape
    hop = config.hop_size
    enhancer = StreamingEnhancer(
        config, num_mics, mask_source=mask_source, weights=weights,
        oracle_masks=oracle_masks,
    )
    tdoas = trajectory.tdoas
    pieces = []
    timings = []
    frame_index = 0
    for start in range(0, num_samples - hop + 1, hop):
        block = mixture[:, start:start + hop]
        tau = tdoas[min(frame_index, len(tdoas) - 1)]
        t0 = time.perf_counter()
        out = enhancer.push(block, tau)
        timings.append(time.perf_counter() - t0)
        if out is not None:
            pieces.append(out)
            frame_index += 1
    pieces.append(enhancer.flush())
    out = np.concatenate(pieces) if pieces else np.zeros(0)
    if out.size < num_samples:
        out = np.pad(out, (0, num_samples - out.size))
    out = out[:num_samples]
    timings_ms = 1000.0 * np.asarray(timings)
    report = LatencyReport(
        algorithmic_latency_ms=enhancer.algorithmic_latency_ms,
        hop_ms=hop / config.sample_rate * 1000.0,
        compute_p50_ms=float(np.percentile(timings_ms, 50)),
        compute_p95_ms=float(np.percentile(timings_ms, 95)),
        compute_max_ms=float(timings_ms.max()),
        real_time_factor=float(timings_ms.sum() / 1000.0
                               / (num_samples / config.sample_rate)),
        num_hops=len(timings),
    )
    return _normalize(out, normalize), report
